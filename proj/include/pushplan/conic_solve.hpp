#pragma once

#include <string>
#include <vector>

#include "pushplan/conic_program.hpp"

namespace pushplan::conic {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

struct SolveOptions {
  double tolerance = 1e-8;  // feasibility and relative-gap tolerance
  int max_iterations = 200;
  bool verbose = false;
};

struct SolverOutcome {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<double> primal;  // present iff status == kOptimal
  double objective = 0.0;
  double wall_time_s = 0.0;
  int iterations = 0;
  bool reduced_accuracy = false;  // solver stopped at relaxed tolerances
  std::string diagnostics;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

const char* to_string(SolveStatus status);

// Solves via the Clarabel interior-point backend. Never throws on solver
// trouble; numerical failures surface through the outcome status.
SolverOutcome solve(const ConicProgram& program, const SolveOptions& options = {});

}  // namespace pushplan::conic
