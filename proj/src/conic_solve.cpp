#include "pushplan/conic_solve.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <map>

namespace {

struct ConeSpecC {
  int32_t tag;
  size_t dim;
};

constexpr int32_t kTagZero = 0;
constexpr int32_t kTagNonneg = 1;
constexpr int32_t kTagSoc = 2;
constexpr int32_t kTagPsdTriangle = 3;

extern "C" int pushplan_clarabel_solve(
    size_t n, size_t m, const size_t* a_colptr, const size_t* a_rowval,
    const double* a_nzval, size_t nnz, const double* q, const double* b,
    const ConeSpecC* cones, size_t ncones, double tol, uint32_t max_iter,
    bool verbose, double* x_out, double* obj_out, int32_t* status_out,
    uint32_t* iterations_out);

}  // namespace

namespace pushplan::conic {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

SolverOutcome solve(const ConicProgram& program, const SolveOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = program.num_variables();

  // Lower every constraint to Clarabel's A x + s = b, s in K. Each scalar
  // row of `s` is an affine expression of our variables; rotated cones are
  // rewritten as plain second-order cones, PSD triangles get the sqrt(2)
  // off-diagonal svec scaling.
  std::vector<AffineRow> srows;
  std::vector<ConeSpecC> cones;
  const double rt2 = std::sqrt(2.0);

  for (const auto& c : program.constraints()) {
    switch (c.kind) {
      case ConeKind::kZero:
      case ConeKind::kNonnegative: {
        if (c.rows.empty()) break;
        cones.push_back({c.kind == ConeKind::kZero ? kTagZero : kTagNonneg, c.rows.size()});
        for (const auto& r : c.rows) srows.push_back(r);
        break;
      }
      case ConeKind::kSecondOrder: {
        cones.push_back({kTagSoc, c.rows.size()});
        for (const auto& r : c.rows) srows.push_back(r);
        break;
      }
      case ConeKind::kRotatedSecondOrder: {
        // (u, v, w) with 2uv >= ||w||^2  <=>  ||(u - v, sqrt2 w)|| <= u + v.
        cones.push_back({kTagSoc, c.rows.size()});
        AffineRow sum = c.rows[0];
        for (const auto& t : c.rows[1].terms) sum.terms.push_back(t);
        sum.constant += c.rows[1].constant;
        AffineRow diff = c.rows[0] - c.rows[1];
        srows.push_back(std::move(sum));
        srows.push_back(std::move(diff));
        for (size_t i = 2; i < c.rows.size(); ++i) {
          AffineRow w = c.rows[i];
          w *= rt2;
          srows.push_back(std::move(w));
        }
        break;
      }
      case ConeKind::kPsdTriangle: {
        const int d = c.psd_side;
        cones.push_back({kTagPsdTriangle, static_cast<size_t>(d)});
        int k = 0;
        for (int j = 0; j < d; ++j)
          for (int i = 0; i <= j; ++i) {
            AffineRow e = c.rows[k++];
            if (i != j) e *= rt2;
            srows.push_back(std::move(e));
          }
        break;
      }
    }
  }

  const size_t m = srows.size();
  // s = b - A x  =>  A entries are negated row coefficients, b the constants.
  std::vector<double> b(m);
  std::vector<std::map<size_t, double>> cols(n);  // ordered rows per column
  for (size_t r = 0; r < m; ++r) {
    b[r] = srows[r].constant;
    for (const auto& t : srows[r].terms) cols[t.var][r] -= t.coef;
  }
  std::vector<size_t> colptr(n + 1, 0);
  std::vector<size_t> rowval;
  std::vector<double> nzval;
  for (int j = 0; j < n; ++j) {
    colptr[j + 1] = colptr[j];
    for (const auto& [row, val] : cols[j]) {
      if (val == 0.0) continue;
      rowval.push_back(row);
      nzval.push_back(val);
      ++colptr[j + 1];
    }
  }

  SolverOutcome out;
  std::vector<double> x(n, 0.0);
  double obj = 0.0;
  int32_t status = -1;
  uint32_t iters = 0;
  const int rc = pushplan_clarabel_solve(
      n, m, colptr.data(), rowval.data(), nzval.data(), nzval.size(),
      program.objective().data(), b.data(), cones.data(), cones.size(),
      options.tolerance, static_cast<uint32_t>(options.max_iterations),
      options.verbose, x.data(), &obj, &status, &iters);

  out.iterations = static_cast<int>(iters);
  if (rc != 0) {
    out.status = SolveStatus::kNumericalFailure;
    out.diagnostics = "backend rejected problem, code " + std::to_string(rc);
  } else {
    switch (status) {
      case 0:
        out.status = SolveStatus::kOptimal;
        break;
      case 3:
        out.status = SolveStatus::kOptimal;
        out.reduced_accuracy = true;
        out.diagnostics = "solver reached relaxed tolerances only";
        break;
      case 1:
        out.status = SolveStatus::kInfeasible;
        break;
      case 2:
        out.status = SolveStatus::kUnbounded;
        break;
      default:
        out.status = SolveStatus::kNumericalFailure;
        out.diagnostics = "solver terminated abnormally after " +
                          std::to_string(iters) + " iterations";
        break;
    }
    if (out.status == SolveStatus::kOptimal) {
      out.primal = std::move(x);
      out.objective = obj + program.objective_constant();
    }
  }
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace pushplan::conic
