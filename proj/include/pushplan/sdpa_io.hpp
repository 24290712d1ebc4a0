#pragma once

#include <iosfwd>
#include <string>

#include "pushplan/conic_program.hpp"

namespace pushplan::conic {

struct SdpaParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Serializes a conic program in SDPA sparse format (".dat-s"), reading the
// file as:  min c'x  s.t.  sum_i x_i F_i - F0 >= 0 (block diagonal).
// Zero/nonnegative rows become diagonal blocks, second-order and rotated
// cones become arrow-matrix PSD blocks, PSD triangles map directly. Blocks
// appear in constraint insertion order; output is byte-deterministic.
void write_sdpa(const ConicProgram& program, std::ostream& os);
std::string write_sdpa_string(const ConicProgram& program);
void write_sdpa_file(const ConicProgram& program, const std::string& path);

// Parses SDPA sparse format into an equivalent conic program (diagonal
// blocks as nonnegative rows, matrix blocks as PSD constraints).
ConicProgram read_sdpa(std::istream& is);
ConicProgram read_sdpa_string(const std::string& text);
ConicProgram read_sdpa_file(const std::string& path);

}  // namespace pushplan::conic
