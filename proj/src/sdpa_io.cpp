#include "pushplan/sdpa_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <vector>

namespace pushplan::conic {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// One (matno, blkno, i, j, value) entry; i, j are 1-based within the block.
struct Entry {
  int mat, blk, i, j;
  double value;
};

}  // namespace

void write_sdpa(const ConicProgram& program, std::ostream& os) {
  const int m = program.num_variables();
  std::vector<int> block_sizes;  // negative = diagonal block
  std::vector<Entry> entries;
  const double rt2 = std::sqrt(2.0);

  auto emit_row = [&](const AffineRow& row, int blk, int i, int j, double scale) {
    if (row.constant != 0.0)
      entries.push_back({0, blk, i, j, -row.constant * scale});
    std::map<int, double> acc;  // merge duplicate variables deterministically
    for (const auto& t : row.terms) acc[t.var] += t.coef * scale;
    for (const auto& [var, coef] : acc)
      if (coef != 0.0) entries.push_back({var + 1, blk, i, j, coef});
  };

  for (const auto& c : program.constraints()) {
    const int blk = static_cast<int>(block_sizes.size()) + 1;
    switch (c.kind) {
      case ConeKind::kNonnegative: {
        if (c.rows.empty()) continue;
        block_sizes.push_back(-static_cast<int>(c.rows.size()));
        for (size_t r = 0; r < c.rows.size(); ++r)
          emit_row(c.rows[r], blk, static_cast<int>(r) + 1, static_cast<int>(r) + 1, 1.0);
        break;
      }
      case ConeKind::kZero: {
        if (c.rows.empty()) continue;
        block_sizes.push_back(-2 * static_cast<int>(c.rows.size()));
        for (size_t r = 0; r < c.rows.size(); ++r) {
          emit_row(c.rows[r], blk, 2 * static_cast<int>(r) + 1, 2 * static_cast<int>(r) + 1, 1.0);
          emit_row(c.rows[r], blk, 2 * static_cast<int>(r) + 2, 2 * static_cast<int>(r) + 2, -1.0);
        }
        break;
      }
      case ConeKind::kSecondOrder:
      case ConeKind::kRotatedSecondOrder: {
        // Arrow embedding: [[t, w'],[w, t I]] PSD  <=>  t >= ||w||.
        std::vector<AffineRow> soc;
        if (c.kind == ConeKind::kSecondOrder) {
          soc = c.rows;
        } else {
          AffineRow sum = c.rows[0];
          for (const auto& t : c.rows[1].terms) sum.terms.push_back(t);
          sum.constant += c.rows[1].constant;
          soc.push_back(sum);
          soc.push_back(c.rows[0] - c.rows[1]);
          for (size_t i = 2; i < c.rows.size(); ++i) {
            AffineRow w = c.rows[i];
            w *= rt2;
            soc.push_back(std::move(w));
          }
        }
        const int d = static_cast<int>(soc.size());
        block_sizes.push_back(d);
        for (int k = 1; k <= d; ++k) emit_row(soc[0], blk, k, k, 1.0);
        for (int k = 1; k < d; ++k) emit_row(soc[k], blk, 1, k + 1, 1.0);
        break;
      }
      case ConeKind::kPsdTriangle: {
        block_sizes.push_back(c.psd_side);
        int k = 0;
        for (int j = 0; j < c.psd_side; ++j)
          for (int i = 0; i <= j; ++i)
            emit_row(c.rows[k++], blk, i + 1, j + 1, 1.0);
        break;
      }
    }
  }

  if (program.objective_constant() != 0.0)
    os << "*OBJCONST " << fmt(program.objective_constant()) << "\n";
  os << m << "\n";
  os << block_sizes.size() << "\n";
  for (size_t i = 0; i < block_sizes.size(); ++i)
    os << (i ? " " : "") << block_sizes[i];
  os << "\n";
  for (int i = 0; i < m; ++i)
    os << (i ? " " : "") << fmt(program.objective()[i]);
  os << "\n";
  for (const auto& e : entries)
    os << e.mat << " " << e.blk << " " << e.i << " " << e.j << " " << fmt(e.value) << "\n";
}

std::string write_sdpa_string(const ConicProgram& program) {
  std::ostringstream os;
  write_sdpa(program, os);
  return os.str();
}

void write_sdpa_file(const ConicProgram& program, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw SdpaParseError("cannot open " + path + " for writing");
  write_sdpa(program, os);
}

ConicProgram read_sdpa(std::istream& is) {
  std::string line;
  double obj_const = 0.0;
  long m = -1, nblocks = -1;
  std::vector<int> block_sizes;
  std::vector<double> cost;
  // entries keyed (blk, i, j) -> affine row accumulated over matnos
  std::map<std::tuple<int, int, int>, AffineRow> cells;

  enum { kHeaderM, kHeaderN, kBlocks, kCost, kEntries } state = kHeaderM;
  while (std::getline(is, line)) {
    if (!line.empty() && (line[0] == '*' || line[0] == '"')) {
      std::istringstream cs(line);
      std::string tag;
      cs >> tag;
      if (tag == "*OBJCONST") cs >> obj_const;
      continue;
    }
    for (auto& ch : line)
      if (ch == ',' || ch == '(' || ch == ')' || ch == '{' || ch == '}') ch = ' ';
    std::istringstream ls(line);
    switch (state) {
      case kHeaderM:
        if (ls >> m) state = kHeaderN;
        break;
      case kHeaderN:
        if (ls >> nblocks) state = kBlocks;
        break;
      case kBlocks: {
        int b;
        while (ls >> b) block_sizes.push_back(b);
        if (static_cast<long>(block_sizes.size()) >= nblocks) state = kCost;
        break;
      }
      case kCost: {
        double v;
        while (ls >> v) cost.push_back(v);
        if (static_cast<long>(cost.size()) >= m) state = kEntries;
        break;
      }
      case kEntries: {
        int mat, blk, i, j;
        double v;
        if (ls >> mat >> blk >> i >> j >> v) {
          if (blk < 1 || blk > nblocks) throw SdpaParseError("block index out of range");
          auto& row = cells[{blk, i, j}];
          if (mat == 0)
            row.constant -= v;  // expr = sum x_k F_k - F0
          else
            row.add_term(mat - 1, v);
        }
        break;
      }
    }
  }
  if (m < 0 || nblocks < 0 || static_cast<long>(block_sizes.size()) != nblocks ||
      static_cast<long>(cost.size()) != m)
    throw SdpaParseError("truncated SDPA header");

  ConicProgram program;
  program.add_variables(static_cast<int>(m));
  for (int i = 0; i < m; ++i)
    if (cost[i] != 0.0) program.add_objective_term(i, cost[i]);
  program.add_objective_constant(obj_const);

  for (int blk = 1; blk <= nblocks; ++blk) {
    const int size = block_sizes[blk - 1];
    if (size < 0) {
      ConeConstraint c;
      c.kind = ConeKind::kNonnegative;
      c.rows.resize(-size);
      for (int i = 1; i <= -size; ++i) {
        auto it = cells.find({blk, i, i});
        if (it != cells.end()) c.rows[i - 1] = it->second;
      }
      program.add_constraint(std::move(c));
    } else {
      ConeConstraint c;
      c.kind = ConeKind::kPsdTriangle;
      c.psd_side = size;
      c.rows.resize(size * (size + 1) / 2);
      int k = 0;
      for (int j = 1; j <= size; ++j)
        for (int i = 1; i <= j; ++i) {
          auto it = cells.find({blk, i, j});
          if (it == cells.end()) it = cells.find({blk, j, i});
          if (it != cells.end()) c.rows[k] = it->second;
          ++k;
        }
      program.add_constraint(std::move(c));
    }
  }
  return program;
}

ConicProgram read_sdpa_string(const std::string& text) {
  std::istringstream is(text);
  return read_sdpa(is);
}

ConicProgram read_sdpa_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SdpaParseError("cannot open " + path);
  return read_sdpa(is);
}

}  // namespace pushplan::conic
