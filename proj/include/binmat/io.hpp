#ifndef BINMAT_IO_HPP_
#define BINMAT_IO_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "binmat/margins.hpp"
#include "binmat/proposal.hpp"
#include "binmat/weights.hpp"

namespace binmat::io {

// Thrown for unreadable or malformed input files (CLI exit code 3).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Margins file: an `r:` line and a `c:` line of comma/whitespace separated
// integers. Blank lines and `#` comments are ignored.
Margins read_margins(const std::string& path);
Margins parse_margins(std::istream& in, const std::string& what);

// Weights: dense CSV rows, or a sparse triplet file introduced by a first
// line `sparse m n` followed by 1-based `i,j,w` lines (unlisted cells are 0).
WeightMatrix read_weights(const std::string& path);
WeightMatrix parse_weights(std::istream& in, const std::string& what);

// Sample files: a short header, then per sample one stat line and the
// 1-based coordinates of its ones.
void write_samples(std::ostream& out, int m, int n, uint64_t seed, long long T);
void append_sample(std::ostream& out, long long index, const SampleRecord& rec, double log_f, bool transpose);

struct SampleFile {
  int m = 0, n = 0;
  uint64_t seed = 0;
  std::vector<SampleRecord> records;
  std::vector<double> log_f;
};
SampleFile read_samples(const std::string& path);

std::string format_double(double x);  // shortest round-trip decimal form

}  // namespace binmat::io

#endif  // BINMAT_IO_HPP_
