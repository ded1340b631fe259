#include "binmat/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace binmat::io {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

int parse_int(const std::string& tok, const std::string& what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw FormatError(what + ": expected an integer, got '" + tok + "'");
  return value;
}

double parse_real(const std::string& tok, const std::string& what) {
  char* end = nullptr;
  const double value = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) throw FormatError(what + ": expected a number, got '" + tok + "'");
  return value;
}

bool skippable(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (ch != ' ' && ch != '\t' && ch != '\r') return false;
  }
  return true;
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Margins parse_margins(std::istream& in, const std::string& what) {
  std::vector<int> r, c;
  bool have_r = false, have_c = false;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    std::vector<int>* target = nullptr;
    if (toks[0] == "r:" || toks[0] == "r") {
      target = &r;
      have_r = true;
      toks.erase(toks.begin());
    } else if (toks[0] == "c:" || toks[0] == "c") {
      target = &c;
      have_c = true;
      toks.erase(toks.begin());
    } else if (toks[0].starts_with("r:")) {
      target = &r;
      have_r = true;
      toks[0] = toks[0].substr(2);
    } else if (toks[0].starts_with("c:")) {
      target = &c;
      have_c = true;
      toks[0] = toks[0].substr(2);
    } else {
      throw FormatError(what + ": lines must start with 'r:' or 'c:'");
    }
    for (const std::string& t : toks)
      if (!t.empty()) target->push_back(parse_int(t, what));
  }
  if (!have_r || !have_c) throw FormatError(what + ": need both an 'r:' line and a 'c:' line");
  try {
    return Margins(std::move(r), std::move(c));
  } catch (const std::invalid_argument& e) {
    throw FormatError(what + ": " + e.what());
  }
}

Margins read_margins(const std::string& path) {
  std::ifstream in = open_file(path);
  return parse_margins(in, path);
}

WeightMatrix parse_weights(std::istream& in, const std::string& what) {
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first_content = true;
  bool sparse = false;
  int sm = 0, sn = 0;
  Matrix<double> sparse_w;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    if (first_content) {
      first_content = false;
      if (toks[0] == "sparse") {
        if (toks.size() != 3) throw FormatError(what + ": sparse header must be 'sparse m n'");
        sm = parse_int(toks[1], what);
        sn = parse_int(toks[2], what);
        if (sm <= 0 || sn <= 0) throw FormatError(what + ": sparse dimensions must be positive");
        sparse = true;
        sparse_w = Matrix<double>(sm, sn, 0.0);
        continue;
      }
    }
    if (sparse) {
      if (toks.size() != 3) throw FormatError(what + ": sparse entries are 'i,j,w'");
      const int i = parse_int(toks[0], what), j = parse_int(toks[1], what);
      if (i < 1 || i > sm || j < 1 || j > sn) throw FormatError(what + ": sparse index out of range");
      sparse_w(i - 1, j - 1) = parse_real(toks[2], what);
    } else {
      std::vector<double> row;
      row.reserve(toks.size());
      for (const std::string& t : toks) row.push_back(parse_real(t, what));
      if (!rows.empty() && rows.back().size() != row.size())
        throw FormatError(what + ": ragged rows in dense weight matrix");
      rows.push_back(std::move(row));
    }
  }
  try {
    if (sparse) return WeightMatrix(std::move(sparse_w));
    if (rows.empty()) throw FormatError(what + ": empty weight matrix");
    Matrix<double> w(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < rows[i].size(); ++j) w(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return WeightMatrix(std::move(w));
  } catch (const std::invalid_argument& e) {
    throw FormatError(what + ": " + e.what());
  }
}

WeightMatrix read_weights(const std::string& path) {
  std::ifstream in = open_file(path);
  return parse_weights(in, path);
}

void write_samples(std::ostream& out, int m, int n, uint64_t seed, long long T) {
  out << "# binmat samples\n";
  out << "meta m " << m << " n " << n << " seed " << seed << " T " << T << "\n";
}

void append_sample(std::ostream& out, long long index, const SampleRecord& rec, double log_f, bool transpose) {
  out << "sample " << index << " alive " << (rec.alive ? 1 : 0) << " log_q " << format_double(rec.log_q)
      << " log_f " << format_double(log_f) << "\n";
  for (auto [i, j] : rec.ones) {
    if (transpose)
      out << (j + 1) << " " << (i + 1) << "\n";
    else
      out << (i + 1) << " " << (j + 1) << "\n";
  }
  out << "end\n";
}

SampleFile read_samples(const std::string& path) {
  std::ifstream in = open_file(path);
  SampleFile file;
  std::string line;
  SampleRecord* cur = nullptr;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0] == "meta") {
      for (size_t k = 1; k + 1 < toks.size(); k += 2) {
        if (toks[k] == "m") file.m = parse_int(toks[k + 1], path);
        if (toks[k] == "n") file.n = parse_int(toks[k + 1], path);
        if (toks[k] == "seed") file.seed = std::strtoull(toks[k + 1].c_str(), nullptr, 10);
      }
    } else if (toks[0] == "sample") {
      file.records.emplace_back();
      cur = &file.records.back();
      cur->m = file.m;
      cur->n = file.n;
      // toks[1] is the sample index; key/value pairs follow.
      for (size_t k = 2; k + 1 < toks.size(); k += 2) {
        if (toks[k] == "alive") cur->alive = parse_int(toks[k + 1], path) != 0;
        if (toks[k] == "log_q") cur->log_q = toks[k + 1] == "-inf" ? kNegInf : parse_real(toks[k + 1], path);
        if (toks[k] == "log_f")
          file.log_f.push_back(toks[k + 1] == "-inf" ? kNegInf : parse_real(toks[k + 1], path));
      }
    } else if (toks[0] == "end") {
      cur = nullptr;
    } else {
      if (!cur || toks.size() != 2) throw FormatError(path + ": unexpected line '" + line + "'");
      cur->ones.emplace_back(parse_int(toks[0], path) - 1, parse_int(toks[1], path) - 1);
    }
  }
  return file;
}

}  // namespace binmat::io
