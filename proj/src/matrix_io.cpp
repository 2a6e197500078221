#include "rcdvs/matrix_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "rcdvs/error.hpp"

namespace rcdvs {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace

TripletFile read_triplets(std::istream& in) {
  TripletFile out;
  int declared = 0;
  int max_index = 0;
  bool seen_data = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.size() == 1 && !seen_data) {
      seen_data = true;
      try {
        std::size_t used = 0;
        declared = std::stoi(tok[0], &used);
        if (used != tok[0].size() || declared < 1) throw std::invalid_argument("");
      } catch (const std::exception&) {
        parse_fail(lineno, "expected a positive dimension, got '" + tok[0] + "'");
      }
      continue;
    }
    seen_data = true;
    if (tok.size() != 3) parse_fail(lineno, "expected 'i j v'");
    long i = 0, j = 0;
    double v = 0;
    try {
      std::size_t ui = 0, uj = 0, uv = 0;
      i = std::stol(tok[0], &ui);
      j = std::stol(tok[1], &uj);
      v = std::stod(tok[2], &uv);
      if (ui != tok[0].size() || uj != tok[1].size() || uv != tok[2].size()) {
        throw std::invalid_argument("");
      }
    } catch (const std::exception&) {
      parse_fail(lineno, "malformed triple '" + line + "'");
    }
    if (i < 1 || j < 1) parse_fail(lineno, "indices are 1-based");
    if (i > j) parse_fail(lineno, "expected i <= j");
    max_index = std::max<int>(max_index, static_cast<int>(j));
    out.entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
  }
  if (declared > 0) {
    if (max_index > declared) {
      throw Error(ErrorKind::Parse, "index " + std::to_string(max_index) +
                                        " exceeds declared dimension " + std::to_string(declared));
    }
    out.n = declared;
  } else {
    out.n = max_index;
  }
  if (out.n < 1) throw Error(ErrorKind::Parse, "empty matrix file");
  return out;
}

TripletFile read_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  return read_triplets(in);
}

CsrSymmetricUpper load_csr(const std::filesystem::path& path) {
  const auto f = read_triplets(path);
  return CsrSymmetricUpper::from_triplets(f.n, f.entries);
}

DenseSymmetric load_dense(const std::filesystem::path& path) {
  const auto f = read_triplets(path);
  Matrix m = Matrix::Zero(f.n, f.n);
  for (const auto& t : f.entries) {
    m(t.row, t.col) += t.value;
    if (t.row != t.col) m(t.col, t.row) += t.value;
  }
  return DenseSymmetric(std::move(m));
}

void write_triplets(std::ostream& out, const CsrSymmetricUpper& m) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << m.n() << '\n' << std::setprecision(17);
  for (const auto& t : m.to_triplets()) {
    out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

void write_triplets(std::ostream& out, const DenseSymmetric& m) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << m.n() << '\n' << std::setprecision(17);
  for (int i = 0; i < m.n(); ++i) {
    for (int j = i; j < m.n(); ++j) {
      if (m(i, j) != 0) out << i + 1 << ' ' << j + 1 << ' ' << m(i, j) << '\n';
    }
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace rcdvs
