#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rcdvs/linalg.hpp"

namespace rcdvs {

// Triple text format: one "i j v" entry per line, 1-based, i <= j, fields
// separated by whitespace. Lines starting with '#' or '%' are comments. An
// optional first data line holding a single integer fixes the dimension;
// otherwise it is the largest index seen.

struct TripletFile {
  int n = 0;
  std::vector<Triplet> entries;  // 0-based
};

TripletFile read_triplets(std::istream& in);
TripletFile read_triplets(const std::filesystem::path& path);

CsrSymmetricUpper load_csr(const std::filesystem::path& path);
DenseSymmetric load_dense(const std::filesystem::path& path);

/// Writes the dimension header and the upper triangle, full precision.
void write_triplets(std::ostream& out, const CsrSymmetricUpper& m);
void write_triplets(std::ostream& out, const DenseSymmetric& m);

}  // namespace rcdvs
