#ifndef SPGEMM1D_MATRIX_MARKET_HPP
#define SPGEMM1D_MATRIX_MARKET_HPP

#include <cstdint>
#include <cstdio>
#include <string>

#include "spgemm1d/sparse.hpp"

namespace spgemm1d {

// Coordinate-format Matrix Market, fields real/integer/pattern, symmetry
// general/symmetric. Indices are 1-based on disk, 0-based in memory.
// Symmetric files expand off-diagonal entries to both triangles; pattern
// entries read as 1.
SparseMatrix<double> read_matrix_market(const std::string& path, Storage mode = Storage::DCSC);

void write_matrix_market(const SparseMatrix<double>& a, const std::string& path);
void write_matrix_market(const SparseMatrix<std::int64_t>& a, const std::string& path);
// Written as a pattern file.
void write_matrix_market(const SparseMatrix<std::uint8_t>& a, const std::string& path);

}  // namespace spgemm1d

#endif
