#pragma once

#include "vsense/numerics.hpp"

#include <filesystem>
#include <iosfwd>

namespace vsense::mm {

struct ReadResult {
    Matrix matrix;
    bool symmetric = false;
};

// Reads real `coordinate` or `array` Matrix Market data, general or
// symmetric. Symmetric storage is expanded to the full matrix.
ReadResult read(std::istream& in);
ReadResult read(const std::filesystem::path& path);

// Symmetric coordinate format, lower triangle, shortest round-trip decimals.
void write_symmetric(std::ostream& out, const SymMatrix& a);
void write_symmetric(const std::filesystem::path& path, const SymMatrix& a);

// General dense array format (column-major).
void write_general(std::ostream& out, const Matrix& a);
void write_general(const std::filesystem::path& path, const Matrix& a);

}  // namespace vsense::mm
