#pragma once

#include <filesystem>

#include "polydiff/tensor.hpp"

namespace polydiff {

// Writes `<stem>.json` ({space, k, shape, dtype}) and `<stem>.bin` (row-major
// little-endian float64).
void write_tensor(const CoefficientTensor& g, const std::filesystem::path& stem);
CoefficientTensor read_tensor(const std::filesystem::path& stem);

// Plot-ready CSV for k <= 2: columns (x, value) or (x, y, value) with grid
// coordinates (or labels for finite spaces).
void write_tensor_csv(const CoefficientTensor& g, const std::filesystem::path& path);

}  // namespace polydiff
