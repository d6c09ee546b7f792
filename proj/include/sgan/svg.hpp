#pragma once

#include <array>
#include <string>
#include <vector>

#include "sgan/tensor.hpp"

namespace sgan::svg {

// Deterministic scatter plot over the fixed viewport [-3, 3]^2: samples as
// dots colored by label (10-color palette, label mod 10), mixture centers as
// crosses. Byte-identical output for identical inputs.
std::string scatter(const Tensor& x, const std::vector<int>& labels,
                    const std::vector<std::array<double, 2>>& centers);

void write_scatter(const std::string& path, const Tensor& x, const std::vector<int>& labels,
                   const std::vector<std::array<double, 2>>& centers);

}  // namespace sgan::svg
