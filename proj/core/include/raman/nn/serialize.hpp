#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "raman/nn/model.hpp"

namespace raman::nn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Little-endian container: magic, version, grid, class names, architecture, then
/// every parameter and batch-norm statistic as float64.
void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace raman::nn
