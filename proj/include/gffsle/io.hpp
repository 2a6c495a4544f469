#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "gffsle/lattice.hpp"
#include "gffsle/loewner.hpp"

namespace gffsle::io {

/// "<semver>+<git describe>" of the build.
std::string version();

std::uint64_t fnv1a64(std::string_view text);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t x);

/// Every CSV starts with the line "# gffsle <version>", then a column header.
/// Numbers are written with 17 significant digits.
void write_driving_csv(const std::filesystem::path& file, const DrivingFunction& w);           // t,w
void write_path_csv(const std::filesystem::path& file, std::span<const Point> points);         // k,x,y
void write_field_csv(const std::filesystem::path& file, const TgDomain& domain,
                     const Eigen::VectorXd& values);                                           // id,x,y,value
void write_json(const std::filesystem::path& file, const nlohmann::json& j);
void write_text(const std::filesystem::path& file, std::string_view text);

/// Reads a driving CSV written by write_driving_csv.
DrivingFunction read_driving_csv(const std::filesystem::path& file);

}  // namespace gffsle::io
