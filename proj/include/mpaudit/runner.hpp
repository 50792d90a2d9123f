#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mpaudit/core.hpp"
#include "mpaudit/verification.hpp"

namespace mpaudit {

inline constexpr const char* kToolName = "mpaudit";
inline constexpr const char* kToolVersion = "1.0.0";

struct RunConfig {
  std::size_t n = 100000;
  std::uint64_t seed = 42;
  double a = 3.6;
  double c = 0.9;
  std::array<double, 4> mixing{1.0, 0.5, 0.0, 1.0};  // row-major
  AuditConfig audit;
  double swirl_bin_width = 0.01;
  std::string output_dir = "mpaudit-out";
  bool render = false;
  // Test-only escape hatch that admits a == 0 as the degenerate fixture.
  bool allow_degenerate = false;

  MpaParams params() const;
  Mixing2 mixing_matrix() const;
};

/// Parses the flat `key = value` format. Blank lines and `#` comments are
/// ignored, missing keys keep their defaults, unknown or repeated keys are
/// parse errors. All constraint violations are collected and reported
/// together as one ConfigConstraint error.
RunConfig parse_config(std::string_view text, bool allow_degenerate = false);
RunConfig load_config(const std::filesystem::path& path, bool allow_degenerate = false);

// Throws ConfigConstraint listing every violated constraint by key.
void validate(const RunConfig& cfg);

// Point clouds: UTF-8 CSV, two-name header, 17 significant digits per value.
std::string format_point_cloud(const Dataset& d, std::string_view col1, std::string_view col2);
void write_point_cloud(const std::filesystem::path& path, const Dataset& d, std::string_view col1,
                       std::string_view col2);
Dataset read_point_cloud(const std::filesystem::path& path, Label label);

struct SwirlBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double r_mean = 0.0;
  std::size_t count = 0;
  double mean_displacement = 0.0;
};

// Rotation angle applied by h at radius r.
double swirl_angle(double a, double c, double r) noexcept;

/// Mean signed angular displacement from z_i to zp_i, grouped by |z_i|.
///
/// Bin width is adjusted so that c falls on a bin edge; bins continue past c
/// with the same width up to the largest radius. Empty bins and points at the
/// origin are dropped.
std::vector<SwirlBin> swirl_profile(const Dataset& z, const Dataset& zp, double c, double bin_width);

// Bin whose mean radius is closest to r.
const SwirlBin& nearest_swirl_bin(const std::vector<SwirlBin>& profile, double r);

std::string format_swirl_profile(const std::vector<SwirlBin>& profile, double a, double c);

std::string render_scatter_svg(const Dataset& d, const Box& range, std::string_view title);

// Pretty-printed JSON. The timestamp occupies the second line of the document
// and nothing else; everything else is a function of the inputs.
std::string report_document(const AuditReport& r, std::string_view timestamp);
std::string utc_timestamp();

enum class ExitCategory {
  Certified = 0,
  Internal = 1,
  Config = 2,
  Io = 3,
  PremiseFailed = 4,
  DegenerateCoordinatewise = 5,
  Data = 6,
};

const char* to_string(ExitCategory c) noexcept;
ExitCategory classify(const AuditReport& r) noexcept;
ExitCategory classify(ErrorKind kind) noexcept;

struct FigureBundle {
  std::filesystem::path z_csv;
  std::filesystem::path x_csv;
  std::filesystem::path zprime_csv;
  std::filesystem::path swirl_csv;
  std::vector<std::filesystem::path> images;
  std::vector<SwirlBin> swirl;
  std::size_t n = 0;
};

struct RunOutcome {
  AuditReport report;
  FigureBundle figures;
  std::filesystem::path report_path;
  std::string report_json;
  ExitCategory category = ExitCategory::Certified;
};

FigureBundle cmd_figures(const RunConfig& cfg);
RunOutcome cmd_run(const RunConfig& cfg);
RunOutcome cmd_audit_external(const std::filesystem::path& z_path, const std::filesystem::path& zp_path,
                              const RunConfig& cfg);

}  // namespace mpaudit
