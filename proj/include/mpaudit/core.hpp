#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "mpaudit/error.hpp"

namespace mpaudit {

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;

  bool finite() const noexcept;
  double norm() const noexcept;

  friend bool operator==(const Point2&, const Point2&) = default;
};

using PointMap = std::function<Point2(const Point2&)>;

/// Parameters (a, c) of the radius-dependent rotation h.
///
/// Points with norm <= c are rotated by a * (norm - c) radians; points outside
/// radius c are left alone. Ordinary construction requires a != 0 and
/// 0 < c < 1. The a == 0 case is reachable only through degenerate_fixture(),
/// which exists so the coordinate-wise direction of the audit can be exercised.
class MpaParams {
 public:
  MpaParams(double a, double c);

  static MpaParams degenerate_fixture(double c);

  double a() const noexcept { return a_; }
  double c() const noexcept { return c_; }
  bool degenerate() const noexcept { return a_ == 0.0; }

  // Parameters of h^-1: same cutoff, opposite rotation rate.
  MpaParams inverted() const noexcept;

 private:
  struct Unchecked {};
  MpaParams(double a, double c, Unchecked) noexcept : a_(a), c_(c) {}

  double a_;
  double c_;
};

/// Invertible 2x2 mixing matrix with cached determinant and inverse.
class Mixing2 {
 public:
  static constexpr double kMinAbsDet = 1e-9;

  // Row-major entries. Throws SingularMatrix when |det| <= kMinAbsDet or when
  // the cached inverse does not reproduce the identity to 1e-12.
  Mixing2(double a11, double a12, double a21, double a22);

  static Mixing2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  double a11() const noexcept { return m_[0]; }
  double a12() const noexcept { return m_[1]; }
  double a21() const noexcept { return m_[2]; }
  double a22() const noexcept { return m_[3]; }
  double det() const noexcept { return det_; }
  const std::array<double, 4>& entries() const noexcept { return m_; }
  const std::array<double, 4>& inverse_entries() const noexcept { return inv_; }

 private:
  std::array<double, 4> m_;
  std::array<double, 4> inv_;
  double det_;
};

enum class Label { LatentZ, ObservedX, LatentZprime };

const char* to_string(Label label) noexcept;

/// Immutable, ordered sample with provenance.
class Dataset {
 public:
  // Throws EmptyDataset for an empty point list and InvalidPoint for
  // non-finite coordinates.
  Dataset(std::vector<Point2> points, Label label, std::uint64_t seed);

  std::span<const Point2> points() const noexcept { return points_; }
  const Point2& operator[](std::size_t i) const noexcept { return points_[i]; }
  std::size_t size() const noexcept { return points_.size(); }
  Label label() const noexcept { return label_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::vector<Point2> points_;
  Label label_;
  std::uint64_t seed_;
};

// Maps mt19937_64 output (fixed by the standard) onto [0, 1) via the top 53
// bits. Shared by every sampler so draws are identical across platforms.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed);
  double unit();       // [0, 1)
  double symmetric();  // [-1, 1)

 private:
  std::mt19937_64 engine_;
};

Dataset sample_uniform_square(std::size_t n, std::uint64_t seed);

Point2 mix(const Mixing2& A, const Point2& z) noexcept;
Point2 unmix(const Mixing2& A, const Point2& x) noexcept;

Point2 mpa_forward(const MpaParams& p, const Point2& z);
Point2 mpa_inverse(const MpaParams& p, const Point2& zp);

struct PipelineOutput {
  Dataset x;
  Dataset zprime;
};

PipelineOutput apply_pipeline(const Mixing2& A, const MpaParams& p, const Dataset& zs);

/// Central-difference estimate of |det J| of `transform` at z with step h.
///
/// When `discontinuity_radius` is set, the Jacobian is assumed to jump across
/// the circle of that radius and points within 10 * h of it are rejected with
/// IllConditionedPoint.
double jacobian_det_fd(const PointMap& transform, const Point2& z, double h,
                       std::optional<double> discontinuity_radius = std::nullopt);

}  // namespace mpaudit
