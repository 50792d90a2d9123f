#include "mpaudit/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mpaudit {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::EmptyDataset: return "empty-dataset";
    case ErrorKind::InvalidPoint: return "invalid-point";
    case ErrorKind::SingularMatrix: return "singular-matrix";
    case ErrorKind::LabelMismatch: return "label-mismatch";
    case ErrorKind::Pairing: return "pairing";
    case ErrorKind::Undersampled: return "undersampled";
    case ErrorKind::IllConditionedPoint: return "ill-conditioned-point";
    case ErrorKind::InvalidDomain: return "invalid-domain";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::ConfigConstraint: return "config-constraint";
    case ErrorKind::MalformedRow: return "malformed-row";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

bool Point2::finite() const noexcept { return std::isfinite(x1) && std::isfinite(x2); }

double Point2::norm() const noexcept { return std::hypot(x1, x2); }

MpaParams::MpaParams(double a, double c) : a_(a), c_(c) {
  if (!std::isfinite(a) || a == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "a must satisfy a ≠ 0 (got " + std::to_string(a) + ")");
  }
  if (!(c > 0.0 && c < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "c must satisfy c ∈ (0,1) (got " + std::to_string(c) + ")");
  }
}

MpaParams MpaParams::degenerate_fixture(double c) {
  if (!(c > 0.0 && c < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "c must satisfy c ∈ (0,1) (got " + std::to_string(c) + ")");
  }
  return MpaParams(0.0, c, Unchecked{});
}

MpaParams MpaParams::inverted() const noexcept { return MpaParams(-a_, c_, Unchecked{}); }

Mixing2::Mixing2(double a11, double a12, double a21, double a22) : m_{a11, a12, a21, a22} {
  for (double v : m_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "mixing matrix entries must be finite");
  }
  det_ = a11 * a22 - a12 * a21;
  if (!(std::abs(det_) > kMinAbsDet)) {
    std::ostringstream os;
    os << "mixing matrix is singular: |det| = " << std::abs(det_) << " <= " << kMinAbsDet;
    throw Error(ErrorKind::SingularMatrix, os.str());
  }
  inv_ = {a22 / det_, -a12 / det_, -a21 / det_, a11 / det_};

  const double p11 = m_[0] * inv_[0] + m_[1] * inv_[2];
  const double p12 = m_[0] * inv_[1] + m_[1] * inv_[3];
  const double p21 = m_[2] * inv_[0] + m_[3] * inv_[2];
  const double p22 = m_[2] * inv_[1] + m_[3] * inv_[3];
  const double err = std::max({std::abs(p11 - 1.0), std::abs(p12), std::abs(p21), std::abs(p22 - 1.0)});
  if (!(err <= 1e-12)) {
    std::ostringstream os;
    os << "mixing matrix is too ill-conditioned: A*inv(A) deviates from I by " << err;
    throw Error(ErrorKind::SingularMatrix, os.str());
  }
}

const char* to_string(Label label) noexcept {
  switch (label) {
    case Label::LatentZ: return "latent-Z";
    case Label::ObservedX: return "observed-X";
    case Label::LatentZprime: return "latent-Zprime";
  }
  return "unknown";
}

Dataset::Dataset(std::vector<Point2> points, Label label, std::uint64_t seed)
    : points_(std::move(points)), label_(label), seed_(seed) {
  if (points_.empty()) throw Error(ErrorKind::EmptyDataset, "dataset must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].finite()) {
      throw Error(ErrorKind::InvalidPoint, "non-finite coordinate at index " + std::to_string(i));
    }
  }
}

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double UniformSource::symmetric() { return 2.0 * unit() - 1.0; }

Dataset sample_uniform_square(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "sample size must be at least 1");
  UniformSource src(seed);
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x1 = src.symmetric();
    p.x2 = src.symmetric();
  }
  return Dataset(std::move(pts), Label::LatentZ, seed);
}

Point2 mix(const Mixing2& A, const Point2& z) noexcept {
  const auto& m = A.entries();
  return {m[0] * z.x1 + m[1] * z.x2, m[2] * z.x1 + m[3] * z.x2};
}

Point2 unmix(const Mixing2& A, const Point2& x) noexcept {
  const auto& m = A.inverse_entries();
  return {m[0] * x.x1 + m[1] * x.x2, m[2] * x.x1 + m[3] * x.x2};
}

Point2 mpa_forward(const MpaParams& p, const Point2& z) {
  if (!z.finite()) throw Error(ErrorKind::InvalidPoint, "mpa: non-finite input point");
  const double r = z.norm();
  if (r > p.c()) return z;
  // z * exp(i*theta) with z = z1 + i*z2
  const double theta = p.a() * (r - p.c());
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  return {cs * z.x1 - sn * z.x2, sn * z.x1 + cs * z.x2};
}

Point2 mpa_inverse(const MpaParams& p, const Point2& zp) { return mpa_forward(p.inverted(), zp); }

PipelineOutput apply_pipeline(const Mixing2& A, const MpaParams& p, const Dataset& zs) {
  if (zs.label() != Label::LatentZ) {
    throw Error(ErrorKind::LabelMismatch,
                std::string("pipeline expects a latent-Z dataset, got ") + to_string(zs.label()));
  }
  std::vector<Point2> xs(zs.size());
  std::vector<Point2> zps(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    xs[i] = mix(A, zs[i]);
    zps[i] = mpa_forward(p, unmix(A, xs[i]));
  }
  return {Dataset(std::move(xs), Label::ObservedX, zs.seed()),
          Dataset(std::move(zps), Label::LatentZprime, zs.seed())};
}

double jacobian_det_fd(const PointMap& transform, const Point2& z, double h,
                       std::optional<double> discontinuity_radius) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be > 0");
  if (!z.finite()) throw Error(ErrorKind::InvalidPoint, "jacobian: non-finite evaluation point");
  if (discontinuity_radius) {
    const double gap = std::abs(z.norm() - *discontinuity_radius);
    if (!(gap > 10.0 * h)) {
      std::ostringstream os;
      os << "evaluation point lies " << gap << " from the discontinuity circle r = " << *discontinuity_radius
         << " (need > " << 10.0 * h << ")";
      throw Error(ErrorKind::IllConditionedPoint, os.str());
    }
  }
  const Point2 f1p = transform({z.x1 + h, z.x2});
  const Point2 f1m = transform({z.x1 - h, z.x2});
  const Point2 f2p = transform({z.x1, z.x2 + h});
  const Point2 f2m = transform({z.x1, z.x2 - h});
  const double j11 = (f1p.x1 - f1m.x1) / (2.0 * h);
  const double j21 = (f1p.x2 - f1m.x2) / (2.0 * h);
  const double j12 = (f2p.x1 - f2m.x1) / (2.0 * h);
  const double j22 = (f2p.x2 - f2m.x2) / (2.0 * h);
  return std::abs(j11 * j22 - j12 * j21);
}

}  // namespace mpaudit
