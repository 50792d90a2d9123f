#include "mpaudit/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

namespace mpaudit {

namespace {

void require_bins(std::size_t bins) {
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "bins must be >= 2");
}

double distance(const Point2& p, const Point2& q) { return std::hypot(p.x1 - q.x1, p.x2 - q.x2); }

std::size_t cell_index(double v, double lo, double hi, std::size_t bins) {
  const double width = hi - lo;
  if (!(width > 0.0)) return 0;
  const double t = (v - lo) / width * static_cast<double>(bins);
  if (!(t > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(t), bins - 1);
}

// Stable argsort, so ties resolve by sample index.
std::vector<std::size_t> argsort(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  return order;
}

std::vector<double> ranks_from_order(const std::vector<std::size_t>& order) {
  std::vector<double> r(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = static_cast<double>(k);
  return r;
}

struct Column {
  std::vector<std::size_t> order;
  std::vector<double> ranks;
};

Column make_column(const Dataset& d, int coord) {
  std::vector<double> v(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) v[i] = coord == 0 ? d[i].x1 : d[i].x2;
  Column c;
  c.order = argsort(v);
  c.ranks = ranks_from_order(c.order);
  return c;
}

// Mean within-bin rank variance of `response` over equal-count bins of
// `binning`, normalized by the total rank variance (n^2 - 1) / 12.
double functional_score(const Column& binning, const Column& response, std::size_t bins) {
  const std::size_t n = binning.order.size();
  const double total = (static_cast<double>(n) * static_cast<double>(n) - 1.0) / 12.0;
  if (!(total > 0.0)) return 0.0;
  double sum_var = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t begin = b * n / bins;
    const std::size_t end = (b + 1) * n / bins;
    if (end <= begin) continue;
    double mean = 0.0;
    for (std::size_t k = begin; k < end; ++k) mean += response.ranks[binning.order[k]];
    mean /= static_cast<double>(end - begin);
    double ss = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const double d = response.ranks[binning.order[k]] - mean;
      ss += d * d;
    }
    sum_var += ss / static_cast<double>(end - begin);
  }
  return std::clamp(sum_var / static_cast<double>(bins) / total, 0.0, 1.0);
}

Monotonicity rank_direction(const Column& u, const Column& v) {
  const double n = static_cast<double>(u.ranks.size());
  const double mid = (n - 1.0) / 2.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < u.ranks.size(); ++i) cov += (u.ranks[i] - mid) * (v.ranks[i] - mid);
  return cov >= 0.0 ? Monotonicity::Increasing : Monotonicity::Decreasing;
}

template <typename Fn>
auto with_check_name(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("check '") + name + "': " + e.what());
  }
}

std::string format_box(const Box& b) {
  std::ostringstream os;
  os.precision(6);
  os << "[" << b.lo1 << ", " << b.hi1 << "] x [" << b.lo2 << ", " << b.hi2 << "]";
  return os.str();
}

}  // namespace

bool Box::contains(const Point2& p, double slack) const noexcept {
  return p.x1 >= lo1 - slack && p.x1 <= hi1 + slack && p.x2 >= lo2 - slack && p.x2 <= hi2 + slack;
}

Box bounding_box(const Dataset& d) {
  Box b{d[0].x1, d[0].x1, d[0].x2, d[0].x2};
  for (const auto& p : d.points()) {
    b.lo1 = std::min(b.lo1, p.x1);
    b.hi1 = std::max(b.hi1, p.x1);
    b.lo2 = std::min(b.lo2, p.x2);
    b.hi2 = std::max(b.hi2, p.x2);
  }
  return b;
}

CheckResult check_continuity(const PointMap& transform, const Box& domain, std::size_t n_pairs,
                             std::uint64_t seed, double lipschitz_max) {
  if (n_pairs < 100) throw Error(ErrorKind::InvalidArgument, "continuity scan needs at least 100 pairs");
  const bool finite_box = std::isfinite(domain.lo1) && std::isfinite(domain.hi1) && std::isfinite(domain.lo2) &&
                          std::isfinite(domain.hi2);
  if (!finite_box || !(domain.hi1 > domain.lo1) || !(domain.hi2 > domain.lo2)) {
    throw Error(ErrorKind::InvalidDomain, "degenerate domain box " + format_box(domain));
  }

  constexpr int kHalvings = 20;
  const double initial = kContinuityStep * std::ldexp(1.0, kHalvings);
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  UniformSource src(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    Point2 p{domain.lo1 + src.unit() * (domain.hi1 - domain.lo1), domain.lo2 + src.unit() * (domain.hi2 - domain.lo2)};
    const double phi = kTwoPi * src.unit();
    Point2 q{p.x1 + initial * std::cos(phi), p.x2 + initial * std::sin(phi)};
    Point2 tp = transform(p);
    Point2 tq = transform(q);
    for (int s = 0; s < kHalvings; ++s) {
      const Point2 m{0.5 * (p.x1 + q.x1), 0.5 * (p.x2 + q.x2)};
      const Point2 tm = transform(m);
      if (distance(tm, tp) >= distance(tq, tm)) {
        q = m;
        tq = tm;
      } else {
        p = m;
        tp = tm;
      }
    }
    const double len = distance(p, q);
    if (len > 0.0) worst = std::max(worst, distance(tp, tq) / len);
  }
  return {worst <= lipschitz_max, worst};
}

CheckResult check_sigma_algebra_proxy(const Dataset& z, const Dataset& zp, const PointMap& fwd,
                                      const PointMap& inv) {
  if (z.size() != zp.size()) {
    throw Error(ErrorKind::Pairing, "paired datasets differ in length: " + std::to_string(z.size()) + " vs " +
                                        std::to_string(zp.size()));
  }
  double forward_err = 0.0;
  double inverse_err = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    forward_err = std::max(forward_err, distance(fwd(z[i]), zp[i]));
    inverse_err = std::max(inverse_err, distance(inv(zp[i]), z[i]));
  }
  const double err = std::max(forward_err, inverse_err);
  return {forward_err < kSigmaTolerance && inverse_err < kSigmaTolerance, err};
}

CompactSupportResult check_compact_support(const Dataset& d, const Box& expected) {
  const Box b = bounding_box(d);
  const bool inside = b.lo1 >= expected.lo1 - kSupportSlack && b.hi1 <= expected.hi1 + kSupportSlack &&
                      b.lo2 >= expected.lo2 - kSupportSlack && b.hi2 <= expected.hi2 + kSupportSlack;
  return {inside, b};
}

SupportGrid build_support_grid(const Dataset& d, std::size_t bins, std::size_t min_count) {
  require_bins(bins);
  SupportGrid g;
  g.bins_per_axis = bins;
  g.min_count = min_count;
  g.extent = bounding_box(d);
  g.counts.assign(bins * bins, 0);
  std::vector<std::size_t> col(bins, 0), row(bins, 0);
  for (const auto& p : d.points()) {
    const std::size_t i1 = cell_index(p.x1, g.extent.lo1, g.extent.hi1, bins);
    const std::size_t i2 = cell_index(p.x2, g.extent.lo2, g.extent.hi2, bins);
    ++g.counts[i1 * bins + i2];
    ++col[i1];
    ++row[i2];
  }
  g.occupancy.resize(bins * bins);
  for (std::size_t k = 0; k < g.counts.size(); ++k) g.occupancy[k] = g.counts[k] >= min_count;
  g.marginal1.resize(bins);
  g.marginal2.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    g.marginal1[i] = col[i] >= min_count;
    g.marginal2[i] = row[i] >= min_count;
  }
  return g;
}

IndependentSupportResult check_independent_support(const Dataset& d, std::size_t bins, std::size_t min_count) {
  require_bins(bins);
  const std::size_t required = bins * bins * std::max<std::size_t>(min_count, 1) * 5;
  if (d.size() < required) {
    throw Error(ErrorKind::Undersampled, "independent-support check needs n >= " + std::to_string(required) +
                                             " (got " + std::to_string(d.size()) + ")");
  }
  IndependentSupportResult out;
  out.grid = build_support_grid(d, bins, min_count);
  std::size_t product = 0;
  std::size_t occupied = 0;
  for (std::size_t i1 = 0; i1 < bins; ++i1) {
    if (!out.grid.marginal1[i1]) continue;
    for (std::size_t i2 = 0; i2 < bins; ++i2) {
      if (!out.grid.marginal2[i2]) continue;
      ++product;
      if (out.grid.occupied(i1, i2)) ++occupied;
    }
  }
  out.occupied_fraction = product == 0 ? 0.0 : static_cast<double>(occupied) / static_cast<double>(product);
  out.pass = product > 0 && occupied == product;
  return out;
}

double chi_square_sf(double x, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorKind::InvalidArgument, "chi-square degrees of freedom must be > 0");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

UniformityResult chi_square_uniformity(const Dataset& d, std::size_t bins) {
  require_bins(bins);
  const std::size_t cells = bins * bins;
  if (d.size() < 5 * cells) {
    throw Error(ErrorKind::Undersampled, "uniformity check needs n >= " + std::to_string(5 * cells) + " (got " +
                                             std::to_string(d.size()) + ")");
  }
  UniformityResult out;
  out.degrees_of_freedom = static_cast<double>(cells - 1);
  std::vector<std::size_t> counts(cells, 0);
  const Box square = Box::unit_square();
  for (const auto& p : d.points()) {
    if (!square.contains(p, 1e-12)) {
      out.chi_square = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
      return out;
    }
    ++counts[cell_index(p.x1, -1.0, 1.0, bins) * bins + cell_index(p.x2, -1.0, 1.0, bins)];
  }
  const double expected = static_cast<double>(d.size()) / static_cast<double>(cells);
  double chi2 = 0.0;
  for (std::size_t c : counts) {
    const double diff = static_cast<double>(c) - expected;
    chi2 += diff * diff / expected;
  }
  out.chi_square = chi2;
  out.p_value = chi_square_sf(chi2, out.degrees_of_freedom);
  return out;
}

double check_uniformity(const Dataset& d, std::size_t bins) { return chi_square_uniformity(d, bins).p_value; }

const char* to_string(Permutation p) noexcept { return p == Permutation::Identity ? "identity" : "swap"; }

const char* to_string(Monotonicity m) noexcept { return m == Monotonicity::Increasing ? "increasing" : "decreasing"; }

double PermutationScores::worst() const noexcept {
  return std::max({forward[0], forward[1], reverse[0], reverse[1]});
}

CoordRelationVerdict check_coordinatewise_relation(const Dataset& z, const Dataset& zp, std::size_t bins,
                                                   double threshold) {
  require_bins(bins);
  if (z.size() != zp.size()) {
    throw Error(ErrorKind::Pairing, "paired datasets differ in length: " + std::to_string(z.size()) + " vs " +
                                        std::to_string(zp.size()));
  }
  if (z.size() < 50 * bins) {
    throw Error(ErrorKind::Undersampled, "relation check needs n >= " + std::to_string(50 * bins) + " (got " +
                                             std::to_string(z.size()) + ")");
  }
  const std::array<Column, 2> zc{make_column(z, 0), make_column(z, 1)};
  const std::array<Column, 2> zpc{make_column(zp, 0), make_column(zp, 1)};

  CoordRelationVerdict v;
  v.threshold = threshold;
  for (int k = 0; k < 2; ++k) {
    auto& s = v.per_permutation[k];
    s.permutation = k == 0 ? Permutation::Identity : Permutation::Swap;
    for (int j = 0; j < 2; ++j) {
      const Column& target = zpc[k == 0 ? j : 1 - j];
      s.forward[j] = functional_score(target, zc[j], bins);
      s.reverse[j] = functional_score(zc[j], target, bins);
      s.direction[j] = rank_direction(zc[j], target);
    }
  }
  v.best = v.per_permutation[1].worst() < v.per_permutation[0].worst() ? Permutation::Swap : Permutation::Identity;
  v.coordinatewise = v.best_scores().worst() <= threshold;
  return v;
}

bool AuditReport::premises_pass() const noexcept {
  for (const PremiseResult* p : {&continuity, &sigma_algebra, &compact_support, &independent_support}) {
    if (p->applicable && !p->pass) return false;
  }
  return true;
}

bool AuditReport::counterexample_certified() const noexcept { return premises_pass() && !conclusion.coordinatewise; }

namespace {

void fill_data_checks(AuditReport& r, const Dataset& z, const Dataset& zp, const AuditConfig& cfg) {
  with_check_name("compact-support", [&] {
    const auto cz = check_compact_support(z, Box::unit_square());
    const auto czp = check_compact_support(zp, Box::unit_square());
    r.bounds_z = cz.bounds;
    r.bounds_zprime = czp.bounds;
    r.compact_support.name = "compact-support";
    r.compact_support.pass = cz.pass && czp.pass;
    r.compact_support.statistic =
        std::max({std::abs(cz.bounds.lo1), std::abs(cz.bounds.hi1), std::abs(cz.bounds.lo2), std::abs(cz.bounds.hi2),
                  std::abs(czp.bounds.lo1), std::abs(czp.bounds.hi1), std::abs(czp.bounds.lo2),
                  std::abs(czp.bounds.hi2)});
    r.compact_support.threshold = 1.0;
    r.compact_support.detail = "Z in " + format_box(cz.bounds) + "; Z' in " + format_box(czp.bounds);
  });

  with_check_name("independent-support", [&] {
    const auto sz = check_independent_support(z, cfg.bins_support, cfg.min_count);
    const auto szp = check_independent_support(zp, cfg.bins_support, cfg.min_count);
    r.independent_support_pass_z = sz.pass;
    r.independent_support_pass_zprime = szp.pass;
    r.occupancy_fraction_z = sz.occupied_fraction;
    r.occupancy_fraction_zprime = szp.occupied_fraction;
    r.independent_support.name = "independent-support";
    r.independent_support.pass = sz.pass && szp.pass;
    r.independent_support.statistic = std::min(sz.occupied_fraction, szp.occupied_fraction);
    r.independent_support.threshold = 1.0;
    std::ostringstream os;
    os << "occupied product-cell fraction Z = " << sz.occupied_fraction << ", Z' = " << szp.occupied_fraction;
    r.independent_support.detail = os.str();
  });

  with_check_name("uniformity", [&] {
    r.uniformity_pvalue_zprime = check_uniformity(zp, cfg.bins_uniformity);
    r.uniformity_pass = r.uniformity_pvalue_zprime > cfg.alpha;
  });

  // Premises are complete at this point; the conclusion test runs last.
  r.conclusion = with_check_name("coordinatewise-relation", [&] {
    return check_coordinatewise_relation(z, zp, cfg.bins_relation, cfg.threshold_functional);
  });
}

}  // namespace

AuditReport audit_samples(const Mixing2& A, const MpaParams& p, const Dataset& z, const Dataset& x,
                          const Dataset& zp, const AuditConfig& cfg) {
  AuditReport r;
  r.config = cfg;
  r.parameters = {p.a(), p.c(), A.entries(), z.size(), z.seed()};

  const PointMap f = [&A](const Point2& v) { return unmix(A, v); };
  const PointMap f_prime = [&A, &p](const Point2& v) { return mpa_forward(p, unmix(A, v)); };
  const PointMap h = [&p](const Point2& v) { return mpa_forward(p, v); };
  const PointMap h_inv = [&p](const Point2& v) { return mpa_inverse(p, v); };

  with_check_name("continuity", [&] {
    const Box domain = bounding_box(x);
    const std::uint64_t probe_seed = z.seed() ^ 0x9E3779B97F4A7C15ULL;
    const auto cf = check_continuity(f, domain, cfg.continuity_pairs, probe_seed, cfg.lipschitz_max);
    const auto cfp = check_continuity(f_prime, domain, cfg.continuity_pairs, probe_seed, cfg.lipschitz_max);
    r.continuity.name = "continuity";
    r.continuity.pass = cf.pass && cfp.pass;
    r.continuity.statistic = std::max(cf.statistic, cfp.statistic);
    r.continuity.threshold = cfg.lipschitz_max;
    std::ostringstream os;
    os << "max Lipschitz ratio f = " << cf.statistic << ", f' = " << cfp.statistic;
    r.continuity.detail = os.str();
  });

  with_check_name("sigma-algebra", [&] {
    const auto s = check_sigma_algebra_proxy(z, zp, h, h_inv);
    r.sigma_algebra.name = "sigma-algebra";
    r.sigma_algebra.pass = s.pass;
    r.sigma_algebra.statistic = s.statistic;
    r.sigma_algebra.threshold = kSigmaTolerance;
    r.sigma_algebra.detail = "max round-trip error of h and h^-1 over paired samples";
  });

  fill_data_checks(r, z, zp, cfg);
  return r;
}

AuditReport run_audit(const Mixing2& A, const MpaParams& p, std::size_t n, std::uint64_t seed,
                      const AuditConfig& config) {
  const Dataset z = sample_uniform_square(n, seed);
  const auto out = apply_pipeline(A, p, z);
  return audit_samples(A, p, z, out.x, out.zprime, config);
}

AuditReport audit_external(const Dataset& z, const Dataset& zp, const AuditConfig& cfg) {
  if (z.size() != zp.size()) {
    throw Error(ErrorKind::Pairing, "paired datasets differ in length: " + std::to_string(z.size()) + " vs " +
                                        std::to_string(zp.size()));
  }
  AuditReport r;
  r.config = cfg;
  r.has_parameters = false;
  r.parameters.n = z.size();
  r.parameters.seed = z.seed();
  for (PremiseResult* pr : {&r.continuity, &r.sigma_algebra}) {
    pr->applicable = false;
    pr->detail = "not-applicable: no analytic maps supplied";
  }
  r.continuity.name = "continuity";
  r.sigma_algebra.name = "sigma-algebra";
  fill_data_checks(r, z, zp, cfg);
  return r;
}

}  // namespace mpaudit
