#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mpaudit/core.hpp"

namespace mpaudit {

struct Box {
  double lo1 = -1.0;
  double hi1 = 1.0;
  double lo2 = -1.0;
  double hi2 = 1.0;

  static Box unit_square() { return {}; }
  bool contains(const Point2& p, double slack = 0.0) const noexcept;
  friend bool operator==(const Box&, const Box&) = default;
};

Box bounding_box(const Dataset& d);

struct CheckResult {
  bool pass = false;
  double statistic = 0.0;
};

/// Lipschitz-ratio falsification scan for gross discontinuities.
///
/// Each of `n_pairs` probes starts from a random chord of length
/// 1e-7 * 2^20 inside `domain` and bisects toward the half with the larger
/// image jump until the chord is 1e-7 long. A jump discontinuity crossed by
/// the initial chord survives every halving, so its final ratio is about
/// jump / 1e-7. The statistic is the largest final ratio observed.
CheckResult check_continuity(const PointMap& transform, const Box& domain, std::size_t n_pairs,
                             std::uint64_t seed, double lipschitz_max = 100.0);

inline constexpr double kContinuityStep = 1e-7;
inline constexpr double kSigmaTolerance = 1e-9;
inline constexpr double kSupportSlack = 1e-9;

// Max of forward and inverse reconstruction errors over paired samples.
CheckResult check_sigma_algebra_proxy(const Dataset& z, const Dataset& zp, const PointMap& fwd,
                                      const PointMap& inv);

struct CompactSupportResult {
  bool pass = false;
  Box bounds;
};

CompactSupportResult check_compact_support(const Dataset& d, const Box& expected);

struct SupportGrid {
  std::size_t bins_per_axis = 0;
  std::size_t min_count = 0;
  Box extent;
  std::vector<std::size_t> counts;  // row-major, index = i1 * bins + i2
  std::vector<bool> occupancy;
  std::vector<bool> marginal1;
  std::vector<bool> marginal2;

  bool occupied(std::size_t i1, std::size_t i2) const { return occupancy[i1 * bins_per_axis + i2]; }
};

SupportGrid build_support_grid(const Dataset& d, std::size_t bins, std::size_t min_count);

struct IndependentSupportResult {
  bool pass = false;
  double occupied_fraction = 0.0;
  SupportGrid grid;
};

IndependentSupportResult check_independent_support(const Dataset& d, std::size_t bins, std::size_t min_count);

struct UniformityResult {
  double chi_square = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 0.0;
};

// Pearson chi-square test of the bins x bins histogram over [-1,1]^2 against
// equal cell probabilities. Any point outside the square yields p = 0.
UniformityResult chi_square_uniformity(const Dataset& d, std::size_t bins);

double check_uniformity(const Dataset& d, std::size_t bins);

// Upper tail P(X > x) of a chi-square variable with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

enum class Permutation { Identity, Swap };

const char* to_string(Permutation p) noexcept;

enum class Monotonicity { Increasing, Decreasing };

const char* to_string(Monotonicity m) noexcept;

struct PermutationScores {
  Permutation permutation = Permutation::Identity;
  // [j] : Z_j explained by Z'_pi(j) (forward) and Z'_pi(j) by Z_j (reverse).
  std::array<double, 2> forward{};
  std::array<double, 2> reverse{};
  std::array<Monotonicity, 2> direction{};

  double worst() const noexcept;
};

struct CoordRelationVerdict {
  std::array<PermutationScores, 2> per_permutation;
  Permutation best = Permutation::Identity;
  double threshold = 0.01;
  bool coordinatewise = false;

  const PermutationScores& best_scores() const noexcept {
    return per_permutation[best == Permutation::Identity ? 0 : 1];
  }
};

/// Tests whether paired samples are related coordinate-wise up to a
/// permutation, i.e. Z_j = q_j(Z'_pi(j)) with continuous bijections q_j.
///
/// For each permutation and coordinate, the binning variable is split into
/// `bins` equal-count bins and the response is replaced by its ranks. The
/// score is the mean within-bin rank variance over the total rank variance:
/// near 0 for a functional dependence, near 1 for none. Ranks make the score
/// invariant under strictly monotone q_j, and an exact monotone relation
/// scores strictly below 1 / bins^2. Both directions are scored so a mere
/// function (non-bijective) does not pass.
CoordRelationVerdict check_coordinatewise_relation(const Dataset& z, const Dataset& zp, std::size_t bins,
                                                   double threshold = 0.01);

struct AuditConfig {
  std::size_t bins_support = 10;
  std::size_t min_count = 5;
  std::size_t bins_uniformity = 10;
  std::size_t bins_relation = 50;
  double threshold_functional = 0.01;
  double alpha = 0.001;
  double lipschitz_max = 100.0;
  std::size_t continuity_pairs = 1000;
};

struct PremiseResult {
  std::string name;
  bool applicable = true;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct AuditParameters {
  double a = 0.0;
  double c = 0.0;
  std::array<double, 4> mixing{};
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct AuditReport {
  AuditParameters parameters;
  AuditConfig config;
  bool has_parameters = true;

  PremiseResult continuity;
  PremiseResult sigma_algebra;
  PremiseResult compact_support;
  Box bounds_z;
  Box bounds_zprime;
  PremiseResult independent_support;
  double occupancy_fraction_z = 0.0;
  double occupancy_fraction_zprime = 0.0;
  bool independent_support_pass_z = false;
  bool independent_support_pass_zprime = false;

  double uniformity_pvalue_zprime = 0.0;
  bool uniformity_pass = false;

  CoordRelationVerdict conclusion;

  bool premises_pass() const noexcept;
  // All applicable premises hold and the conclusion of the theorem fails.
  bool counterexample_certified() const noexcept;
};

AuditReport run_audit(const Mixing2& A, const MpaParams& p, std::size_t n, std::uint64_t seed,
                      const AuditConfig& config = {});

// Same as run_audit, on caller-supplied samples. Used by the full audit after
// it has generated Z and Z'.
AuditReport audit_samples(const Mixing2& A, const MpaParams& p, const Dataset& z, const Dataset& x,
                          const Dataset& zp, const AuditConfig& config);

// Data-only audit for externally produced paired representations. Continuity
// and the sigma-algebra premise are marked not applicable.
AuditReport audit_external(const Dataset& z, const Dataset& zp, const AuditConfig& config);

}  // namespace mpaudit
