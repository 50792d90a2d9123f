#include <algorithm>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "mpaudit/runner.hpp"

namespace mpaudit {

namespace fs = std::filesystem;

namespace {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " +
                                   (ec ? ec.message() : std::string("not a directory")));
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Box padded_bounds(const Dataset& d) {
  Box b = bounding_box(d);
  const double pad = 0.05 * std::max(b.hi1 - b.lo1, b.hi2 - b.lo2);
  return {b.lo1 - pad, b.hi1 + pad, b.lo2 - pad, b.hi2 + pad};
}

struct Samples {
  Dataset z;
  PipelineOutput out;
};

Samples generate(const RunConfig& cfg) {
  Dataset z = sample_uniform_square(cfg.n, cfg.seed);
  auto out = apply_pipeline(cfg.mixing_matrix(), cfg.params(), z);
  return {std::move(z), std::move(out)};
}

FigureBundle emit_figures(const RunConfig& cfg, const Samples& s) {
  const fs::path dir(cfg.output_dir);
  ensure_directory(dir);
  FigureBundle fb;
  fb.n = s.z.size();
  fb.z_csv = dir / "Z.csv";
  fb.x_csv = dir / "X.csv";
  fb.zprime_csv = dir / "Zprime.csv";
  fb.swirl_csv = dir / "swirl_profile.csv";
  write_file(fb.z_csv, format_point_cloud(s.z, "z1", "z2"));
  write_file(fb.x_csv, format_point_cloud(s.out.x, "x1", "x2"));
  write_file(fb.zprime_csv, format_point_cloud(s.out.zprime, "z1", "z2"));
  fb.swirl = swirl_profile(s.z, s.out.zprime, cfg.c, cfg.swirl_bin_width);
  write_file(fb.swirl_csv, format_swirl_profile(fb.swirl, cfg.a, cfg.c));
  if (cfg.render) {
    const Box latent{-1.05, 1.05, -1.05, 1.05};
    char title[96];
    std::snprintf(title, sizeof title, "Sources Z' (a=%g, c=%g)", cfg.a, cfg.c);
    const std::pair<fs::path, std::string> images[] = {
        {dir / "X.svg", render_scatter_svg(s.out.x, padded_bounds(s.out.x), "Observations X = A Z")},
        {dir / "Z.svg", render_scatter_svg(s.z, latent, "Sources Z")},
        {dir / "Zprime.svg", render_scatter_svg(s.out.zprime, latent, title)},
    };
    for (const auto& [path, svg] : images) {
      write_file(path, svg);
      fb.images.push_back(path);
    }
  }
  return fb;
}

void write_report(const RunConfig& cfg, RunOutcome& o) {
  const fs::path dir(cfg.output_dir);
  ensure_directory(dir);
  o.report_path = dir / "report.json";
  o.report_json = report_document(o.report, utc_timestamp());
  write_file(o.report_path, o.report_json);
}

}  // namespace

double swirl_angle(double a, double c, double r) noexcept { return r <= c ? a * (r - c) : 0.0; }

std::vector<SwirlBin> swirl_profile(const Dataset& z, const Dataset& zp, double c, double bin_width) {
  if (z.size() != zp.size()) {
    throw Error(ErrorKind::Pairing, "paired datasets differ in length: " + std::to_string(z.size()) + " vs " +
                                        std::to_string(zp.size()));
  }
  if (!(c > 0.0) || !(bin_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "swirl profile needs c > 0, width > 0");
  const std::size_t inner = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(c / bin_width)));
  const double width = c / static_cast<double>(inner);
  double r_max = 0.0;
  for (const auto& p : z.points()) r_max = std::max(r_max, p.norm());
  const std::size_t outer = r_max > c ? static_cast<std::size_t>(std::ceil((r_max - c) / width)) + 1 : 0;

  struct Acc {
    double r_sum = 0.0;
    double sin_sum = 0.0;
    double cos_sum = 0.0;
    std::size_t count = 0;
  };
  std::vector<Acc> acc(inner + outer);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Point2& u = z[i];
    const Point2& v = zp[i];
    const double r = u.norm();
    if (r == 0.0) continue;
    std::size_t k;
    if (r <= c) {
      k = std::min(static_cast<std::size_t>(r / width), inner - 1);
    } else {
      k = inner + std::min(static_cast<std::size_t>((r - c) / width), outer - 1);
    }
    const double angle = std::atan2(u.x1 * v.x2 - u.x2 * v.x1, u.x1 * v.x1 + u.x2 * v.x2);
    acc[k].r_sum += r;
    acc[k].sin_sum += std::sin(angle);
    acc[k].cos_sum += std::cos(angle);
    ++acc[k].count;
  }

  std::vector<SwirlBin> out;
  for (std::size_t k = 0; k < acc.size(); ++k) {
    if (acc[k].count == 0) continue;
    SwirlBin b;
    if (k < inner) {
      b.r_lo = width * static_cast<double>(k);
      b.r_hi = k + 1 == inner ? c : width * static_cast<double>(k + 1);
    } else {
      b.r_lo = c + width * static_cast<double>(k - inner);
      b.r_hi = c + width * static_cast<double>(k - inner + 1);
    }
    b.count = acc[k].count;
    b.r_mean = acc[k].r_sum / static_cast<double>(b.count);
    b.mean_displacement = std::atan2(acc[k].sin_sum, acc[k].cos_sum);
    out.push_back(b);
  }
  // Displacements near the origin pass -pi; unwrap inward from the outermost bin.
  constexpr double kTwoPi = 6.283185307179586;
  for (std::size_t k = out.size(); k-- > 1;) {
    const double step = out[k].mean_displacement - out[k - 1].mean_displacement;
    out[k - 1].mean_displacement += kTwoPi * std::round(step / kTwoPi);
  }
  return out;
}

const SwirlBin& nearest_swirl_bin(const std::vector<SwirlBin>& profile, double r) {
  if (profile.empty()) throw Error(ErrorKind::EmptyDataset, "swirl profile is empty");
  return *std::min_element(profile.begin(), profile.end(), [r](const SwirlBin& x, const SwirlBin& y) {
    return std::abs(x.r_mean - r) < std::abs(y.r_mean - r);
  });
}

std::string format_swirl_profile(const std::vector<SwirlBin>& profile, double a, double c) {
  std::string out = "r_lo,r_hi,r_mean,count,mean_displacement,expected_displacement\n";
  char buf[192];
  for (const auto& b : profile) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%zu,%.17g,%.17g\n", b.r_lo, b.r_hi, b.r_mean,
                                  b.count, b.mean_displacement, swirl_angle(a, c, b.r_mean));
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

const char* to_string(ExitCategory c) noexcept {
  switch (c) {
    case ExitCategory::Certified: return "certified";
    case ExitCategory::Internal: return "internal-error";
    case ExitCategory::Config: return "config-error";
    case ExitCategory::Io: return "io-error";
    case ExitCategory::PremiseFailed: return "premise-failed";
    case ExitCategory::DegenerateCoordinatewise: return "degenerate-coordinate-wise";
    case ExitCategory::Data: return "data-error";
  }
  return "unknown";
}

ExitCategory classify(const AuditReport& r) noexcept {
  if (r.counterexample_certified()) return ExitCategory::Certified;
  if (!r.premises_pass()) return ExitCategory::PremiseFailed;
  return ExitCategory::DegenerateCoordinatewise;
}

ExitCategory classify(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return ExitCategory::Io;
    case ErrorKind::Parse:
    case ErrorKind::ConfigConstraint:
    case ErrorKind::InvalidArgument:
    case ErrorKind::SingularMatrix: return ExitCategory::Config;
    case ErrorKind::EmptyDataset:
    case ErrorKind::InvalidPoint:
    case ErrorKind::LabelMismatch:
    case ErrorKind::Pairing:
    case ErrorKind::Undersampled:
    case ErrorKind::MalformedRow:
    case ErrorKind::IllConditionedPoint:
    case ErrorKind::InvalidDomain: return ExitCategory::Data;
  }
  return ExitCategory::Internal;
}

FigureBundle cmd_figures(const RunConfig& cfg) { return emit_figures(cfg, generate(cfg)); }

RunOutcome cmd_run(const RunConfig& cfg) {
  const Samples s = generate(cfg);
  RunOutcome o;
  o.report = audit_samples(cfg.mixing_matrix(), cfg.params(), s.z, s.out.x, s.out.zprime, cfg.audit);
  o.figures = emit_figures(cfg, s);
  write_report(cfg, o);
  o.category = classify(o.report);
  return o;
}

RunOutcome cmd_audit_external(const fs::path& z_path, const fs::path& zp_path, const RunConfig& cfg) {
  const Dataset z = read_point_cloud(z_path, Label::LatentZ);
  const Dataset zp = read_point_cloud(zp_path, Label::LatentZprime);
  if (z.size() != zp.size()) {
    throw Error(ErrorKind::Pairing, "row-count mismatch: '" + z_path.string() + "' has " + std::to_string(z.size()) +
                                        " rows, '" + zp_path.string() + "' has " + std::to_string(zp.size()));
  }
  RunOutcome o;
  o.report = audit_external(z, zp, cfg.audit);
  write_report(cfg, o);
  o.category = classify(o.report);
  return o;
}

}  // namespace mpaudit
