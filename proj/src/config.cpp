#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mpaudit/runner.hpp"

namespace mpaudit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Parse, "config line " + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view key, std::string_view v, std::size_t line) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    parse_error(line, "key '" + std::string(key) + "' expects a finite real, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_count(std::string_view key, std::string_view v, std::size_t line) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    parse_error(line, "key '" + std::string(key) + "' expects a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v, std::size_t line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  parse_error(line, "key '" + std::string(key) + "' expects true or false, got '" + std::string(v) + "'");
}

std::array<double, 4> parse_matrix(std::string_view v, std::size_t line) {
  std::array<double, 4> m{};
  std::size_t k = 0;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto next = v.find_first_of(", ", pos);
    if (next == std::string_view::npos) next = v.size();
    const auto tok = trim(v.substr(pos, next - pos));
    if (!tok.empty()) {
      if (k == 4) parse_error(line, "key 'A' expects exactly four reals (a11, a12, a21, a22)");
      m[k++] = parse_real("A", tok, line);
    }
    pos = next + 1;
  }
  if (k != 4) parse_error(line, "key 'A' expects exactly four reals (a11, a12, a21, a22)");
  return m;
}

}  // namespace

MpaParams RunConfig::params() const {
  if (a == 0.0 && allow_degenerate) return MpaParams::degenerate_fixture(c);
  return MpaParams(a, c);
}

Mixing2 RunConfig::mixing_matrix() const { return Mixing2(mixing[0], mixing[1], mixing[2], mixing[3]); }

void validate(const RunConfig& cfg) {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const char* key, const std::string& constraint) {
    if (!ok) bad.push_back(std::string(key) + ": " + constraint);
  };
  need(cfg.n >= 1, "n", "n ≥ 1");
  need(std::isfinite(cfg.a) && (cfg.a != 0.0 || cfg.allow_degenerate), "a", "a ≠ 0");
  need(cfg.c > 0.0 && cfg.c < 1.0, "c", "c ∈ (0,1)");
  try {
    (void)cfg.mixing_matrix();
  } catch (const Error& e) {
    need(false, "A", std::string("invertible with |det A| > 1e-9 (") + e.what() + ")");
  }
  need(cfg.audit.bins_support >= 2, "bins_support", "bins_support ≥ 2");
  need(cfg.audit.min_count >= 1, "min_count", "min_count ≥ 1");
  need(cfg.audit.bins_uniformity >= 2, "bins_uniformity", "bins_uniformity ≥ 2");
  need(cfg.audit.bins_relation >= 2, "bins_relation", "bins_relation ≥ 2");
  need(cfg.audit.threshold_functional > 0.0 && cfg.audit.threshold_functional < 1.0, "threshold_functional",
       "threshold_functional ∈ (0,1)");
  need(cfg.audit.alpha > 0.0 && cfg.audit.alpha < 1.0, "alpha", "alpha ∈ (0,1)");
  need(cfg.audit.lipschitz_max > 0.0, "lipschitz_max", "lipschitz_max > 0");
  need(cfg.audit.continuity_pairs >= 100, "continuity_pairs", "continuity_pairs ≥ 100");
  need(cfg.swirl_bin_width > 0.0 && cfg.swirl_bin_width <= cfg.c, "swirl_bin_width", "swirl_bin_width ∈ (0, c]");
  need(!cfg.output_dir.empty(), "output_dir", "output_dir non-empty");
  if (bad.empty()) return;
  std::string msg = "config constraint violated:";
  for (const auto& b : bad) msg += "\n  " + b;
  throw Error(ErrorKind::ConfigConstraint, msg);
}

RunConfig parse_config(std::string_view text, bool allow_degenerate) {
  RunConfig cfg;
  cfg.allow_degenerate = allow_degenerate;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) parse_error(line_no, "missing key before '='");
    if (value.empty()) parse_error(line_no, "missing value for key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) parse_error(line_no, "duplicate key '" + std::string(key) + "'");

    if (key == "n") cfg.n = parse_count(key, value, line_no);
    else if (key == "seed") cfg.seed = parse_count(key, value, line_no);
    else if (key == "a") cfg.a = parse_real(key, value, line_no);
    else if (key == "c") cfg.c = parse_real(key, value, line_no);
    else if (key == "A") cfg.mixing = parse_matrix(value, line_no);
    else if (key == "bins_support") cfg.audit.bins_support = parse_count(key, value, line_no);
    else if (key == "min_count") cfg.audit.min_count = parse_count(key, value, line_no);
    else if (key == "bins_uniformity") cfg.audit.bins_uniformity = parse_count(key, value, line_no);
    else if (key == "bins_relation") cfg.audit.bins_relation = parse_count(key, value, line_no);
    else if (key == "threshold_functional") cfg.audit.threshold_functional = parse_real(key, value, line_no);
    else if (key == "alpha") cfg.audit.alpha = parse_real(key, value, line_no);
    else if (key == "lipschitz_max") cfg.audit.lipschitz_max = parse_real(key, value, line_no);
    else if (key == "continuity_pairs") cfg.audit.continuity_pairs = parse_count(key, value, line_no);
    else if (key == "swirl_bin_width") cfg.swirl_bin_width = parse_real(key, value, line_no);
    else if (key == "output_dir") cfg.output_dir = std::string(value);
    else if (key == "render") cfg.render = parse_bool(key, value, line_no);
    else parse_error(line_no, "unknown key '" + std::string(key) + "'");
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, bool allow_degenerate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), allow_degenerate);
}

}  // namespace mpaudit
