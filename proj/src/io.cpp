#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mpaudit/runner.hpp"

namespace mpaudit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

nlohmann::ordered_json box_json(const Box& b) { return {b.lo1, b.hi1, b.lo2, b.hi2}; }

nlohmann::ordered_json premise_json(const PremiseResult& p) {
  nlohmann::ordered_json j;
  j["name"] = p.name;
  j["applicable"] = p.applicable;
  if (p.applicable) {
    j["pass"] = p.pass;
    j["statistic"] = p.statistic;
    j["threshold"] = p.threshold;
  } else {
    j["pass"] = nullptr;
    j["statistic"] = nullptr;
    j["threshold"] = nullptr;
  }
  j["detail"] = p.detail;
  return j;
}

}  // namespace

std::string format_point_cloud(const Dataset& d, std::string_view col1, std::string_view col2) {
  std::string out;
  out.reserve(d.size() * 48 + 16);
  out.append(col1).append(",").append(col2).append("\n");
  char buf[64];
  for (const auto& p : d.points()) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x1, p.x2);
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

void write_point_cloud(const std::filesystem::path& path, const Dataset& d, std::string_view col1,
                       std::string_view col2) {
  write_text(path, format_point_cloud(d, col1, col2));
}

Dataset read_point_cloud(const std::filesystem::path& path, Label label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open point cloud '" + path.string() + "'");
  std::vector<Point2> pts;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != 2) {
      malformed(path, line_no, "expected 2 columns, got " + std::to_string(fields.size()));
    }
    if (!header_seen) {
      double tmp = 0.0;
      if (parse_double(fields[0], tmp) || parse_double(fields[1], tmp)) {
        malformed(path, line_no, "missing header row (expected e.g. 'z1,z2')");
      }
      header_seen = true;
      continue;
    }
    Point2 p;
    if (!parse_double(fields[0], p.x1) || !parse_double(fields[1], p.x2)) {
      malformed(path, line_no, "non-numeric or non-finite value");
    }
    pts.push_back(p);
  }
  if (pts.empty()) throw Error(ErrorKind::EmptyDataset, "point cloud '" + path.string() + "' has no rows");
  return Dataset(std::move(pts), label, 0);
}

std::string render_scatter_svg(const Dataset& d, const Box& range, std::string_view title) {
  constexpr double kSize = 600.0;
  constexpr double kMargin = 40.0;
  const double plot = kSize - 2.0 * kMargin;
  const double sx = plot / (range.hi1 - range.lo1);
  const double sy = plot / (range.hi2 - range.lo2);
  auto px = [&](double v) { return kMargin + (v - range.lo1) * sx; };
  auto py = [&](double v) { return kMargin + (range.hi2 - v) * sy; };

  std::string out;
  out.reserve(d.size() * 40 + 1024);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kSize, kSize, kSize, kSize);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n",
                kMargin, kMargin, plot, plot);
  out += buf;
  if (range.lo1 < 0.0 && range.hi1 > 0.0 && range.lo2 < 0.0 && range.hi2 > 0.0) {
    std::snprintf(buf, sizeof buf,
                  "<g stroke=\"#999\" stroke-width=\"0.5\"><line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>"
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/></g>\n",
                  px(range.lo1), py(0.0), px(range.hi1), py(0.0), px(0.0), py(range.lo2), px(0.0), py(range.hi2));
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">", kMargin);
  out += buf;
  out.append(title);
  out += "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">[%.2f, %.2f] x [%.2f, %.2f]</text>\n",
                kMargin, kSize - 12.0, range.lo1, range.hi1, range.lo2, range.hi2);
  out += buf;
  out += "<g fill=\"#1f4e9c\" fill-opacity=\"0.35\">\n";
  for (const auto& p : d.points()) {
    if (!range.contains(p)) continue;
    const int len = std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"0.8\"/>\n", px(p.x1), py(p.x2));
    out.append(buf, static_cast<std::size_t>(len));
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string report_document(const AuditReport& r, std::string_view timestamp) {
  nlohmann::ordered_json j;
  j["generated_at"] = std::string(timestamp);
  j["tool"] = kToolName;
  j["tool_version"] = kToolVersion;
  j["seed"] = r.parameters.seed;

  auto& params = j["parameters"];
  if (r.has_parameters) {
    params["a"] = r.parameters.a;
    params["c"] = r.parameters.c;
    const auto& m = r.parameters.mixing;
    params["A"] = {{m[0], m[1]}, {m[2], m[3]}};
  } else {
    params["a"] = nullptr;
    params["c"] = nullptr;
    params["A"] = nullptr;
  }
  params["n"] = r.parameters.n;
  params["seed"] = r.parameters.seed;
  params["bins_support"] = r.config.bins_support;
  params["min_count"] = r.config.min_count;
  params["bins_uniformity"] = r.config.bins_uniformity;
  params["bins_relation"] = r.config.bins_relation;
  params["threshold_functional"] = r.config.threshold_functional;
  params["alpha"] = r.config.alpha;
  params["lipschitz_max"] = r.config.lipschitz_max;
  params["continuity_pairs"] = r.config.continuity_pairs;

  j["premises"] = nlohmann::ordered_json::array();
  for (const PremiseResult* p : {&r.continuity, &r.sigma_algebra, &r.compact_support, &r.independent_support}) {
    j["premises"].push_back(premise_json(*p));
  }
  j["premises_pass"] = r.premises_pass();

  j["support"] = {{"bounds_z", box_json(r.bounds_z)},
                  {"bounds_zprime", box_json(r.bounds_zprime)},
                  {"independent_support_pass_z", r.independent_support_pass_z},
                  {"independent_support_pass_zprime", r.independent_support_pass_zprime},
                  {"occupancy_fraction_z", r.occupancy_fraction_z},
                  {"occupancy_fraction_zprime", r.occupancy_fraction_zprime}};

  j["uniformity"] = {{"p_value_zprime", r.uniformity_pvalue_zprime},
                     {"alpha", r.config.alpha},
                     {"pass", r.uniformity_pass}};

  nlohmann::ordered_json rel;
  rel["verdict"] = r.conclusion.coordinatewise ? "coordinate-wise" : "not-coordinate-wise";
  rel["best_permutation"] = to_string(r.conclusion.best);
  rel["threshold"] = r.conclusion.threshold;
  rel["permutations"] = nlohmann::ordered_json::array();
  for (const auto& s : r.conclusion.per_permutation) {
    nlohmann::ordered_json ps;
    ps["permutation"] = to_string(s.permutation);
    ps["forward"] = {s.forward[0], s.forward[1]};
    ps["reverse"] = {s.reverse[0], s.reverse[1]};
    ps["direction"] = {to_string(s.direction[0]), to_string(s.direction[1])};
    ps["worst"] = s.worst();
    rel["permutations"].push_back(std::move(ps));
  }
  j["relation"] = std::move(rel);

  j["counterexample_certified"] = r.counterexample_certified();
  j["category"] = to_string(classify(r));
  return j.dump(2) + "\n";
}

}  // namespace mpaudit
