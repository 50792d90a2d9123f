// Command-line front end. Talks to the library only through the C interface.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mpaudit/mpaudit.h"

namespace {

struct ConfigDeleter {
  void operator()(mpa_config* c) const { mpa_config_free(c); }
};
struct ReportDeleter {
  void operator()(mpa_report* r) const { mpa_report_free(r); }
};
using ConfigPtr = std::unique_ptr<mpa_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<mpa_report, ReportDeleter>;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string report = "json";
  bool render = false;
  bool allow_degenerate = false;
  std::string z_path;
  std::string zprime_path;
};

int report_error(const char* stage, mpa_status s) {
  const mpa_category cat = mpa_status_category(s);
  std::fprintf(stderr, "mpaudit: %s failed [%s]: %s\n", stage, mpa_status_name(s), mpa_last_error());
  std::fprintf(stderr, "mpaudit: exit category %s\n", mpa_category_name(cat));
  return static_cast<int>(cat);
}

int build_config(const Options& opt, ConfigPtr& out) {
  mpa_config* raw = nullptr;
  mpa_status s = opt.config_path.empty() ? mpa_config_default(&raw)
                                         : mpa_config_load(opt.config_path.c_str(), opt.allow_degenerate, &raw);
  if (s != MPA_OK) return report_error("loading config", s);
  out.reset(raw);
  if (opt.seed) mpa_config_set_seed(out.get(), *opt.seed);
  if (!opt.out_dir.empty()) {
    if ((s = mpa_config_set_output_dir(out.get(), opt.out_dir.c_str())) != MPA_OK) return report_error("config", s);
  }
  if (opt.render) mpa_config_set_render(out.get(), 1);
  return 0;
}

int finish(const char* command, mpa_report* raw) {
  ReportPtr report(raw);
  const mpa_category cat = mpa_report_category(report.get());
  std::printf("%s: %s (counterexample_certified=%s, uniformity p=%.6g)\n", command, mpa_category_name(cat),
              mpa_report_certified(report.get()) ? "true" : "false", mpa_report_uniformity_pvalue(report.get()));
  std::printf("report: %s\n", mpa_report_path(report.get()));
  return static_cast<int>(cat);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Builds the radius-dependent rotation counterexample and audits identifiability premises"};
  app.set_version_flag("--version", std::string(mpa_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path, "Flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", opt.seed, "Generation seed (overrides the config)");
  app.add_option("--format", opt.format, "Point-cloud format")->check(CLI::IsMember({"csv"}));
  app.add_option("--report", opt.report, "Report format")->check(CLI::IsMember({"json"}));
  app.add_flag("--render", opt.render, "Also emit SVG scatter plots");
  app.add_flag("--allow-degenerate", opt.allow_degenerate, "Admit a = 0 (test fixture)")->group("");

  auto* run = app.add_subcommand("run", "Generate samples, audit every premise and the conclusion, write outputs");
  auto* figures = app.add_subcommand("figures", "Write the X, Z, Z' point clouds and the swirl profile");
  auto* external = app.add_subcommand("audit-external", "Audit two paired point-cloud files");
  external->add_option("z", opt.z_path, "Point cloud for Z")->required()->check(CLI::ExistingFile);
  external->add_option("zprime", opt.zprime_path, "Point cloud for Z'")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(MPA_CAT_CONFIG);
  }

  ConfigPtr cfg;
  if (const int rc = build_config(opt, cfg); rc != 0) return rc;

  if (run->parsed()) {
    mpa_report* report = nullptr;
    if (const mpa_status s = mpa_run(cfg.get(), &report); s != MPA_OK) return report_error("run", s);
    return finish("run", report);
  }
  if (figures->parsed()) {
    if (const mpa_status s = mpa_figures(cfg.get()); s != MPA_OK) return report_error("figures", s);
    std::printf("figures: written to %s\n", mpa_config_output_dir(cfg.get()));
    return 0;
  }
  mpa_report* report = nullptr;
  if (const mpa_status s = mpa_audit_external(cfg.get(), opt.z_path.c_str(), opt.zprime_path.c_str(), &report);
      s != MPA_OK) {
    return report_error("audit-external", s);
  }
  return finish("audit-external", report);
}
