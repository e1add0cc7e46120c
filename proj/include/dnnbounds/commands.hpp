#ifndef DNNBOUNDS_COMMANDS_HPP
#define DNNBOUNDS_COMMANDS_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnnbounds/config.hpp"
#include "dnnbounds/report.hpp"
#include "dnnbounds/verify.hpp"

namespace dnnbounds {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitError = 2;

inline int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
  write_bound_table(out, cfg);
  return kExitOk;
}

struct VerifyOptions {
  bool quiet = false;
  /// Multiplies every bound before comparison. Only for the harness self-test.
  double bound_scale = 1.0;
};

/// Runs the campaign and writes records.csv, summary.txt and config.json
/// into cfg.output.
inline int cmd_verify(const RunConfig& cfg, const VerifyOptions& opts, std::ostream& out,
                      std::ostream& err) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    err << "error: cannot create output directory '" << cfg.output << "'\n";
    return kExitError;
  }
  std::ofstream csv(dir / "records.csv", std::ios::binary);
  std::ofstream summary(dir / "summary.txt", std::ios::binary);
  std::ofstream echo(dir / "config.json", std::ios::binary);
  if (!csv || !summary || !echo) {
    err << "error: cannot write reports into '" << cfg.output << "'\n";
    return kExitError;
  }

  CampaignConfig campaign = cfg.campaign();
  campaign.bound_scale = opts.bound_scale;
  CampaignReport report;
  try {
    report = run_campaign(campaign);
  } catch (const CampaignError& e) {
    err << "error: sample " << e.sample_id() << ": " << e.what() << '\n';
    return kExitError;
  }

  write_csv(csv, report);
  write_summary(summary, cfg, report);
  echo << to_json(cfg).dump(2) << '\n';
  csv.flush();
  summary.flush();
  echo.flush();
  if (!csv || !summary || !echo) {
    err << "error: writing reports into '" << cfg.output << "' failed\n";
    return kExitError;
  }
  if (!opts.quiet) write_summary(out, cfg, report);
  return report.violations() == 0 ? kExitOk : kExitViolation;
}

/// Command-line entry point; args excludes the program name.
///
///   dnnbounds bounds --config run.json
///   dnnbounds verify --config run.json [--out DIR] [--check NAME]... [--seed N] [--quiet]
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-form DNN derivative bounds and their randomized certification"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::vector<std::string> checks;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  double bound_scale = 1.0;

  auto* bounds = app.add_subcommand("bounds", "print the bound table for each input norm");
  bounds->add_option("--config", config_path, "run config (JSON)")->required();

  auto* verify = app.add_subcommand("verify", "run a certification campaign");
  verify->add_option("--config", config_path, "run config (JSON)")->required();
  verify->add_option("--out", out_dir, "output directory (overrides config)");
  verify->add_option("--check", checks, "check to run, repeatable (overrides config)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  verify->add_option("--seed", seed, "seed (overrides config)");
  verify->add_flag("--quiet", quiet, "no summary on stdout");
  verify->add_option("--bound-scale", bound_scale)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
    if (!checks.empty()) {
      cfg.checks.clear();
      for (const auto& name : checks) {
        const auto c = parse_check(name);
        if (!c) throw ConfigError("checks", 0, "--check: unknown check '" + name + "'");
        if (std::find(cfg.checks.begin(), cfg.checks.end(), *c) == cfg.checks.end()) {
          cfg.checks.push_back(*c);
        }
      }
    }
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output = *out_dir;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  if (bounds->parsed()) return cmd_bounds(cfg, out);
  return cmd_verify(cfg, VerifyOptions{quiet, bound_scale}, out, err);
}

}  // namespace dnnbounds

#endif  // DNNBOUNDS_COMMANDS_HPP
