// cubevar: command-line front end. Flags map onto config keys; see README.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cubevar/cli.hpp"

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for r-variation of spherical means on the Hamming cube"};
  app.require_subcommand(1, 1);

  std::vector<std::string> n_list, r_list;
  std::optional<int> q;
  std::optional<std::string> seed, trials, rule, alpha;
  cubevar::cli::RunSpec spec;
  std::string config, format = "both";

  for (const auto& name : cubevar::cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--n", n_list, "cube dimensions")->delimiter(',');
    sub->add_option("--r", r_list, "variation exponents")->delimiter(',');
    sub->add_option("--q", q, "parity class (0 or 1)");
    sub->add_option("--seed", seed, "PRNG seed");
    sub->add_option("--trials", trials, "random trials per check");
    sub->add_option("--rule", rule, "truncation rule: power, log, constant");
    sub->add_option("--alpha", alpha, "truncation rule parameter");
    sub->add_option("--threads", spec.threads, "worker threads (default: CUBEVAR_THREADS or all cores)");
    sub->add_option("--config", config, "key = value config file");
    sub->add_option("--out", spec.output_dir, "output directory");
    sub->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
    if (name == "counterexample")
      sub->add_option("--kind", spec.kind, "all-ones, truncated or corollary")
          ->check(CLI::IsMember({"all-ones", "truncated", "corollary"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  spec.command = app.get_subcommands().front()->get_name();
  if (!config.empty()) spec.config_path = config;
  spec.format = format == "json" ? cubevar::cli::Format::json
                : format == "csv" ? cubevar::cli::Format::csv
                                  : cubevar::cli::Format::both;
  if (!n_list.empty()) spec.overrides.emplace_back("n_list", join(n_list));
  if (!r_list.empty()) spec.overrides.emplace_back("r_list", join(r_list));
  if (q) spec.overrides.emplace_back("q", std::to_string(*q));
  if (rule) spec.overrides.emplace_back("rule", *rule);
  if (alpha) spec.overrides.emplace_back("alpha", *alpha);
  if (seed) spec.overrides.emplace_back("seed", *seed);
  if (trials) spec.overrides.emplace_back("trials", *trials);

  return cubevar::cli::run(spec);
}
