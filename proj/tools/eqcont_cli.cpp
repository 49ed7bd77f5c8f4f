// eqcont: configuration-driven front end for the continuation library.
//
//   eqcont list
//   eqcont continue --config run.json --out results/ [--seed 7] [--n 128]
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 invalid configuration,
// 3 solver failure (diagnostic in report.json).

#include "eqcont/harness.hpp"
#include "eqcont/metric.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using eqc::harness::json;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw eqc::Error(eqc::ErrorKind::ConfigInvalid, "cannot open config '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw eqc::Error(eqc::ErrorKind::ConfigInvalid, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

void print_catalog() {
  for (const auto& e : eqc::harness::catalog()) {
    std::printf("%-28s [%g, %g]  %s\n", e.name.c_str(), e.lambda_range.lo, e.lambda_range.hi,
                e.description.c_str());
  }
  std::printf("\nmetric families:");
  for (const std::string& f : eqc::metric_family_names()) std::printf(" %s", f.c_str());
  std::printf("\n");
}

void print_summary(const eqc::harness::RunReport& rep) {
  for (const auto& c : rep.checks)
    std::printf("%-4s %-32s value %.3e  threshold %.3e%s%s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value,
                c.threshold, c.detail.empty() ? "" : "  ", c.detail.c_str());
  if (rep.doc.contains("error"))
    std::printf("error: %s: %s\n", rep.doc["error"]["kind"].get<std::string>().c_str(),
                rep.doc["error"]["message"].get<std::string>().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant continuation of geometric variational problems"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  long n_override = 0;
  for (const char* name : {"analyze", "continue", "verify", "project"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " pipeline");
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "output directory (default: config 'output')");
    sub->add_option("--seed", seed, "RNG seed override");
    sub->add_option("--n", n_override, "grid size override");
  }
  app.add_subcommand("list", "list built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string mode_name = app.get_subcommands().front()->get_name();
  if (mode_name == "list") {
    print_catalog();
    return 0;
  }

  try {
    json doc = load_config(config_path);
    if (!doc.is_object()) throw eqc::Error(eqc::ErrorKind::ConfigInvalid, "config must be a JSON object");
    if (seed != 0) doc["seed"] = seed;
    if (n_override != 0) doc["grid"]["n"] = n_override;
    const eqc::harness::ExperimentConfig config = eqc::harness::parse_config(doc);
    const eqc::harness::RunReport report = eqc::harness::run(config, eqc::harness::parse_mode(mode_name));
    const std::string dir = out_dir.empty() ? config.output : out_dir;
    eqc::harness::write_outputs(report, dir);
    print_summary(report);
    std::printf("report written to %s/report.json\n", dir.c_str());
    return eqc::harness::exit_code(report);
  } catch (const eqc::Error& e) {
    std::fprintf(stderr, "eqcont: %s\n", e.what());
    return e.kind() == eqc::ErrorKind::ConfigInvalid ? 2 : 3;
  }
}
