#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pphi2/battery.hpp"

namespace {

// Re-runs the subcommand recorded in a manifest from its embedded config.
int run_from_manifest(const std::string& path, const std::string& out_dir) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot open manifest: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  pphi2::RunConfig config =
      pphi2::parse_config_text(j.at("config_text").get<std::string>());
  if (!out_dir.empty()) config.out_dir = out_dir;
  return pphi2::run_subcommand(j.at("subcommand").get<std::string>(), config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice simulator and verification suite for the thermal "
               "P(phi)_2 model on a Euclidean cylinder"};
  app.require_subcommand(0, 1);

  std::string config_path, out_dir, manifest_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  double tolerance_scale = -1.0;

  app.add_option("--manifest", manifest_path,
                 "re-run the experiment recorded in a manifest.json");
  app.add_option("--out", out_dir, "output directory override");

  std::vector<std::string> names = {"sample",        "battery",
                                    "tube-scan",     "fock",
                                    "nelson",        "tabulate-oracles"};
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file (sectioned key=value)");
    sub->add_option("--seed", seed, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--threads", threads, "worker thread cap");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--tolerance-scale", tolerance_scale,
                    "multiplies every acceptance threshold");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (!manifest_path.empty()) return run_from_manifest(manifest_path, out_dir);

    auto subs = app.get_subcommands();
    if (subs.empty()) {
      std::cerr << app.help() << std::endl;
      return 2;
    }
    pphi2::RunConfig config;
    if (!config_path.empty()) config = pphi2::parse_config(config_path);
    if (seed_set) config.seed = seed;
    if (threads > 0) config.threads = threads;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (tolerance_scale >= 0) config.tolerance_scale = tolerance_scale;

    int code = pphi2::run_subcommand(subs[0]->get_name(), config);
    std::cout << (code == 0 ? "all checks passed" : "some checks FAILED")
              << " (results in " << config.out_dir << ")" << std::endl;
    return code;
  } catch (const pphi2::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
