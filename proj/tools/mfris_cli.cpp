#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfris/config.hpp"
#include "mfris/curves.hpp"
#include "mfris/experiment.hpp"
#include "mfris/trainer.hpp"
#include "mfris/variant.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const auto v = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad seed: " + item);
    seeds.push_back(v);
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent training for MF-RIS assisted NOMA downlinks"};
  app.require_subcommand(1);

  std::string config_path, variant_tag = "full", seeds_text, out_dir = "runs";
  int episodes = 0;
  bool parallel = false;
  auto* run = app.add_subcommand("run", "train one variant over a set of seeds");
  run->add_option("--config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
  run->add_option("--variant", variant_tag, "variant tag")->capture_default_str();
  run->add_option("--seeds", seeds_text, "comma-separated seeds (default: config train.seeds)");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--episodes", episodes, "override train.episodes");
  run->add_flag("--parallel", parallel, "run seeds concurrently with OpenMP");

  std::string checkpoint;
  int eval_episodes = 0;
  auto* eval = app.add_subcommand("eval", "evaluate the newest checkpoint of a run directory");
  eval->add_option("--checkpoint", checkpoint, "run directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--episodes", eval_episodes, "evaluation episodes (default: config train.eval_episodes)");

  std::string in_dir;
  int window = 100;
  auto* curves = app.add_subcommand("curves", "moving-average reward and EE series");
  curves->add_option("--in", in_dir, "experiment output directory")->required()->check(CLI::ExistingDirectory);
  curves->add_option("--window", window, "moving-average window")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = mfris::load_config(config_path);
      if (episodes > 0) cfg.train.episodes = episodes;
      const auto variant = mfris::parse_variant(variant_tag);
      const auto seeds = seeds_text.empty() ? cfg.train.seeds : parse_seeds(seeds_text);
      const auto summary = mfris::run_experiment(cfg, variant, seeds, out_dir, parallel);
      for (const auto& s : summary.seeds) {
        std::printf("%s seed %llu: first-10%% EE %.6g, final-10%% EE %.6g\n", variant_tag.c_str(),
                    static_cast<unsigned long long>(s.seed), s.first_ee, s.final_ee);
      }
      std::printf("%s final-10%% EE %.6g +- %.6g over %zu seeds%s\n", variant_tag.c_str(), summary.final_ee_mean,
                  summary.final_ee_std, summary.seeds.size(),
                  mfris::variant_is_simplified(variant) ? " (simplified baseline)" : "");
    } else if (*eval) {
      auto r = mfris::load_run(checkpoint);
      const int n = eval_episodes > 0 ? eval_episodes : r.config.train.eval_episodes;
      const auto res = mfris::evaluate(r, n);
      std::printf("%s: EE %.6g +- %.6g over %d episodes\n", mfris::run_id(r.variant, r.seed).c_str(), res.mean,
                  res.std, n);
    } else if (*curves) {
      for (const auto& p : mfris::emit_curves(in_dir, window)) std::printf("%s\n", p.string().c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
