#include "mfris/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mfris/kernels.hpp"

namespace mfris {

SeedSummary summarize(std::uint64_t seed, const RunLog& log) {
  return {seed, log.head_mean(kSummaryFraction, &StepRecord::ee), log.tail_mean(kSummaryFraction, &StepRecord::ee),
          log.tail_mean(kSummaryFraction, &StepRecord::reward)};
}

ExperimentSummary aggregate(Variant variant, std::vector<SeedSummary> seeds) {
  if (seeds.empty()) throw std::invalid_argument("aggregate: no seeds");
  ExperimentSummary s{variant, std::move(seeds), 0.0, 0.0};
  for (const auto& x : s.seeds) s.final_ee_mean += x.final_ee;
  s.final_ee_mean /= s.seeds.size();
  double var = 0.0;
  for (const auto& x : s.seeds) var += (x.final_ee - s.final_ee_mean) * (x.final_ee - s.final_ee_mean);
  s.final_ee_std = std::sqrt(var / s.seeds.size());
  return s;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, Variant variant,
                                 const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                                 bool parallel) {
  if (seeds.empty()) throw std::invalid_argument("run_experiment: no seeds");
  std::filesystem::create_directories(out_dir);
  const auto logs = parallel ? train_seeds_omp(config, variant, seeds, out_dir)
                             : train_seeds_serial(config, variant, seeds, out_dir);
  std::vector<SeedSummary> per_seed;
  for (std::size_t i = 0; i < seeds.size(); ++i) per_seed.push_back(summarize(seeds[i], logs[i]));
  ExperimentSummary summary = aggregate(variant, std::move(per_seed));

  const auto path = out_dir / ("summary_" + variant_tag(variant) + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[160];
  out << "seed,first10_ee,final10_ee,final10_reward\n";
  for (const auto& s : summary.seeds) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g\n", static_cast<unsigned long long>(s.seed), s.first_ee,
                  s.final_ee, s.final_reward);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "mean,,%.17g,\nstd,,%.17g,\n", summary.final_ee_mean, summary.final_ee_std);
  out << buf;
  return summary;
}

}  // namespace mfris
