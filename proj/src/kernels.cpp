#include "mfris/kernels.hpp"

#include <exception>
#include <random>

#include "mfris/env.hpp"

namespace mfris {

std::vector<EvalInstance> random_instances(const NetworkScenario& s, int count, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<EvalInstance> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Placement p;
    for (const auto& [k, j] : s.user_list()) p.users.push_back(draw_in_disk(s.user_centers[k][j], s.user_drop_radius, rng));
    EvalInstance inst;
    for (int q = 0; q < s.surfaces; ++q) {
      std::vector<std::uint8_t> alpha(s.elements());
      for (auto& a : alpha) a = unit(rng) < 0.5 ? 0 : 1;
      Eigen::VectorXd raw(2 * s.directions() * s.elements() + 1);
      for (auto& x : raw) x = gauss(rng);
      inst.surfaces.push_back(project_surface_action(s, alpha, raw));
      p.surfaces.push_back(inst.surfaces.back().position);
    }
    Eigen::VectorXd bs_raw(s.total_users() + 2 * s.antennas * s.directions());
    for (auto& x : bs_raw) x = 0.1 * gauss(rng);
    inst.bs = project_bs_action(s, bs_raw);
    inst.channels = build_channels(s, p, NlosDraws::draw(s, rng));
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<EeReport> evaluate_batch_serial(const NetworkScenario& s, const std::vector<EvalInstance>& batch,
                                            const PenaltyWeights& w) {
  std::vector<EeReport> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] = evaluate(s, batch[i].channels, batch[i].bs, batch[i].surfaces, w);
  }
  return out;
}

std::vector<EeReport> evaluate_batch_omp(const NetworkScenario& s, const std::vector<EvalInstance>& batch,
                                         const PenaltyWeights& w) {
  std::vector<EeReport> out(batch.size());
  const auto n = static_cast<long>(batch.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[i] = evaluate(s, batch[i].channels, batch[i].bs, batch[i].surfaces, w);
  }
  return out;
}

Eigen::MatrixXd forward_columns_serial(const nn::Mlp& net, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(net.output_size(), x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) out.col(i) = net.forward(Eigen::VectorXd(x.col(i)));
  return out;
}

Eigen::MatrixXd forward_columns_omp(const nn::Mlp& net, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(net.output_size(), x.cols());
  const long n = static_cast<long>(x.cols());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out.col(i) = net.forward(Eigen::VectorXd(x.col(i)));
  return out;
}

namespace {

RunLog train_one(const ExperimentConfig& config, Variant variant, std::uint64_t seed,
                 const std::optional<std::filesystem::path>& out_dir) {
  Run run = make_run(config, variant, seed);
  std::optional<std::filesystem::path> dir;
  if (out_dir) dir = *out_dir / run_id(variant, seed);
  return train(run, dir);
}

}  // namespace

std::vector<RunLog> train_seeds_serial(const ExperimentConfig& config, Variant variant,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::optional<std::filesystem::path>& out_dir) {
  std::vector<RunLog> logs;
  for (auto seed : seeds) logs.push_back(train_one(config, variant, seed, out_dir));
  return logs;
}

std::vector<RunLog> train_seeds_omp(const ExperimentConfig& config, Variant variant,
                                    const std::vector<std::uint64_t>& seeds,
                                    const std::optional<std::filesystem::path>& out_dir) {
  std::vector<RunLog> logs(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  const long n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      logs[i] = train_one(config, variant, seeds[i], out_dir);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return logs;
}

}  // namespace mfris
