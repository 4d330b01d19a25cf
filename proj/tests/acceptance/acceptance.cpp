// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--out <dir>] [--config <file>]
//
// Training runs for criteria 6 and 7 are written below --out (default
// ./acceptance_runs) so their logs can be inspected afterwards.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfris/chain_mdp.hpp"
#include "mfris/config.hpp"
#include "mfris/dqn.hpp"
#include "mfris/experiment.hpp"
#include "mfris/geometry_channel.hpp"
#include "mfris/mfris_model.hpp"
#include "mfris/noma_phy.hpp"
#include "mfris/ppo.hpp"
#include "mfris/trainer.hpp"
#include "sinr_oracle.hpp"

using namespace mfris;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_err(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 ------------------------------------------------------------------------

Outcome physics_oracles() {
  const auto s = NetworkScenario::full_defaults();
  std::vector<std::string> failed;
  std::ostringstream d;

  const double h0 = harvested_power(0.0, s.eh);
  if (h0 != 0.0) failed.push_back("H(0)");
  const double h14 = harvested_power(0.014, s.eh) * 1e3;
  if (!(std::abs(h14 - 10.5305) <= 1e-6)) failed.push_back("H(0.014 W)");
  const double h1 = harvested_power(1.0, s.eh) * 1e3;
  if (!(std::abs(h1 - 24.0) <= 1e-6)) failed.push_back("H(1 W)");
  const int pins = pin_diode_count(2, 10, 8, 2);
  if (pins != 14) failed.push_back("pin count");
  const double pc = consumed_power(s.power, 2, s.elements(), 0.0);
  if (!(std::abs(pc - 149.94e-3) <= 1e-9)) failed.push_back("consumed power");

  d << fmt("H(0)=%.3g mW, H(0.014 W)=%.9f mW (|diff|=%.3g mW), H(1 W)=%.9f mW, pins=%d, P_c=%.12f mW", h0 * 1e3,
           h14, std::abs(h14 - 10.5305), h1, pins, pc * 1e3);
  if (!failed.empty()) {
    d << "; failed:";
    for (const auto& f : failed) d << ' ' << f;
  }
  return {failed.empty(), d.str()};
}

// 2 ------------------------------------------------------------------------

Outcome signal_decomposition() {
  Rng rng(20240601);
  std::uniform_int_distribution<int> n_dist(1, 3), m_dist(1, 2), q_dist(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto s = NetworkScenario::full_defaults();
    s.antennas = n_dist(rng);
    s.elements_h = m_dist(rng);
    s.elements_v = 1;
    s.surfaces = q_dist(rng);
    std::uniform_real_distribution<double> y(s.deploy_min.y(), s.deploy_max.y());
    Placement p;
    for (const auto& [k, j] : s.user_list()) p.users.push_back(draw_in_disk(s.user_centers[k][j], s.user_drop_radius, rng));
    for (int q = 0; q < s.surfaces; ++q) {
      Vec3 w = s.deploy_mid();
      w.y() = y(rng);
      p.surfaces.push_back(w);
    }
    const auto ch = build_channels(s, p, NlosDraws::draw(s, rng));
    std::vector<MfRisConfig> surfaces;
    for (int q = 0; q < s.surfaces; ++q) {
      auto c = MfRisConfig::neutral(s.directions(), s.elements(), p.surfaces[q]);
      for (auto& a : c.alpha) a = u(rng) < 0.5 ? 0 : 1;
      for (Eigen::Index i = 0; i < c.beta.size(); ++i) {
        c.beta.data()[i] = s.beta_max * u(rng);
        c.theta.data()[i] = kTwoPi * u(rng) * 0.999;
      }
      surfaces.push_back(c);
    }
    BsConfig bs;
    for (int k = 0; k < s.directions(); ++k) {
      std::vector<double> row(s.users_in(k));
      double sum = 0.0;
      for (auto& x : row) sum += (x = 0.05 + u(rng));
      for (auto& x : row) x /= sum;
      bs.power_fractions.push_back(row);
      CVec f(s.antennas);
      for (auto& x : f) x = 0.5 * cplx(g(rng), g(rng));
      bs.beams.push_back(f);
    }
    const auto expect = oracle::noma_sinr(s, ch, surfaces, bs);
    const auto lb = link_budget(s, ch, surfaces, bs.beams);
    for (int k = 0; k < s.directions(); ++k) {
      const auto order = sic_order(s, lb, k);
      for (int j = 0; j < s.users_in(k); ++j) {
        worst = std::max(worst, rel_err(sinr(s, lb, bs, k, j, order), expect[s.user_index(k, j)]));
        ++compared;
      }
    }
  }
  return {worst <= 1e-9, fmt("%d SINRs over 100 instances, max rel err %.3g", compared, worst)};
}

// 3 ------------------------------------------------------------------------

// Relative error with a floor far below any gradient entry that matters, so
// that entries which are zero up to rounding are compared absolutely.
constexpr double kGradFloor = 1e-8;

template <typename Loss>
double fd_worst(Eigen::VectorXd params, const Eigen::VectorXd& analytic, Loss&& loss_at) {
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss_at(params);
    params[i] = keep - h;
    const double down = loss_at(params);
    params[i] = keep;
    worst = std::max(worst, rel_err(analytic[i], (up - down) / (2 * h), kGradFloor));
  }
  loss_at(params);
  return worst;
}

Outcome gradient_checks() {
  Rng rng(77);
  std::uniform_int_distribution<int> dim(2, 6), width(3, 12), depth(1, 2);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_q = 0.0, worst_clip = 0.0, worst_v = 0.0;
  int redraws = 0;
  for (int net = 0; net < 20; ++net) {
    const int sd = dim(rng);
    std::vector<int> hidden(depth(rng));
    for (auto& w : hidden) w = width(rng);

    // Q loss over a branching net with two heads.
    agents::DqnConfig dc;
    dc.hidden = hidden;
    dc.gamma = 0.9;
    agents::DqnAgent dqn(sd, {2, 3}, dc, rng);
    std::vector<agents::Transition> ts(8);
    for (auto& t : ts) {
      t.state = Eigen::VectorXd(sd);
      t.next_state = Eigen::VectorXd(sd);
      for (auto& x : t.state) x = g(rng);
      for (auto& x : t.next_state) x = g(rng);
      t.action = {static_cast<int>(rng() % 2), static_cast<int>(rng() % 3)};
      t.reward = g(rng);
      t.terminal = rng() % 4 == 0;
    }
    std::vector<const agents::Transition*> batch;
    for (const auto& t : ts) batch.push_back(&t);
    Eigen::VectorXd gq;
    dqn.td_loss(batch, &gq);
    worst_q = std::max(worst_q, fd_worst(dqn.q_net().params(), gq, [&](const Eigen::VectorXd& p) {
                         dqn.q_net().set_params(p);
                         return dqn.td_loss(batch, nullptr);
                       }));

    // Clipped policy objective and value loss.
    agents::PpoConfig pc;
    pc.hidden = hidden;
    pc.policy_output_scale = 1.0;
    const int ad = dim(rng);
    agents::PpoAgent ppo(sd, ad, pc, rng);
    agents::PpoAgent::PolicyBatch pb;
    const int n = 12;
    pb.states.resize(sd, n);
    pb.actions.resize(ad, n);
    pb.advantages.resize(n);
    for (auto& x : pb.states.reshaped()) x = g(rng);
    for (auto& x : pb.actions.reshaped()) x = 0.5 * g(rng);
    for (auto& x : pb.advantages) x = g(rng);
    pb.old_log_probs = ppo.old_log_probs(pb.states, pb.actions);
    // Move the current policy away from the snapshot so that some ratios
    // clip, keeping every ratio at least 1e-3 from the clip boundaries.
    const Eigen::VectorXd base = ppo.policy().params();
    for (;;) {
      Eigen::VectorXd p = base;
      for (auto& x : p) x += 0.05 * g(rng);
      ppo.policy().set_params(p);
      Eigen::VectorXd ratios;
      ppo.clip_objective(pb, nullptr, nullptr, &ratios);
      const double eps = pc.clip;
      const bool clear = (((ratios.array() - (1 - eps)).abs() > 1e-3) && ((ratios.array() - (1 + eps)).abs() > 1e-3)).all();
      if (clear) break;
      ++redraws;
    }
    Eigen::VectorXd gm, gs;
    ppo.clip_objective(pb, &gm, &gs);
    worst_clip = std::max(worst_clip, fd_worst(ppo.policy().params(), gm, [&](const Eigen::VectorXd& p) {
                            ppo.policy().set_params(p);
                            return ppo.clip_objective(pb, nullptr, nullptr);
                          }));
    worst_clip = std::max(worst_clip, fd_worst(ppo.log_std(), gs, [&](const Eigen::VectorXd& p) {
                            ppo.log_std() = p;
                            return ppo.clip_objective(pb, nullptr, nullptr);
                          }));

    Eigen::VectorXd targets(n);
    for (auto& x : targets) x = g(rng);
    Eigen::VectorXd gv;
    ppo.value_loss(pb.states, targets, &gv);
    worst_v = std::max(worst_v, fd_worst(ppo.value_net().params(), gv, [&](const Eigen::VectorXd& p) {
                         ppo.value_net().set_params(p);
                         return ppo.value_loss(pb.states, targets, nullptr);
                       }));
  }
  const double worst = std::max({worst_q, worst_clip, worst_v});
  return {worst <= 1e-4, fmt("20 nets, h=1e-5, max rel err: Q-loss %.3g, clip %.3g, value %.3g (%d batch redraws)",
                             worst_q, worst_clip, worst_v, redraws)};
}

// 4 ------------------------------------------------------------------------

Outcome chain_dqn() {
  const double gamma = 0.9;
  agents::DqnConfig cfg;
  cfg.hidden = {32};
  cfg.gamma = gamma;
  cfg.lr = 1e-3;
  cfg.tau = 1e-2;
  cfg.batch = 32;
  cfg.warmup = 200;
  cfg.capacity = 50000;
  cfg.eps = {1.0, 1.0, 1.0};
  const std::int64_t steps = 50000;
  const auto res = train_chain_dqn(cfg, steps, 11);
  const Eigen::MatrixXd q_star = chain_value_iteration(gamma);
  const double err = (res.q - q_star).cwiseAbs().maxCoeff();
  return {err <= 1e-2, fmt("%lld steps, gamma %.2f, max |Q - Q*| = %.3g", static_cast<long long>(res.steps), gamma, err)};
}

// 5 ------------------------------------------------------------------------

Outcome ppo_first_epoch() {
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_ratio = 0.0, worst_obj = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    agents::PpoConfig cfg;
    cfg.hidden = {16, 16};
    cfg.horizon = 64;
    cfg.minibatch = 64;
    cfg.epochs = 3;
    agents::PpoAgent agent(4, 3, cfg, rng);
    for (int t = 0; t < cfg.horizon; ++t) {
      Eigen::VectorXd s(4);
      for (auto& x : s) x = g(rng);
      const auto a = agent.act(s, rng);
      agent.record({s, a.action, a.log_prob, g(rng), a.value});
    }
    const auto st = agent.update(g(rng), rng);
    worst_ratio = std::max(worst_ratio, st.first_max_ratio_dev);
    worst_obj = std::max(worst_obj, std::abs(st.first_objective - st.first_mean_advantage));
  }
  return {worst_ratio <= 1e-6 && worst_obj <= 1e-6,
          fmt("10 updates, max |ratio - 1| = %.3g, max |objective - mean advantage| = %.3g", worst_ratio, worst_obj)};
}

// 6 and 7 ------------------------------------------------------------------

struct Training {
  ExperimentConfig config;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  fs::path out;
  std::map<Variant, std::vector<SeedSummary>> summaries;
  std::map<Variant, std::vector<double>> mean_ee;

  void ensure(Variant v) {
    if (summaries.count(v)) return;
    const auto t0 = std::chrono::steady_clock::now();
    const auto summary = run_experiment(config, v, seeds, out);
    summaries[v] = summary.seeds;
    for (auto seed : seeds) {
      const auto log = RunLog::read_csv(out / run_id(v, seed) / "log.csv");
      double sum = 0.0;
      for (const auto& r : log.steps) sum += r.ee;
      mean_ee[v].push_back(sum / static_cast<double>(log.steps.size()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  trained %s on %zu seeds in %.0f s\n", variant_tag(v).c_str(), seeds.size(), secs);
    std::fflush(stdout);
  }
};

Outcome training_smoke(Training& tr) {
  tr.ensure(Variant::Full);
  tr.ensure(Variant::Random);
  const auto& full = tr.summaries[Variant::Full];
  const auto& rnd = tr.mean_ee[Variant::Random];
  int ok = 0;
  std::ostringstream d;
  d << "desk profile, " << tr.config.train.episodes << " episodes x " << tr.config.train.steps_per_episode << " steps;";
  for (std::size_t i = 0; i < full.size(); ++i) {
    const bool improved = full[i].final_ee > full[i].first_ee;
    const bool beats = full[i].final_ee >= 1.5 * rnd[i];
    ok += improved && beats;
    d << fmt(" s%llu: first %.4g final %.4g random %.4g (x%.2f)%s;", static_cast<unsigned long long>(full[i].seed),
             full[i].first_ee, full[i].final_ee, rnd[i], full[i].final_ee / rnd[i], improved && beats ? "" : " miss");
  }
  d << fmt(" %d/5 seeds", ok);
  return {ok >= 4, d.str()};
}

Outcome ablations(Training& tr) {
  tr.ensure(Variant::Full);
  const auto& full = tr.summaries[Variant::Full];
  std::ostringstream d;
  bool pass = true;
  for (Variant v : {Variant::NoEh, Variant::NoAmp, Variant::ReflectOnly, Variant::NoSharing}) {
    tr.ensure(v);
    const auto& other = tr.summaries[v];
    int wins = 0;
    d << variant_tag(v) << " [";
    for (std::size_t i = 0; i < full.size(); ++i) {
      wins += full[i].final_ee >= other[i].final_ee;
      d << fmt("%s%.4g", i ? " " : "", other[i].final_ee);
    }
    d << fmt("] full wins %d/5; ", wins);
    pass = pass && wins >= 4;
  }
  d << "full [";
  for (std::size_t i = 0; i < full.size(); ++i) d << fmt("%s%.4g", i ? " " : "", full[i].final_ee);
  d << "]";
  return {pass, d.str()};
}

// 8 ------------------------------------------------------------------------

Outcome determinism(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.train.episodes = 5;
  std::ostringstream d;
  bool pass = true;
  const fs::path dir = fs::temp_directory_path() / "mfris_acceptance_determinism";
  for (Variant v : {Variant::Full, Variant::PureDqn, Variant::NoSharing}) {
    Run a = make_run(cfg, v, 1);
    Run b = make_run(cfg, v, 1);
    fs::remove_all(dir);
    const auto la = train(a, dir);
    const auto lb = train(b);
    const bool same = la.identical(lb) && RunLog::read_csv(dir / "log.csv").identical(la);
    Run c = make_run(cfg, v, 2);
    const bool differs = !train(c).identical(la);
    d << fmt("%s: %zu records %s, other seed %s; ", variant_tag(v).c_str(), la.steps.size(),
             same ? "bitwise identical" : "DIFFER", differs ? "differs" : "IDENTICAL");
    pass = pass && same && differs;
  }
  fs::remove_all(dir);
  return {pass, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  fs::path out = "acceptance_runs";
  fs::path config_path = fs::path(MFRIS_SOURCE_DIR) / "configs" / "desk.cfg";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else if (a == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else if (a == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else {
      std::fprintf(stderr, "usage: acceptance [--only 1,2,...] [--out dir] [--config file]\n");
      return 2;
    }
  }

  Training tr;
  tr.config = load_config(config_path);
  tr.config.train.episodes = 300;
  tr.out = out;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"physics oracles", physics_oracles},
      {"signal decomposition vs scalar expansion", signal_decomposition},
      {"analytic vs finite-difference gradients", gradient_checks},
      {"chain MDP DQN vs value iteration", chain_dqn},
      {"PPO first-epoch ratio and objective", ppo_first_epoch},
      {"training smoke vs random policy", [&] { return training_smoke(tr); }},
      {"directional ablations", [&] { return ablations(tr); }},
      {"bitwise determinism", [&] { return determinism(tr.config); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%.1f s) -- %s\n", r.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs,
                r.detail.c_str());
    std::fflush(stdout);
    failures += !r.pass;
  }
  return failures == 0 ? 0 : 1;
}
