#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mfris/chain_mdp.hpp"
#include "mfris/controllers.hpp"
#include "mfris/trainer.hpp"

using namespace mfris;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(int episodes = 2, int steps = 10) {
  ExperimentConfig c;
  c.scenario = NetworkScenario::desk_defaults();
  c.train.episodes = episodes;
  c.train.steps_per_episode = steps;
  c.train.agents.ppo.hidden = {8};
  c.train.agents.ppo.minibatch = 4;
  c.train.agents.ppo.epochs = 2;
  c.train.agents.dqn.hidden = {8};
  c.train.agents.dqn.batch = 4;
  c.train.agents.dqn.warmup = 8;
  c.train.agents.dqn.capacity = 1000;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mfris_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("smoke run emits one record per step with every field") {
  Run run = make_run(tiny_config(), Variant::Full, 1);
  const auto log = train(run);
  REQUIRE(log.steps.size() == 20);
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    CHECK(log.steps[i].global_step == static_cast<std::int64_t>(i));
    CHECK(log.steps[i].episode == static_cast<int>(i / 10));
    CHECK(log.steps[i].step == static_cast<int>(i % 10));
  }
  // DQN updates start after the 8-sample warmup; PPO updates close each episode.
  CHECK(std::isnan(log.steps[0].dqn_loss));
  CHECK(std::isfinite(log.steps[10].dqn_loss));
  CHECK(std::isfinite(log.steps[9].clip_objective));
  CHECK(std::isnan(log.steps[8].clip_objective));
  CHECK(std::isfinite(log.steps[19].value_loss));
  CHECK(log.steps[5].epsilon < 1.0);
}

TEST_CASE("identical seeds give bitwise identical logs") {
  for (Variant v : {Variant::Full, Variant::PureDqn, Variant::Random, Variant::Sdma}) {
    Run a = make_run(tiny_config(), v, 3);
    Run b = make_run(tiny_config(), v, 3);
    CHECK(train(a).identical(train(b)));
  }
  Run a = make_run(tiny_config(), Variant::Full, 3);
  Run c = make_run(tiny_config(), Variant::Full, 4);
  CHECK_FALSE(train(a).identical(train(c)));
}

TEST_CASE("training never changes the scenario constants") {
  Run run = make_run(tiny_config(), Variant::Full, 2);
  const NetworkScenario before = run.env->scenario();
  train(run);
  const auto& after = run.env->scenario();
  CHECK(after.h0 == before.h0);
  CHECK(after.p_bs_max == before.p_bs_max);
  CHECK(after.antennas == before.antennas);
  CHECK(after.deploy_max == before.deploy_max);
}

TEST_CASE("random controller without updates reproduces the environment's own statistics") {
  Run run = make_run(tiny_config(1, 50), Variant::Random, 9);
  const auto log = train(run);
  // Replay the same actions directly through a fresh environment.
  MultiAgentEnv env(run.env->scenario(), run.env->options());
  RandomController ctl(env, 9);
  auto obs = env.reset(episode_seed(9, 0));
  for (int t = 0; t < 50; ++t) {
    const auto r = env.step(ctl.act(obs, false));
    CHECK(r.reward == log.steps[t].reward);
    obs = r.obs;
  }
}

TEST_CASE("run log CSV round trip") {
  Run run = make_run(tiny_config(), Variant::Full, 5);
  const auto log = train(run);
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  log.write_csv(dir / "log.csv");
  CHECK(RunLog::read_csv(dir / "log.csv").identical(log));
  fs::remove_all(dir);
}

TEST_CASE("head and tail means") {
  RunLog log;
  for (int i = 0; i < 20; ++i) {
    StepRecord r;
    r.ee = i;
    log.steps.push_back(r);
  }
  CHECK(log.head_mean(0.1, &StepRecord::ee) == 0.5);
  CHECK(log.tail_mean(0.1, &StepRecord::ee) == 18.5);
}

TEST_CASE("evaluation statistics") {
  Run run = make_run(tiny_config(), Variant::Full, 6);
  const auto one = evaluate(run, 1);
  CHECK(one.std == 0.0);
  CHECK(one.episode_ee.size() == 1);
  const auto three = evaluate(run, 3);
  CHECK(three.episode_ee.size() == 3);
  CHECK(three.mean > 0.0);
  CHECK_THROWS(evaluate(run, 0));
}

TEST_CASE("fresh agents evaluate like the untrained mean policy") {
  Run a = make_run(tiny_config(), Variant::Full, 7);
  Run b = make_run(tiny_config(), Variant::Full, 7);
  CHECK(evaluate(a, 2).mean == evaluate(b, 2).mean);
}

TEST_CASE("checkpoint round trip preserves evaluation exactly") {
  const auto dir = scratch("ckpt");
  for (Variant v : {Variant::Full, Variant::PureDqn, Variant::NoEh, Variant::PurePpo}) {
    Run run = make_run(tiny_config(), v, 8);
    const auto run_dir = dir / run_id(v, 8);
    train(run, run_dir);
    CHECK(fs::exists(run_dir / "config.yaml"));
    CHECK(fs::exists(run_dir / "run.json"));
    CHECK(fs::exists(run_dir / "log.csv"));
    for (int id = 1; id <= 3; ++id) CHECK(fs::exists(agent_checkpoint_dir(run_dir, id, 20) / "state.bin"));
    const double in_memory = evaluate(run, 2).mean;
    Run loaded = load_run(run_dir);
    CHECK(evaluate(loaded, 2).mean == in_memory);
  }
  fs::remove_all(dir);
}

TEST_CASE("checkpoints from another variant are rejected") {
  const auto dir = scratch("mismatch");
  Run run = make_run(tiny_config(), Variant::Full, 1);
  train(run, dir);
  Run other = make_run(tiny_config(), Variant::PureDqn, 1);
  const Archive ar = Archive::load(latest_agent_checkpoint(dir, 1) / "state.bin");
  CHECK_THROWS(other.controller->load_agent(1, ar));
  fs::remove_all(dir);
}

TEST_CASE("periodic checkpoints") {
  auto cfg = tiny_config(4, 5);
  cfg.train.checkpoint_every = 2;
  const auto dir = scratch("periodic");
  Run run = make_run(cfg, Variant::Full, 1);
  train(run, dir);
  CHECK(fs::exists(agent_checkpoint_dir(dir, 3, 10)));
  CHECK(fs::exists(agent_checkpoint_dir(dir, 3, 20)));
  CHECK(latest_agent_checkpoint(dir, 3) == agent_checkpoint_dir(dir, 3, 20));
  fs::remove_all(dir);
}

TEST_CASE("hybrid controller wiring") {
  auto cfg = tiny_config();
  MultiAgentEnv env(cfg.scenario, cfg.env_options());
  LearningController ctl(env, cfg.train.agents, 1, LearningController::SurfaceMode::Hybrid, true);
  const int m = env.scenario().elements();
  CHECK(ctl.ppo(0).state_dim() == env.surface_state_dim() + m);
  CHECK(ctl.ppo(0).action_dim() == env.surface_raw_dim());
  CHECK(ctl.dqn(0)->num_heads() == m);
  CHECK(ctl.bs_ppo().state_dim() == env.bs_state_dim());
  CHECK(ctl.num_agents() == 3);

  const auto obs = env.reset(1);
  CHECK(std::all_of(ctl.prev_alpha(0).begin(), ctl.prev_alpha(0).end(), [](auto a) { return a == 1; }));
  const auto first_state = ctl.ppo_state(0, obs.surface[0]);
  CHECK((first_state.tail(m).array() == 1.0).all());
  const auto a = ctl.act(obs, false);
  // The next PPO state carries the modes just chosen.
  CHECK(ctl.prev_alpha(0) == a.surfaces[0].alpha);

  LearningController no_share(env, cfg.train.agents, 1, LearningController::SurfaceMode::Hybrid, false);
  CHECK(no_share.ppo(0).state_dim() == env.surface_state_dim());
  LearningController relaxed(env, cfg.train.agents, 1, LearningController::SurfaceMode::RelaxedAlpha, false);
  CHECK(relaxed.ppo(0).action_dim() == env.surface_raw_dim() + m);
  CHECK(relaxed.dqn(0) == nullptr);
}

TEST_CASE("deterministic acting with frozen nets differs only through sampling") {
  auto cfg = tiny_config();
  cfg.train.agents.dqn.eps = {0.0, 0.0, 1e4};
  MultiAgentEnv env(cfg.scenario, cfg.env_options());
  LearningController ctl(env, cfg.train.agents, 2, LearningController::SurfaceMode::Hybrid, true);
  const auto obs = env.reset(3);
  const auto a1 = ctl.act(obs, false);
  const auto a2 = ctl.act(obs, false);
  CHECK(a1.surfaces[0].alpha == a2.surfaces[0].alpha);
  CHECK(a1.bs_raw != a2.bs_raw);
  const auto d1 = ctl.act(obs, true);
  const auto d2 = ctl.act(obs, true);
  CHECK(d1.bs_raw == d2.bs_raw);
}

TEST_CASE("quantized controller maps levels onto the feasible set") {
  auto cfg = tiny_config();
  MultiAgentEnv env(cfg.scenario, cfg.env_options());
  QuantizedDqnController ctl(env, cfg.train.agents, 1);
  const auto& s = env.scenario();
  const auto heads = ctl.surface_heads();
  CHECK(heads.size() == static_cast<std::size_t>(s.elements() + 2 * s.directions() * s.elements() + 1));
  std::vector<int> choice(heads.size(), 0);
  for (std::size_t i = 0; i < heads.size(); ++i) choice[i] = heads[i] - 1;
  const auto raw = ctl.surface_raw(choice);
  const std::vector<std::uint8_t> alpha(s.elements(), 1);
  const auto c = project_surface_action(s, alpha, raw);
  CHECK(c.beta(0, 0) == doctest::Approx(s.beta_max * 0.95));
  CHECK(c.theta(1, 2) == doctest::Approx(kTwoPi * 7.5 / 8.0));

  std::vector<int> bs_choice(ctl.bs_heads().size(), 0);
  const auto bs_lo = project_bs_action(s, ctl.bs_raw(bs_choice));
  for (auto& x : bs_choice) x = 9;
  for (std::size_t i = s.total_users(); i < s.total_users() + s.directions() * s.antennas; ++i) bs_choice[i] = 0;
  const auto bs_hi = project_bs_action(s, ctl.bs_raw(bs_choice));
  CHECK(bs_lo.beam_power() == doctest::Approx(s.p_bs_max * 1e-4));
  CHECK(bs_hi.beam_power() == doctest::Approx(s.p_bs_max));
}

TEST_CASE("random controller covers the projected ranges") {
  auto cfg = tiny_config();
  MultiAgentEnv env(cfg.scenario, cfg.env_options());
  RandomController ctl(env, 4);
  const auto obs = env.reset(1);
  double beta_sum = 0.0;
  int ones = 0, n = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto a = ctl.act(obs, false);
    const auto c = project_surface_action(env.scenario(), a.surfaces[0].alpha, a.surfaces[0].raw);
    beta_sum += c.beta.mean();
    for (auto b : c.alpha) ones += b, ++n;
  }
  CHECK(beta_sum / 2000 == doctest::Approx(env.scenario().beta_max / 2).epsilon(0.02));
  CHECK(static_cast<double>(ones) / n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("episode seeds separate training and evaluation streams") {
  CHECK(episode_seed(1, 0) != episode_seed(1, 1));
  CHECK(episode_seed(1, 0) != episode_seed(2, 0));
  CHECK(episode_seed(1, 0) != episode_seed(1, 0, true));
  CHECK(episode_seed(1, 5) == episode_seed(1, 5));
}

TEST_CASE("greedy DQN trained on the chain reaches the goal optimally") {
  agents::DqnConfig cfg;
  cfg.hidden = {32};
  cfg.gamma = 0.9;
  cfg.eps = {1.0, 1.0, 1e4};
  cfg.warmup = 100;
  cfg.batch = 32;
  cfg.capacity = 10000;
  const auto res = train_chain_dqn(cfg, 6000, 1);
  CHECK(chain_greedy_return(res.agent, 0, 0.9) == doctest::Approx(std::pow(0.9, 3)));
}
