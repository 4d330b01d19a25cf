#include "mfris/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mfris {

namespace {

using Field = double StepRecord::*;

constexpr std::pair<const char*, Field> kDoubleFields[] = {
    {"reward", &StepRecord::reward},         {"ee", &StepRecord::ee},
    {"sum_rate", &StepRecord::sum_rate},     {"p_total", &StepRecord::p_total},
    {"beam_power", &StepRecord::beam_power}, {"c1", &StepRecord::c1},
    {"c2", &StepRecord::c2},                 {"c3", &StepRecord::c3},
    {"dqn_loss", &StepRecord::dqn_loss},     {"clip_objective", &StepRecord::clip_objective},
    {"value_loss", &StepRecord::value_loss}, {"epsilon", &StepRecord::epsilon},
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

const std::vector<std::string>& RunLog::columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"episode", "step", "global_step"};
    for (const auto& [name, f] : kDoubleFields) c.emplace_back(name);
    return c;
  }();
  return cols;
}

void RunLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : steps) {
    out << r.episode << ',' << r.step << ',' << r.global_step;
    for (const auto& [name, f] : kDoubleFields) out << ',' << fmt(r.*f);
    out << '\n';
  }
}

RunLog RunLog::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  RunLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns().size()) throw std::runtime_error("malformed log row in " + path.string());
    StepRecord r;
    r.episode = std::stoi(cells[0]);
    r.step = std::stoi(cells[1]);
    r.global_step = std::stoll(cells[2]);
    std::size_t i = 3;
    for (const auto& [name, f] : kDoubleFields) r.*f = std::strtod(cells[i++].c_str(), nullptr);
    log.steps.push_back(r);
  }
  return log;
}

bool RunLog::identical(const RunLog& other) const {
  if (steps.size() != other.steps.size()) return false;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& a = steps[i];
    const auto& b = other.steps[i];
    if (a.episode != b.episode || a.step != b.step || a.global_step != b.global_step) return false;
    for (const auto& [name, f] : kDoubleFields) {
      if (std::bit_cast<std::uint64_t>(a.*f) != std::bit_cast<std::uint64_t>(b.*f)) return false;
    }
  }
  return true;
}

double RunLog::head_mean(double fraction, Field field) const {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * steps.size()));
  if (steps.empty()) throw std::runtime_error("empty run log");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += steps[i].*field;
  return s / n;
}

double RunLog::tail_mean(double fraction, Field field) const {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * steps.size()));
  if (steps.empty()) throw std::runtime_error("empty run log");
  double s = 0.0;
  for (std::size_t i = steps.size() - n; i < steps.size(); ++i) s += steps[i].*field;
  return s / n;
}

std::uint64_t episode_seed(std::uint64_t run_seed, int episode, bool evaluation) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(episode), evaluation ? 0xE7A1u : 0x7A1Bu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string run_id(Variant variant, std::uint64_t seed) { return variant_tag(variant) + "_s" + std::to_string(seed); }

Run make_run(const ExperimentConfig& config, Variant variant, std::uint64_t seed) {
  Run run;
  run.config = config;
  run.config.train.agents.ppo.horizon = config.train.steps_per_episode;
  run.variant = variant;
  run.seed = seed;
  NetworkScenario scenario = config.scenario;
  EnvOptions opts = run.config.env_options();
  opts.user_seed = seed;
  apply_variant(variant, scenario, opts);
  run.env = std::make_unique<MultiAgentEnv>(scenario, opts);
  run.controller = make_controller(variant, *run.env, run.config.train.agents, seed);
  return run;
}

namespace {

void write_metadata(const Run& run, const std::filesystem::path& dir, std::int64_t final_step) {
  nlohmann::json j;
  j["run_id"] = run_id(run.variant, run.seed);
  j["variant"] = variant_tag(run.variant);
  j["description"] = variant_description(run.variant);
  j["simplified"] = variant_is_simplified(run.variant);
  j["access"] = access_name(run.env->options().access);
  j["seed"] = run.seed;
  j["episodes"] = run.config.train.episodes;
  j["steps_per_episode"] = run.config.train.steps_per_episode;
  j["final_step"] = final_step;
  j["surface_feature_scale"] = run.env->surface_feature_scale();
  j["bs_feature_scale"] = run.env->bs_feature_scale();
  std::ofstream(dir / "run.json") << j.dump(2) << '\n';
}

}  // namespace

RunLog train(Run& run, const std::optional<std::filesystem::path>& run_dir) {
  const auto& tr = run.config.train;
  if (run_dir) {
    std::filesystem::create_directories(*run_dir);
    std::ofstream(*run_dir / "config.yaml") << echo_config(run.config);
  }
  RunLog log;
  std::int64_t global = 0;
  for (int ep = 0; ep < tr.episodes; ++ep) {
    Observation obs = run.env->reset(episode_seed(run.seed, ep));
    for (int t = 0; t < tr.steps_per_episode; ++t) {
      const JointAction a = run.controller->act(obs, false);
      StepResult res = run.env->step(a);
      const LearnStats ls = run.controller->observe(res.obs, res.reward, res.done);
      const auto& rep = res.report;
      log.steps.push_back({ep, t, global, res.reward, rep.ee, rep.sum_rate, rep.p_total, rep.beam_power,
                           rep.pen.c1, rep.pen.c2, rep.pen.c3, ls.dqn_loss, ls.clip_objective, ls.value_loss,
                           ls.epsilon});
      ++global;
      obs = std::move(res.obs);
    }
    if (run_dir && tr.checkpoint_every > 0 && (ep + 1) % tr.checkpoint_every == 0 && ep + 1 < tr.episodes) {
      save_checkpoint(run, *run_dir, global);
    }
  }
  if (run_dir) {
    log.write_csv(*run_dir / "log.csv");
    save_checkpoint(run, *run_dir, global);
    write_metadata(run, *run_dir, global);
  }
  return log;
}

EvalResult evaluate(Run& run, int episodes) {
  if (episodes <= 0) throw std::invalid_argument("evaluate: episodes must be positive");
  EvalResult r;
  for (int ep = 0; ep < episodes; ++ep) {
    Observation obs = run.env->reset(episode_seed(run.seed, ep, true));
    double sum = 0.0;
    int steps = 0;
    for (bool done = false; !done; ++steps) {
      StepResult res = run.env->step(run.controller->act(obs, true));
      sum += res.report.ee;
      done = res.done;
      obs = std::move(res.obs);
    }
    r.episode_ee.push_back(sum / steps);
  }
  for (double x : r.episode_ee) r.mean += x;
  r.mean /= episodes;
  double var = 0.0;
  for (double x : r.episode_ee) var += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(var / episodes);
  return r;
}

void save_checkpoint(const Run& run, const std::filesystem::path& run_dir, std::int64_t step) {
  for (int id = 1; id <= run.controller->num_agents(); ++id) {
    Archive ar;
    ar.put("agent_id", static_cast<std::int64_t>(id));
    ar.put("variant", variant_tag(run.variant));
    ar.put("surface_feature_scale", run.env->surface_feature_scale());
    ar.put("bs_feature_scale", run.env->bs_feature_scale());
    run.controller->save_agent(id, ar);
    const auto dir = agent_checkpoint_dir(run_dir, id, step);
    std::filesystem::create_directories(dir);
    ar.save(dir / "state.bin");
  }
}

Run load_run(const std::filesystem::path& run_dir) {
  std::ifstream meta_in(run_dir / "run.json");
  if (!meta_in) throw std::runtime_error("no run.json in " + run_dir.string());
  const auto meta = nlohmann::json::parse(meta_in);
  const ExperimentConfig cfg = load_config(run_dir / "config.yaml");
  Run run = make_run(cfg, parse_variant(meta.at("variant").get<std::string>()), meta.at("seed").get<std::uint64_t>());
  for (int id = 1; id <= run.controller->num_agents(); ++id) {
    const Archive ar = Archive::load(latest_agent_checkpoint(run_dir, id) / "state.bin");
    if (ar.text("variant") != variant_tag(run.variant) || ar.integer("agent_id") != id) {
      throw std::runtime_error("checkpoint does not belong to this run");
    }
    if (ar.scalar("surface_feature_scale") != run.env->surface_feature_scale() ||
        ar.scalar("bs_feature_scale") != run.env->bs_feature_scale()) {
      throw std::runtime_error("checkpoint feature normalization differs from the rebuilt environment");
    }
    run.controller->load_agent(id, ar);
  }
  return run;
}

}  // namespace mfris
