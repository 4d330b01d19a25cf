#include "mfris/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

namespace mfris {

void TrainConfig::validate() const {
  if (episodes <= 0 || steps_per_episode <= 0) throw std::invalid_argument("train: counts must be positive");
  if (seeds.empty()) throw std::invalid_argument("train: at least one seed required");
  if (eval_episodes <= 0 || checkpoint_every < 0) throw std::invalid_argument("train: bad eval/checkpoint counts");
  const auto& p = agents.ppo;
  const auto& d = agents.dqn;
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(p.lr_actor) || !unit(p.lr_critic) || !unit(d.lr) || !unit(p.gamma) || !unit(d.gamma) ||
      !unit(p.lambda) || !unit(d.tau)) {
    throw std::invalid_argument("train: rates and discounts must lie in [0, 1]");
  }
  if (!(p.clip > 0.0 && p.clip < 1.0)) throw std::invalid_argument("train: clip ratio must be in (0, 1)");
  if (p.epochs <= 0 || p.minibatch <= 0 || d.batch <= 0 || d.warmup < 0 || d.capacity == 0) {
    throw std::invalid_argument("train: positive batch sizes required");
  }
  if (!(d.eps.eps_min >= 0.0 && d.eps.eps_min <= d.eps.eps_max && d.eps.eps_max <= 1.0)) {
    throw std::invalid_argument("train: need 0 <= eps_min <= eps_max <= 1");
  }
}

EnvOptions ExperimentConfig::env_options() const {
  EnvOptions o;
  o.horizon = train.steps_per_episode;
  o.fixed_users = train.fixed_users;
  o.freeze_fading = train.freeze_fading;
  o.weights = train.weights;
  return o;
}

namespace {

// Reads keys from one YAML map and rejects anything left unread.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_ || node_.IsNull()) node_.reset(YAML::Node(YAML::NodeType::Map));
    if (!node_.IsMap()) throw std::invalid_argument("config: " + path_ + " must be a map");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0 || !node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw std::invalid_argument("config: unknown key " + path_ + "." + key);
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_[key]) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw std::invalid_argument("config: bad value for " + path_ + "." + key);
    }
  }
  void get_db(const char* key, double& linear) {
    if (has(key)) linear = db_to_linear(value<double>(key));
  }
  void get_dbm(const char* key, double& watts) {
    if (has(key)) watts = dbm_to_watts(value<double>(key));
  }
  void get_milli(const char* key, double& si) {
    if (has(key)) si = value<double>(key) * 1e-3;
  }
  void get_vec3(const char* key, Vec3& v) {
    if (!has(key)) return;
    const auto xs = value<std::vector<double>>(key);
    if (xs.size() != 3) throw std::invalid_argument("config: " + path_ + "." + key + " needs 3 entries");
    v = {xs[0], xs[1], xs[2]};
  }
  Section sub(const char* key) {
    seen_.insert(key);
    const YAML::Node& n = node_;
    return Section(n[key] ? n[key] : YAML::Node(YAML::NodeType::Map), path_ + "." + key);
  }
  bool has(const char* key) {
    seen_.insert(key);
    return node_ && node_[key];
  }
  template <typename T>
  T value(const char* key) {
    T out{};
    get(key, out);
    return out;
  }
  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_hidden(Section& s, std::vector<int>& hidden) {
  if (!s.has("hidden")) return;
  hidden = s.value<std::vector<int>>("hidden");
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("config: hidden layer sizes must be positive");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  {
    Section top(root, "config");
    {
      Section s = top.sub("scenario");
      auto& sc = cfg.scenario;
      s.get_vec3("bs_position_m", sc.bs_position);
      if (s.has("user_centers_m")) {
        const auto groups = s.value<std::vector<std::vector<std::vector<double>>>>("user_centers_m");
        sc.user_centers.clear();
        for (const auto& g : groups) {
          std::vector<Vec3> dir;
          for (const auto& c : g) {
            if (c.size() != 3) throw std::invalid_argument("config: user centers need 3 coordinates");
            dir.emplace_back(c[0], c[1], c[2]);
          }
          sc.user_centers.push_back(std::move(dir));
        }
      }
      s.get("user_drop_radius_m", sc.user_drop_radius);
      s.get("antennas", sc.antennas);
      s.get("surfaces", sc.surfaces);
      s.get("elements_h", sc.elements_h);
      s.get("elements_v", sc.elements_v);
      s.get_db("h0_db", sc.h0);
      s.get("k0", sc.k0);
      s.get_db("beta0_db", sc.beta0);
      s.get("element_spacing_ratio", sc.element_spacing_ratio);
      s.get("antenna_spacing_ratio", sc.antenna_spacing_ratio);
      s.get_dbm("sigma_s2_dbm", sc.sigma_s2);
      s.get_dbm("sigma_u2_dbm", sc.sigma_u2);
      s.get_vec3("w_min_m", sc.deploy_min);
      s.get_vec3("w_max_m", sc.deploy_max);
      s.get_dbm("p_bs_max_dbm", sc.p_bs_max);
      s.get("beta_max", sc.beta_max);
      s.get("rate_min_bps_hz", sc.rate_min);
      {
        Section e = s.sub("eh");
        e.get_milli("z_mw", sc.eh.max_harvest);
        e.get("varpi1", sc.eh.steepness);
        e.get("varpi2", sc.eh.midpoint);
      }
      {
        Section p = s.sub("power");
        p.get_milli("p_pin_mw", sc.power.p_pin);
        p.get_milli("p_c_mw", sc.power.p_conv);
        p.get("xi", sc.power.xi);
        p.get("l_alpha", sc.power.levels_alpha);
        p.get("l_beta", sc.power.levels_beta);
        p.get("l_theta", sc.power.levels_theta);
      }
    }
    {
      Section t = top.sub("train");
      auto& tr = cfg.train;
      t.get("episodes", tr.episodes);
      t.get("steps_per_episode", tr.steps_per_episode);
      t.get("seeds", tr.seeds);
      t.get("fixed_users", tr.fixed_users);
      t.get("freeze_fading", tr.freeze_fading);
      t.get("eval_episodes", tr.eval_episodes);
      t.get("checkpoint_every", tr.checkpoint_every);
      t.get("rho1", tr.weights.rho1);
      t.get("rho2", tr.weights.rho2);
      t.get("rho3", tr.weights.rho3);
      {
        Section p = t.sub("ppo");
        auto& c = tr.agents.ppo;
        p.get("lr_actor", c.lr_actor);
        p.get("lr_critic", c.lr_critic);
        p.get("gamma", c.gamma);
        p.get("lambda", c.lambda);
        p.get("clip", c.clip);
        p.get("epochs", c.epochs);
        p.get("minibatch", c.minibatch);
        p.get("init_log_std", c.init_log_std);
        p.get("entropy_coef", c.entropy_coef);
        p.get("policy_output_scale", c.policy_output_scale);
        read_hidden(p, c.hidden);
      }
      {
        Section d = t.sub("dqn");
        auto& c = tr.agents.dqn;
        d.get("lr", c.lr);
        d.get("gamma", c.gamma);
        d.get("tau", c.tau);
        d.get("buffer", c.capacity);
        d.get("batch", c.batch);
        d.get("warmup", c.warmup);
        d.get("eps_max", c.eps.eps_max);
        d.get("eps_min", c.eps.eps_min);
        d.get("eps_decay", c.eps.decay_steps);
        read_hidden(d, c.hidden);
      }
    }
  }
  cfg.train.agents.ppo.horizon = cfg.train.steps_per_episode;
  cfg.scenario.validate();
  cfg.train.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

// Value in the file's unit that converts back to exactly `x`, searched a few
// ulps around the direct conversion.
template <typename To, typename From>
double exact_unit(double x, To to_unit, From from_unit) {
  const double guess = to_unit(x);
  double lo = guess, hi = guess;
  for (int i = 0; i < 64; ++i) {
    if (from_unit(lo) == x) return lo;
    if (from_unit(hi) == x) return hi;
    lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  }
  return guess;
}

double echo_db(double x) { return exact_unit(x, linear_to_db, db_to_linear); }
double echo_dbm(double x) { return exact_unit(x, watts_to_dbm, dbm_to_watts); }
double echo_milli(double x) {
  return exact_unit(x, [](double v) { return v * 1e3; }, [](double v) { return v * 1e-3; });
}

YAML::Node vec3_node(const Vec3& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (int i = 0; i < 3; ++i) n.push_back(v[i]);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

YAML::Node flow(const std::vector<int>& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (int x : v) n.push_back(x);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

}  // namespace

std::string echo_config(const ExperimentConfig& cfg) {
  const auto& sc = cfg.scenario;
  const auto& tr = cfg.train;
  YAML::Node root;
  YAML::Node s = root["scenario"];
  s["bs_position_m"] = vec3_node(sc.bs_position);
  YAML::Node centers(YAML::NodeType::Sequence);
  for (const auto& dir : sc.user_centers) {
    YAML::Node g(YAML::NodeType::Sequence);
    for (const auto& c : dir) g.push_back(vec3_node(c));
    g.SetStyle(YAML::EmitterStyle::Flow);
    centers.push_back(g);
  }
  s["user_centers_m"] = centers;
  s["user_drop_radius_m"] = sc.user_drop_radius;
  s["antennas"] = sc.antennas;
  s["surfaces"] = sc.surfaces;
  s["elements_h"] = sc.elements_h;
  s["elements_v"] = sc.elements_v;
  s["h0_db"] = echo_db(sc.h0);
  s["k0"] = sc.k0;
  s["beta0_db"] = echo_db(sc.beta0);
  s["element_spacing_ratio"] = sc.element_spacing_ratio;
  s["antenna_spacing_ratio"] = sc.antenna_spacing_ratio;
  s["sigma_s2_dbm"] = echo_dbm(sc.sigma_s2);
  s["sigma_u2_dbm"] = echo_dbm(sc.sigma_u2);
  s["w_min_m"] = vec3_node(sc.deploy_min);
  s["w_max_m"] = vec3_node(sc.deploy_max);
  s["p_bs_max_dbm"] = echo_dbm(sc.p_bs_max);
  s["beta_max"] = sc.beta_max;
  s["rate_min_bps_hz"] = sc.rate_min;
  s["eh"]["z_mw"] = echo_milli(sc.eh.max_harvest);
  s["eh"]["varpi1"] = sc.eh.steepness;
  s["eh"]["varpi2"] = sc.eh.midpoint;
  s["power"]["p_pin_mw"] = echo_milli(sc.power.p_pin);
  s["power"]["p_c_mw"] = echo_milli(sc.power.p_conv);
  s["power"]["xi"] = sc.power.xi;
  s["power"]["l_alpha"] = sc.power.levels_alpha;
  s["power"]["l_beta"] = sc.power.levels_beta;
  s["power"]["l_theta"] = sc.power.levels_theta;

  YAML::Node t = root["train"];
  t["episodes"] = tr.episodes;
  t["steps_per_episode"] = tr.steps_per_episode;
  YAML::Node seeds(YAML::NodeType::Sequence);
  for (auto x : tr.seeds) seeds.push_back(x);
  seeds.SetStyle(YAML::EmitterStyle::Flow);
  t["seeds"] = seeds;
  t["fixed_users"] = tr.fixed_users;
  t["freeze_fading"] = tr.freeze_fading;
  t["eval_episodes"] = tr.eval_episodes;
  t["checkpoint_every"] = tr.checkpoint_every;
  t["rho1"] = tr.weights.rho1;
  t["rho2"] = tr.weights.rho2;
  t["rho3"] = tr.weights.rho3;
  const auto& p = tr.agents.ppo;
  YAML::Node pn = t["ppo"];
  pn["lr_actor"] = p.lr_actor;
  pn["lr_critic"] = p.lr_critic;
  pn["gamma"] = p.gamma;
  pn["lambda"] = p.lambda;
  pn["clip"] = p.clip;
  pn["epochs"] = p.epochs;
  pn["minibatch"] = p.minibatch;
  pn["init_log_std"] = p.init_log_std;
  pn["entropy_coef"] = p.entropy_coef;
  pn["policy_output_scale"] = p.policy_output_scale;
  pn["hidden"] = flow(p.hidden);
  const auto& d = tr.agents.dqn;
  YAML::Node dn = t["dqn"];
  dn["lr"] = d.lr;
  dn["gamma"] = d.gamma;
  dn["tau"] = d.tau;
  dn["buffer"] = d.capacity;
  dn["batch"] = d.batch;
  dn["warmup"] = d.warmup;
  dn["eps_max"] = d.eps.eps_max;
  dn["eps_min"] = d.eps.eps_min;
  dn["eps_decay"] = d.eps.decay_steps;
  dn["hidden"] = flow(d.hidden);

  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mfris
