#include "mfris/curves.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "mfris/trainer.hpp"

namespace mfris {

std::vector<double> moving_average(std::span<const double> x, int window) {
  if (window <= 0) throw std::invalid_argument("moving_average: window must be positive");
  if (x.empty()) throw std::invalid_argument("moving_average: empty series");
  const auto w = std::min<std::size_t>(static_cast<std::size_t>(window), x.size());
  std::vector<double> out;
  out.reserve(x.size() - w + 1);
  // Direct sums keep each point independent of rounding drift.
  for (std::size_t i = 0; i + w <= x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = i; j < i + w; ++j) s += x[j];
    out.push_back(s / static_cast<double>(w));
  }
  return out;
}

namespace {

struct Curve {
  std::vector<double> reward;
  std::vector<double> ee;
};

void write_curve(const std::filesystem::path& path, const Curve& c, std::size_t first_index) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "index,reward_ma,ee_ma\n";
  char buf[96];
  for (std::size_t i = 0; i < c.reward.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", first_index + i, c.reward[i],
                  c.ee[i]);
    out << buf;
  }
}

}  // namespace

std::vector<std::filesystem::path> emit_curves(const std::filesystem::path& in_dir, int window) {
  namespace fs = std::filesystem;
  std::vector<fs::path> runs;
  for (const auto& e : fs::directory_iterator(in_dir)) {
    if (e.is_directory() && fs::exists(e.path() / "log.csv") && fs::exists(e.path() / "run.json")) {
      runs.push_back(e.path());
    }
  }
  if (runs.empty()) throw std::runtime_error("no run logs below " + in_dir.string());
  std::sort(runs.begin(), runs.end());

  const fs::path out_dir = in_dir / "curves";
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  std::map<std::string, std::vector<Curve>> by_variant;
  std::size_t first_index = 0;  // step index of the first averaged point
  for (const auto& dir : runs) {
    const RunLog log = RunLog::read_csv(dir / "log.csv");
    if (log.steps.empty()) throw std::runtime_error("empty run log: " + dir.string());
    std::ifstream meta_in(dir / "run.json");
    const auto meta = nlohmann::json::parse(meta_in);
    std::vector<double> reward, ee;
    for (const auto& r : log.steps) {
      reward.push_back(r.reward);
      ee.push_back(r.ee);
    }
    Curve c{moving_average(reward, window), moving_average(ee, window)};
    first_index = reward.size() - c.reward.size();
    const auto path = out_dir / (dir.filename().string() + ".csv");
    write_curve(path, c, first_index);
    written.push_back(path);
    by_variant[meta.at("variant").get<std::string>()].push_back(std::move(c));
  }
  for (const auto& [variant, curves] : by_variant) {
    std::size_t len = curves.front().reward.size();
    for (const auto& c : curves) len = std::min(len, c.reward.size());
    Curve mean{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < len; ++i) {
        mean.reward[i] += c.reward[i] / curves.size();
        mean.ee[i] += c.ee[i] / curves.size();
      }
    }
    const auto path = out_dir / ("variant_" + variant + ".csv");
    write_curve(path, mean, first_index);
    written.push_back(path);
  }
  return written;
}

}  // namespace mfris
