#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mfris/types.hpp"

namespace mfris {

/// Tagged binary key/value archive. Doubles are stored as raw IEEE-754 bytes
/// so that a save/load round trip is bit-exact.
///
/// Layout: "MFRISCK\0", u32 version, u64 entry count, then per entry
/// u32 key length, key bytes, u8 tag, payload.
class Archive {
 public:
  static constexpr std::uint32_t kVersion = 1;

  using Value = std::variant<double, std::int64_t, std::string, Eigen::VectorXd>;

  void put(const std::string& key, double v) { entries_[key] = v; }
  void put(const std::string& key, std::int64_t v) { entries_[key] = v; }
  void put(const std::string& key, const std::string& v) { entries_[key] = v; }
  void put(const std::string& key, const Eigen::VectorXd& v) { entries_[key] = v; }
  void put_ints(const std::string& key, const std::vector<int>& v);
  void put_rng(const std::string& key, const Rng& rng);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  double scalar(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  const Eigen::VectorXd& vec(const std::string& key) const;
  std::vector<int> ints(const std::string& key) const;
  void get_rng(const std::string& key, Rng& rng) const;

  std::string serialize() const;
  static Archive deserialize(const std::string& bytes);

  void save(const std::filesystem::path& path) const;
  static Archive load(const std::filesystem::path& path);

  std::size_t size() const { return entries_.size(); }

 private:
  const Value& at(const std::string& key) const;
  std::map<std::string, Value> entries_;
};

/// `<run_dir>/agent_<id>/step_<n>`
std::filesystem::path agent_checkpoint_dir(const std::filesystem::path& run_dir, int agent_id, std::int64_t step);
/// Highest step directory below `<run_dir>/agent_<id>`; throws if none.
std::filesystem::path latest_agent_checkpoint(const std::filesystem::path& run_dir, int agent_id);

}  // namespace mfris
