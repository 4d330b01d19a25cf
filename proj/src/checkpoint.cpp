#include "mfris/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfris {

namespace {

constexpr char kMagic[8] = {'M', 'F', 'R', 'I', 'S', 'C', 'K', '\0'};

template <typename T>
void write_pod(std::string& out, const T& v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Cursor {
 public:
  explicit Cursor(const std::string& s) : s_(s) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw std::runtime_error("checkpoint: truncated archive");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

void Archive::put_ints(const std::string& key, const std::vector<int>& v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) d[static_cast<Eigen::Index>(i)] = v[i];
  put(key, d);
}

void Archive::put_rng(const std::string& key, const Rng& rng) {
  std::ostringstream os;
  os << rng;
  put(key, os.str());
}

const Archive::Value& Archive::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw std::runtime_error("checkpoint: missing key '" + key + "'");
  return it->second;
}

double Archive::scalar(const std::string& key) const {
  const auto* v = std::get_if<double>(&at(key));
  if (!v) throw std::runtime_error("checkpoint: '" + key + "' is not a scalar");
  return *v;
}

std::int64_t Archive::integer(const std::string& key) const {
  const auto* v = std::get_if<std::int64_t>(&at(key));
  if (!v) throw std::runtime_error("checkpoint: '" + key + "' is not an integer");
  return *v;
}

const std::string& Archive::text(const std::string& key) const {
  const auto* v = std::get_if<std::string>(&at(key));
  if (!v) throw std::runtime_error("checkpoint: '" + key + "' is not a string");
  return *v;
}

const Eigen::VectorXd& Archive::vec(const std::string& key) const {
  const auto* v = std::get_if<Eigen::VectorXd>(&at(key));
  if (!v) throw std::runtime_error("checkpoint: '" + key + "' is not a vector");
  return *v;
}

std::vector<int> Archive::ints(const std::string& key) const {
  const auto& d = vec(key);
  std::vector<int> out(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(d[i]);
  return out;
}

void Archive::get_rng(const std::string& key, Rng& rng) const {
  std::istringstream is(text(key));
  is >> rng;
  if (!is) throw std::runtime_error("checkpoint: bad rng state in '" + key + "'");
}

std::string Archive::serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(entries_.size()));
  for (const auto& [key, value] : entries_) {
    write_pod(out, static_cast<std::uint32_t>(key.size()));
    out += key;
    const auto tag = static_cast<std::uint8_t>(value.index());
    write_pod(out, tag);
    std::visit(
        [&out](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::int64_t>) {
            write_pod(out, v);
          } else if constexpr (std::is_same_v<T, std::string>) {
            write_pod(out, static_cast<std::uint64_t>(v.size()));
            out += v;
          } else {
            write_pod(out, static_cast<std::uint64_t>(v.size()));
            out.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * static_cast<std::size_t>(v.size()));
          }
        },
        value);
  }
  return out;
}

Archive Archive::deserialize(const std::string& bytes) {
  Cursor c(bytes);
  if (c.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto version = c.pod<std::uint32_t>();
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  Archive a;
  const auto count = c.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto klen = c.pod<std::uint32_t>();
    std::string key = c.bytes(klen);
    switch (c.pod<std::uint8_t>()) {
      case 0: a.entries_[key] = c.pod<double>(); break;
      case 1: a.entries_[key] = c.pod<std::int64_t>(); break;
      case 2: {
        const auto n = c.pod<std::uint64_t>();
        a.entries_[key] = c.bytes(n);
        break;
      }
      case 3: {
        const auto n = c.pod<std::uint64_t>();
        const std::string raw = c.bytes(n * sizeof(double));
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        std::memcpy(v.data(), raw.data(), raw.size());
        a.entries_[key] = std::move(v);
        break;
      }
      default: throw std::runtime_error("checkpoint: unknown entry tag");
    }
  }
  if (!c.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return a;
}

void Archive::save(const std::filesystem::path& path) const {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot write " + path.string());
  const std::string bytes = serialize();
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Archive Archive::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize(ss.str());
}

std::filesystem::path agent_checkpoint_dir(const std::filesystem::path& run_dir, int agent_id, std::int64_t step) {
  return run_dir / ("agent_" + std::to_string(agent_id)) / ("step_" + std::to_string(step));
}

std::filesystem::path latest_agent_checkpoint(const std::filesystem::path& run_dir, int agent_id) {
  const auto dir = run_dir / ("agent_" + std::to_string(agent_id));
  std::int64_t best = -1;
  std::filesystem::path best_path;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("step_", 0) != 0) continue;
      const std::int64_t step = std::stoll(name.substr(5));
      if (step > best) {
        best = step;
        best_path = e.path();
      }
    }
  }
  if (best < 0) throw std::runtime_error("checkpoint: no step directory under " + dir.string());
  return best_path;
}

}  // namespace mfris
