#include "oddm/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace oddm {

void validate(const GridParams& p) {
  if (p.M <= 0 || p.N <= 0 || p.Q <= 0 || p.J <= 0 || p.T <= 0.0) {
    throw std::invalid_argument("GridParams: all of M, N, T, Q, J must be positive");
  }
  if (p.cp_len < 0) {
    throw std::invalid_argument("GridParams: cp_len must be non-negative");
  }
  if (2 * p.Q >= p.M) {
    throw std::invalid_argument("GridParams: require 2Q < M");
  }
}

ResolutionReport derive(const GridParams& p) {
  validate(p);
  ResolutionReport r;
  r.delay_res = p.T / p.M;
  r.doppler_res = 1.0 / (p.N * p.T);
  r.frame_duration = p.N * p.T;
  r.bandwidth = p.M / p.T;
  r.sample_rate = static_cast<double>(p.M) * p.J / p.T;
  r.samples_frame = static_cast<long>(p.J) * p.M * p.N;
  r.samples_tails = static_cast<long>(p.J) * (static_cast<long>(p.M) * p.N + 2 * p.Q);
  r.samples_cp_tails =
      static_cast<long>(p.J) * (static_cast<long>(p.M) * p.N + p.cp_len + 2 * p.Q);
  return r;
}

QamConstellation::QamConstellation(int order) : order_(order) {
  if (order < 4 || (order & (order - 1)) != 0) {
    throw std::invalid_argument("QamConstellation: order must be a power of two >= 4");
  }
  bits_ = 0;
  while ((1 << bits_) < order) ++bits_;
  if (bits_ % 2 != 0) {
    throw std::invalid_argument("QamConstellation: order must be a square (4, 16, 64, ...)");
  }
  const int half = bits_ / 2;
  const int K = 1 << half;
  // PAM levels -(K-1), ..., -1, 1, ..., K-1 scaled to unit average energy
  // over the full 2-D constellation.
  const double d = std::sqrt(3.0 / (2.0 * (static_cast<double>(K) * K - 1.0)));
  std::vector<double> level_of_label(K);
  for (int i = 0; i < K; ++i) {
    const int gray = i ^ (i >> 1);
    level_of_label[gray] = (2 * i - (K - 1)) * d;
  }
  points_.resize(order);
  for (int s = 0; s < order; ++s) {
    const int li = s >> half;
    const int lq = s & (K - 1);
    points_[s] = cxd(level_of_label[li], level_of_label[lq]);
  }
}

int QamConstellation::slice(cxd v) const {
  int best = 0;
  double best_d2 = std::norm(v - points_[0]);
  for (int s = 1; s < order_; ++s) {
    const double d2 = std::norm(v - points_[s]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = s;
    }
  }
  return best;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string config_to_string(const SimConfig& cfg) {
  std::ostringstream os;
  os << "M=" << cfg.grid.M << "\n";
  os << "N=" << cfg.grid.N << "\n";
  os << "scs_hz=" << fmt_double(cfg.scs_hz) << "\n";
  os << "Q=" << cfg.grid.Q << "\n";
  os << "rolloff=" << fmt_double(cfg.rolloff) << "\n";
  os << "J=" << cfg.grid.J << "\n";
  os << "cp_len=" << cfg.grid.cp_len << "\n";
  os << "qam_order=" << cfg.qam_order << "\n";
  os << "seed=" << cfg.seed << "\n";
  return os.str();
}

SimConfig config_from_string(const std::string& text) {
  SimConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::map<std::string, std::string> kv;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: malformed line: " + line);
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  auto geti = [&](const std::string& k, int def) {
    auto it = kv.find(k);
    return it == kv.end() ? def : std::stoi(it->second);
  };
  auto getd = [&](const std::string& k, double def) {
    auto it = kv.find(k);
    return it == kv.end() ? def : std::stod(it->second);
  };
  cfg.grid.M = geti("M", cfg.grid.M);
  cfg.grid.N = geti("N", cfg.grid.N);
  cfg.scs_hz = getd("scs_hz", cfg.scs_hz);
  cfg.grid.T = 1.0 / cfg.scs_hz;
  cfg.grid.Q = geti("Q", cfg.grid.Q);
  cfg.rolloff = getd("rolloff", cfg.rolloff);
  cfg.grid.J = geti("J", cfg.grid.J);
  cfg.grid.cp_len = geti("cp_len", cfg.grid.cp_len);
  cfg.qam_order = geti("qam_order", cfg.qam_order);
  if (auto it = kv.find("seed"); it != kv.end()) {
    cfg.seed = std::stoull(it->second);
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return config_from_string(ss.str());
}

void save_config(const std::string& path, const SimConfig& cfg) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("config: cannot write " + path);
  f << config_to_string(cfg);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace oddm
