#include "oddm/channel.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace oddm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;

// 3GPP Extended Vehicular A profile (delays in ns, powers in dB).
constexpr double kEvaDelaysNs[] = {0, 30, 150, 310, 370, 710, 1090, 1730, 2510};
constexpr double kEvaPowersDb[] = {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9};
constexpr int kEvaTaps = 9;

}  // namespace

double DdChannel::power() const {
  double s = 0.0;
  for (const DdPath& p : paths) s += std::norm(p.h);
  return s;
}

DdChannel make_channel(const std::vector<DdPath>& paths, int L, int K) {
  if (L < 1 || K < 0) throw std::invalid_argument("make_channel: need L >= 1, K >= 0");
  DdChannel ch;
  ch.L = L;
  ch.K = K;
  ch.G = MatXcd::Zero(2 * K + 1, L);
  for (const DdPath& p : paths) {
    if (p.l < 0 || p.l >= L) {
      throw std::invalid_argument("make_channel: path delay index outside [0, L)");
    }
    if (std::abs(p.k) > K) {
      throw std::invalid_argument("make_channel: path Doppler index outside [-K, K]");
    }
    ch.G(p.k + K, p.l) += p.h;
  }
  for (int r = 0; r < 2 * K + 1; ++r) {
    for (int l = 0; l < L; ++l) {
      if (ch.G(r, l) != cxd(0.0, 0.0)) {
        ch.paths.push_back({ch.G(r, l), l, r - K});
      }
    }
  }
  return ch;
}

double noise_n0(const DdChannel& ch, double snr_db) {
  if (std::isinf(snr_db)) return 0.0;
  return ch.power() / std::pow(10.0, snr_db / 10.0);
}

Waveform apply(const Waveform& x_cp, const DdChannel& ch, const NoiseSpec& noise,
               const GridParams& p) {
  const long J = p.J;
  const long Lm1 = ch.L - 1;
  long max_l = 0;
  for (const DdPath& path : ch.paths) {
    if (path.l > p.cp_len) {
      throw std::invalid_argument("apply: path delay exceeds the CP length");
    }
    max_l = std::max(max_l, static_cast<long>(path.l));
  }
  if (x_cp.start > -(max_l + p.Q) * J) {
    throw std::invalid_argument("apply: waveform CP does not cover the path delays");
  }

  Waveform y;
  y.dt = p.dt();
  y.start = -(Lm1 + p.Q) * J;
  const long end = static_cast<long>(p.N) * p.M * J + (Lm1 + p.Q) * J;
  y.samples = VecXcd::Zero(end - y.start + 1);

  for (const DdPath& path : ch.paths) {
    const long shift = static_cast<long>(path.l) * J;
    // e^{j2pi k (t - l T/M)/(NT)} per sample: (t - l T/M)/(NT) = (i - lJ)/(NMJ)
    const double w = 2.0 * kPi * path.k / (static_cast<double>(p.N) * p.M * J);
    const long lo = std::max(y.start, x_cp.start + shift);
    const long hi = std::min(y.start + y.size() - 1, x_cp.start + x_cp.size() - 1 + shift);
    for (long i = lo; i <= hi; ++i) {
      y.samples[i - y.start] +=
          path.h * x_cp.samples[i - shift - x_cp.start] * std::polar(1.0, w * (i - shift));
    }
  }

  const double n0 = noise_n0(ch, noise.snr_db);
  if (n0 > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(n0 / y.dt / 2.0));
    for (long i = 0; i < y.size(); ++i) {
      y.samples[i] += cxd(gauss(rng), gauss(rng));
    }
  }
  return y;
}

double jakes_nu_max(double speed_kmh, double fc_hz) {
  return (speed_kmh / 3.6) * fc_hz / kSpeedOfLight;
}

DdChannel eva_jakes(const GridParams& p, double speed_kmh, double fc_hz,
                    std::uint64_t seed) {
  if (speed_kmh < 0.0) throw std::invalid_argument("eva_jakes: speed must be >= 0");
  validate(p);
  const double ts = p.delay_res();
  const double nt = p.N * p.T;
  const double nu_max = jakes_nu_max(speed_kmh, fc_hz);
  const int K = static_cast<int>(std::lround(nu_max * nt));

  double total = 0.0;
  double powers[kEvaTaps];
  for (int i = 0; i < kEvaTaps; ++i) {
    powers[i] = std::pow(10.0, kEvaPowersDb[i] / 10.0);
    total += powers[i];
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-kPi, kPi);
  std::vector<DdPath> paths;
  int max_l = 0;
  for (int i = 0; i < kEvaTaps; ++i) {
    const int l = static_cast<int>(std::lround(kEvaDelaysNs[i] * 1e-9 / ts));
    if (l > p.cp_len) {
      throw std::invalid_argument("eva_jakes: EVA delay span exceeds configured CP");
    }
    max_l = std::max(max_l, l);
    const double sigma = std::sqrt(powers[i] / total / 2.0);
    const cxd h(sigma * gauss(rng), sigma * gauss(rng));
    const double nu = nu_max * std::cos(uni(rng));
    const int k = static_cast<int>(std::lround(nu * nt));
    paths.push_back({h, l, k});
  }
  return make_channel(paths, p.cp_len + 1, std::max(K, 0));
}

DdChannel random_channel(int n_paths, int L, int K, std::uint64_t seed) {
  if (n_paths < 1 || n_paths > L * (2 * K + 1)) {
    throw std::invalid_argument("random_channel: n_paths outside [1, L*(2K+1)]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_l(0, L - 1);
  std::uniform_int_distribution<int> pick_k(-K, K);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::map<std::pair<int, int>, bool> used;
  std::vector<DdPath> paths;
  const double sigma = std::sqrt(1.0 / (2.0 * n_paths));
  while (static_cast<int>(paths.size()) < n_paths) {
    const int l = pick_l(rng);
    const int k = pick_k(rng);
    if (used[{l, k}]) continue;
    used[{l, k}] = true;
    paths.push_back({cxd(sigma * gauss(rng), sigma * gauss(rng)), l, k});
  }
  return make_channel(paths, L, K);
}

void save_channel(const std::string& path, const DdChannel& ch) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_channel: cannot write " + path);
  f << "l,k,re,im\n";
  char buf[128];
  for (const DdPath& p : ch.paths) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", p.l, p.k, p.h.real(),
                  p.h.imag());
    f << buf;
  }
}

DdChannel load_channel(const std::string& path, int L, int K) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_channel: cannot open " + path);
  std::vector<DdPath> paths;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == 'l' || line[0] == '#') continue;
    std::istringstream is(line);
    std::string tok;
    double v[4] = {0, 0, 0, 0};
    for (int i = 0; i < 4 && std::getline(is, tok, ','); ++i) v[i] = std::stod(tok);
    paths.push_back({cxd(v[2], v[3]), static_cast<int>(v[0]), static_cast<int>(v[1])});
  }
  return make_channel(paths, L, K);
}

}  // namespace oddm
