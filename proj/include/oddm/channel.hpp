#pragma once

#include <random>
#include <string>

#include "oddm/modem.hpp"
#include "oddm/params.hpp"

namespace oddm {

/// One on-grid path: delay tau = l*T/M, Doppler nu = k/(NT).
struct DdPath {
  cxd h;
  int l = 0;  // 0 <= l <= L-1
  int k = 0;  // -K <= k <= K
};

/// On-grid delay-Doppler channel. G is the (2K+1) x L spreading matrix with
/// g(r, l) at Doppler row r (khat = r - K) and delay column l; the paths
/// list is its sparse view, so duplicate (l, k) entries merge and P equals
/// the number of nonzeros of G.
struct DdChannel {
  std::vector<DdPath> paths;
  int L = 0;
  int K = 0;
  MatXcd G;

  int P() const { return static_cast<int>(paths.size()); }
  double power() const;  // sum |h_p|^2
};

// Canonicalizes a path list into a DdChannel; throws when a path is off
// grid (l outside [0, L) or |k| > K).
DdChannel make_channel(const std::vector<DdPath>& paths, int L, int K);

struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();  // Es*sum|h|^2 / N0
  std::uint64_t seed = 0;
};

// N0 implied by the SNR definition (Es = 1 for unit-energy constellations).
double noise_n0(const DdChannel& ch, double snr_db);

// y(t) = sum_p h_p x_cp(t - l_p T/M) e^{j2pi k_p (t - l_p T/M)/(NT)} + z(t),
// spanning -(L+Q-1)T/M <= t <= NT+(L+Q-1)T/M. Delays are exact integer
// sample shifts of l_p*J. Throws when a path delay exceeds the CP the
// waveform was built with. White noise has per-sample variance N0/dt so the
// demodulated DD-domain noise variance is N0.
Waveform apply(const Waveform& x_cp, const DdChannel& ch, const NoiseSpec& noise,
               const GridParams& p);

// Statistical channel: standard 9-tap EVA power-delay profile quantized to
// the T/M grid, per-path Rayleigh gains, Jakes Dopplers
// nu_p = nu_max cos(theta_p) with theta_p uniform on [-pi, pi], quantized to
// the 1/(NT) grid. K is set to round(nu_max * NT). Throws when the EVA delay
// span exceeds the configured CP (L-1 = cp_len).
DdChannel eva_jakes(const GridParams& p, double speed_kmh, double fc_hz,
                    std::uint64_t seed);

double jakes_nu_max(double speed_kmh, double fc_hz);

// Random on-grid channel with n_paths distinct (l, k) pairs, unit total
// average power; used by equivalence tests and desk-scale BER sweeps.
DdChannel random_channel(int n_paths, int L, int K, std::uint64_t seed);

// CSV rows "l,k,re,im".
void save_channel(const std::string& path, const DdChannel& ch);
DdChannel load_channel(const std::string& path, int L, int K);

}  // namespace oddm
