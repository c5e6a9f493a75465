#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oddm {

using cxd = std::complex<double>;
using VecXd = Eigen::VectorXd;
using VecXcd = Eigen::VectorXcd;
using MatXcd = Eigen::MatrixXcd;

/// Frame geometry and sampling conventions shared by every module.
/// Delay axis has M bins of T/M; Doppler axis has N bins of 1/(NT).
/// "Analog" waveforms are emulated at rate M*J/T, i.e. J samples per T/M.
struct GridParams {
  int M = 0;          // ODDM symbols per frame / delay bins
  int N = 0;          // subcarriers per symbol / Doppler bins
  double T = 0.0;     // reference symbol period in seconds (1/T = scs)
  int Q = 0;          // half-length of a(t) in units of T/M
  int J = 1;          // oversampling: emulation samples per T/M
  int cp_len = 0;     // CP length L-1 in units of T/M

  double delay_res() const { return T / M; }
  double doppler_res() const { return 1.0 / (N * T); }
  double sample_rate() const { return static_cast<double>(M) * J / T; }
  double dt() const { return T / (static_cast<double>(M) * J); }
};

// Throws std::invalid_argument unless all fields are positive, cp_len >= 0,
// and 2Q < M.
void validate(const GridParams& p);

struct ResolutionReport {
  double delay_res = 0.0;
  double doppler_res = 0.0;
  double frame_duration = 0.0;   // NT, no CP or tails
  double bandwidth = 0.0;        // M/T
  double sample_rate = 0.0;      // M*J/T
  long samples_frame = 0;        // J*M*N, no CP, no tails
  long samples_tails = 0;        // J*(M*N + 2Q)
  long samples_cp_tails = 0;     // J*(M*N + (L-1) + 2Q)
};

ResolutionReport derive(const GridParams& p);

/// Unit-average-energy square QAM with per-axis Gray labels.
/// Symbol value s packs [I bits | Q bits]; point(s) is indexed by label.
class QamConstellation {
 public:
  explicit QamConstellation(int order);

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_; }
  const std::vector<cxd>& points() const { return points_; }
  cxd point(int sym) const { return points_[sym]; }

  // Nearest-point hard decision; ties break toward the lowest symbol value.
  int slice(cxd v) const;

  // Bit b (0 = MSB) of symbol sym.
  static int bit_of(int sym, int b, int bits) {
    return (sym >> (bits - 1 - b)) & 1;
  }

 private:
  int order_ = 0;
  int bits_ = 0;
  std::vector<cxd> points_;
};

/// Full simulation configuration: grid + pulse + constellation + seed.
/// Maps 1:1 onto the plain-text key=value config format.
struct SimConfig {
  GridParams grid;
  double scs_hz = 15000.0;  // 1/T as given in the config
  double rolloff = 0.25;
  int qam_order = 4;
  std::uint64_t seed = 1;
};

SimConfig load_config(const std::string& path);
void save_config(const std::string& path, const SimConfig& cfg);
std::string config_to_string(const SimConfig& cfg);
SimConfig config_from_string(const std::string& text);

// splitmix64; used to derive independent per-trial seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace oddm
