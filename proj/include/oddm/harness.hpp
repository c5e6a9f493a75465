#pragma once

#include <optional>
#include <string>

#include "oddm/channel.hpp"
#include "oddm/ddmatrix.hpp"
#include "oddm/detector.hpp"
#include "oddm/modem.hpp"
#include "oddm/params.hpp"
#include "oddm/pulse.hpp"

namespace oddm {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for a binomial proportion (z = 1.96 ~ 95%).
WilsonInterval wilson(long successes, long trials, double z = 1.96);

struct BerPoint {
  double snr_db = 0.0;
  long bit_errors = 0;
  long bits = 0;
  double ber = 0.0;
  double ci_half = 0.0;  // Wilson interval half-width
  WilsonInterval ci;
};

enum class ChannelKind { random_ongrid, eva, file };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::random_ongrid;
  int n_paths = 4;
  int L = 4;
  int K = 2;
  double speed_kmh = 120.0;
  double fc_hz = 5e9;
  std::string path;  // for ChannelKind::file
};

DdChannel draw_channel(const ChannelSpec& spec, const GridParams& p, std::uint64_t seed);

struct ExperimentSpec {
  enum class Kind { ortho, psd, ber, matrix_check, loopback };
  Kind kind = Kind::loopback;
  SimConfig cfg;
  ChannelSpec channel;
  std::vector<double> snrs_db;
  int trials = 1;
  std::uint64_t seed = 1;
  std::string out_dir;    // empty: no files written
  int psd_frames = 100;
  bool with_mmse = false;
  int threads = 0;        // 0: hardware concurrency; results are identical
                          // for every thread count
  MpConfig mp;
};

struct PsdResult {
  VecXd freq_hz;
  VecXd oddm_db;   // normalized to equal in-band power with otfs_db
  VecXd otfs_db;
  double fs = 0.0;
  double half_band_hz = 0.0;
  // Mean linear-PSD gap (OTFS - ODDM, in dB) around +-fnorm * half-band;
  // the smaller of the two sides.
  double gap_db_at(double fnorm) const;
};

PsdResult run_psd(const ExperimentSpec& spec);

struct BerCurve {
  std::string scheme;
  std::vector<BerPoint> points;
};

struct BerResult {
  std::vector<BerCurve> curves;
  const BerCurve* find(const std::string& scheme) const;
};

BerResult run_ber(const ExperimentSpec& spec);

struct OrthoResult {
  AuditReport report;
};

OrthoResult run_ortho(const ExperimentSpec& spec);

struct MatrixCheckResult {
  double max_err = 0.0;          // waveform pipeline vs H*x, infinity norm
  double dense_sparse_err = 0.0; // dense product vs sparse matvec
};

MatrixCheckResult run_matrix_check(const ExperimentSpec& spec);

struct LoopbackResult {
  double max_err = 0.0;  // max |Y - X| over the frame
};

LoopbackResult run_loopback(const ExperimentSpec& spec);

// Runs every experiment in order, one CSV per experiment plus a manifest
// with a config echo and an FNV-1a content hash of the inputs. Returns 0
// when all succeed; partial artifacts are kept on failure.
int run_all(const std::vector<ExperimentSpec>& specs, const std::string& out_dir);

std::uint64_t fnv1a(const std::string& data);

}  // namespace oddm
