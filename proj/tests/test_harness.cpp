#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "oddm/harness.hpp"

using namespace oddm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string tmp_dir(const std::string& tag) {
  auto d = std::filesystem::temp_directory_path() / ("oddm_harness_" + tag);
  std::filesystem::remove_all(d);
  return d.string();
}

SimConfig desk_cfg(int M, int N, int Q, int J, int cp) {
  SimConfig cfg;
  cfg.scs_hz = 15000.0;
  cfg.grid = {M, N, 1.0 / 15000.0, Q, J, cp};
  cfg.rolloff = 0.25;
  cfg.qam_order = 4;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("Wilson interval at frozen reference values") {
  // k=5, n=50, z=1.96
  const WilsonInterval w = wilson(5, 50);
  CHECK(w.lo == doctest::Approx(0.04347512399157111).epsilon(1e-9));
  CHECK(w.hi == doctest::Approx(0.2136049033478839).epsilon(1e-9));
  // degenerate cases
  const WilsonInterval z = wilson(0, 100);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
  CHECK(z.hi < 0.05);
  const WilsonInterval o = wilson(100, 100);
  CHECK(o.hi >= 1.0 - 1e-12);
  CHECK(o.lo > 0.95);
}

TEST_CASE("ber = bit_errors / bits and interval brackets it") {
  ExperimentSpec spec;
  spec.cfg = desk_cfg(16, 8, 1, 2, 3);
  spec.kind = ExperimentSpec::Kind::ber;
  spec.snrs_db = {8.0};
  spec.trials = 4;
  spec.channel = {ChannelKind::random_ongrid, 4, 4, 2, 0, 0, ""};
  const BerResult res = run_ber(spec);
  for (const BerCurve& c : res.curves) {
    for (const BerPoint& bp : c.points) {
      CHECK(bp.ber == doctest::Approx(double(bp.bit_errors) / bp.bits).epsilon(1e-12));
      CHECK(bp.ci.lo <= bp.ber);
      CHECK(bp.ber <= bp.ci.hi);
      CHECK(bp.bits == 4L * 16 * 8 * 2);
    }
  }
}

TEST_CASE("noiseless BER point is zero for both schemes") {
  ExperimentSpec spec;
  spec.cfg = desk_cfg(16, 8, 1, 2, 3);
  spec.snrs_db = {std::numeric_limits<double>::infinity()};
  spec.trials = 3;
  spec.channel = {ChannelKind::random_ongrid, 4, 4, 2, 0, 0, ""};
  const BerResult res = run_ber(spec);
  CHECK(res.find("oddm-mp")->points[0].bit_errors == 0);
  CHECK(res.find("otfs-mp")->points[0].bit_errors == 0);
}

TEST_CASE("identical seeds give byte-identical CSVs across thread counts") {
  ExperimentSpec spec;
  spec.cfg = desk_cfg(16, 8, 1, 2, 3);
  spec.snrs_db = {6.0, 10.0};
  spec.trials = 6;
  spec.channel = {ChannelKind::random_ongrid, 4, 4, 2, 0, 0, ""};
  const std::string d1 = tmp_dir("det1"), d2 = tmp_dir("det2");
  spec.out_dir = d1;
  spec.threads = 1;
  run_ber(spec);
  spec.out_dir = d2;
  spec.threads = 3;
  run_ber(spec);
  CHECK(slurp(d1 + "/ber.csv") == slurp(d2 + "/ber.csv"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("PSD refuses J < 4") {
  ExperimentSpec spec;
  spec.cfg = desk_cfg(16, 8, 2, 2, 0);
  spec.psd_frames = 4;
  CHECK_THROWS_AS(run_psd(spec), std::invalid_argument);
}

TEST_CASE("single-tone frame peaks at its subcarrier offset (mod 1/T)") {
  // one loaded subcarrier yields a comb at n0/(NT) + k/T under the
  // prototype envelope; the peak tooth must sit at the subcarrier offset
  // within the comb period
  GridParams p{16, 8, 1.0, 2, 8, 0};
  const PulseTrain u = build_train(design_srrc(p, 0.25), p);
  const int n0 = 3;
  DdFrame X = DdFrame::Zero(p.M, p.N);
  X(4, n0) = 1.0;
  const Waveform x = modulate(X, u, p);
  Eigen::FFT<double> fft;
  std::vector<cxd> in(x.samples.data(), x.samples.data() + x.size()), out;
  fft.fwd(out, in);
  long best = 0;
  double bv = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::norm(out[i]) > bv) {
      bv = std::norm(out[i]);
      best = static_cast<long>(i);
    }
  }
  const double fres = 1.0 / (x.size() * x.dt);
  double fpeak = best * fres;
  if (best >= static_cast<long>(out.size()) / 2) fpeak -= 1.0 / x.dt;
  const double want = n0 / (p.N * p.T);
  double d = fpeak - want;
  d -= std::round(d * p.T) / p.T;  // circular distance within the comb period
  CHECK(std::abs(d) <= 1.5 * fres);
}

TEST_CASE("doubling J leaves the in-band PSD unchanged within 0.1 dB") {
  ExperimentSpec spec;
  spec.cfg = desk_cfg(32, 8, 4, 4, 0);
  spec.psd_frames = 32;
  spec.seed = 5;
  const PsdResult r4 = run_psd(spec);
  spec.cfg.grid.J = 8;
  const PsdResult r8 = run_psd(spec);
  // same 1/(NT) bin spacing; compare the central 80% of the band
  const long n4 = r4.freq_hz.size();
  double worst = 0.0;
  for (long i = 0; i < n4; ++i) {
    const double f = r4.freq_hz[i];
    if (std::abs(f) > 0.8 * r4.half_band_hz) continue;
    // locate the same frequency bin in the J=8 grid
    const long j = static_cast<long>(std::llround(f / (r8.fs / r8.freq_hz.size()))) +
                   r8.freq_hz.size() / 2;
    REQUIRE(j >= 0);
    REQUIRE(j < r8.freq_hz.size());
    worst = std::max(worst, std::abs(r4.oddm_db[i] - r8.oddm_db[j]));
  }
  CHECK(worst < 0.1);
}

TEST_CASE("ODDM out-of-band sits well below OTFS at desk scale") {
  ExperimentSpec spec;
  spec.cfg = desk_cfg(64, 16, 8, 4, 0);
  spec.psd_frames = 40;
  const PsdResult res = run_psd(spec);
  CHECK(res.gap_db_at(1.3) > 10.0);
}

TEST_CASE("draw_channel from file matches the saved channel") {
  const DdChannel ch = random_channel(4, 4, 2, 3);
  const std::string path =
      (std::filesystem::temp_directory_path() / "oddm_draw.csv").string();
  save_channel(path, ch);
  ChannelSpec spec;
  spec.kind = ChannelKind::file;
  spec.path = path;
  spec.L = 4;
  spec.K = 2;
  GridParams p{16, 8, 1.0, 2, 2, 3};
  const DdChannel back = draw_channel(spec, p, 9);
  CHECK(back.P() == ch.P());
  std::filesystem::remove(path);
}

TEST_CASE("run_all: empty list succeeds with a manifest") {
  const std::string dir = tmp_dir("all_empty");
  CHECK(run_all({}, dir) == 0);
  CHECK(std::filesystem::exists(dir + "/manifest.txt"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_all: ortho and matrix-check at desk scale") {
  ExperimentSpec ortho;
  ortho.kind = ExperimentSpec::Kind::ortho;
  ortho.cfg = desk_cfg(16, 8, 2, 8, 0);
  ExperimentSpec mc;
  mc.kind = ExperimentSpec::Kind::matrix_check;
  mc.cfg = desk_cfg(16, 8, 1, 8, 3);
  mc.channel = {ChannelKind::random_ongrid, 4, 4, 0, 0, 0, ""};
  const std::string dir = tmp_dir("all_two");
  CHECK(run_all({ortho, mc}, dir) == 0);
  CHECK(std::filesystem::exists(dir + "/0_ortho/ortho.csv"));
  CHECK(std::filesystem::exists(dir + "/1_matrix-check/matrix_check.csv"));
  const std::string manifest = slurp(dir + "/manifest.txt");
  CHECK(manifest.find("status=ok") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_all: a failing experiment yields nonzero status, artifacts kept") {
  ExperimentSpec good;
  good.kind = ExperimentSpec::Kind::loopback;
  good.cfg = desk_cfg(16, 8, 1, 4, 0);
  ExperimentSpec bad;
  bad.kind = ExperimentSpec::Kind::psd;
  bad.cfg = desk_cfg(16, 8, 2, 2, 0);  // J < 4 refused
  const std::string dir = tmp_dir("all_fail");
  CHECK(run_all({good, bad}, dir) != 0);
  CHECK(std::filesystem::exists(dir + "/0_loopback/loopback.txt"));
  const std::string manifest = slurp(dir + "/manifest.txt");
  CHECK(manifest.find("status=failed") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest is deterministic across reruns") {
  ExperimentSpec lb;
  lb.kind = ExperimentSpec::Kind::loopback;
  lb.cfg = desk_cfg(16, 8, 1, 4, 0);
  const std::string d1 = tmp_dir("man1"), d2 = tmp_dir("man2");
  run_all({lb}, d1);
  run_all({lb}, d2);
  CHECK(slurp(d1 + "/manifest.txt") == slurp(d2 + "/manifest.txt"));
  CHECK(slurp(d1 + "/0_loopback/waveform.csv") == slurp(d2 + "/0_loopback/waveform.csv"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("fnv1a is stable") {
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("a") == 12638187200555641996ULL);
  CHECK(fnv1a("abc") != fnv1a("abd"));
}
