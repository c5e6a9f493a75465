#include "oddm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/FFT>

namespace oddm {

namespace {

constexpr double kPi = std::numbers::pi;

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

DdFrame random_frame(const GridParams& p, const QamConstellation& cons,
                     std::mt19937_64& rng, std::vector<int>* labels = nullptr) {
  std::uniform_int_distribution<int> pick(0, cons.order() - 1);
  DdFrame X(p.M, p.N);
  if (labels) labels->resize(static_cast<std::size_t>(p.M) * p.N);
  for (int m = 0; m < p.M; ++m) {
    for (int n = 0; n < p.N; ++n) {
      const int s = pick(rng);
      X(m, n) = cons.point(s);
      if (labels) (*labels)[static_cast<std::size_t>(m) * p.N + n] = s;
    }
  }
  return X;
}

// Hann-windowed Welch periodogram in density units (power per Hz), segment
// length seg, 50% overlap, fftshifted output.
VecXd welch_psd(const VecXcd& stream, long seg, double fs) {
  Eigen::FFT<double> fft;
  VecXd win(seg);
  for (long i = 0; i < seg; ++i) {
    win[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (seg - 1)));
  }
  const double wnorm = win.squaredNorm();
  VecXd acc = VecXd::Zero(seg);
  long count = 0;
  std::vector<cxd> buf(seg), out(seg);
  for (long off = 0; off + seg <= stream.size(); off += seg / 2) {
    for (long i = 0; i < seg; ++i) buf[i] = stream[off + i] * win[i];
    fft.fwd(out, buf);
    for (long i = 0; i < seg; ++i) acc[i] += std::norm(out[i]);
    ++count;
  }
  if (count == 0) throw std::runtime_error("welch_psd: stream shorter than one segment");
  acc /= (count * wnorm * fs);
  VecXd shifted(seg);
  const long half = seg / 2;
  for (long i = 0; i < seg; ++i) shifted[i] = acc[(i + half) % seg];
  return shifted;
}

void write_csv_header(std::ofstream& f, const std::string& header) {
  f << header << "\n";
}

}  // namespace

WilsonInterval wilson(long successes, long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

DdChannel draw_channel(const ChannelSpec& spec, const GridParams& p, std::uint64_t seed) {
  switch (spec.kind) {
    case ChannelKind::random_ongrid:
      return random_channel(spec.n_paths, spec.L, spec.K, seed);
    case ChannelKind::eva:
      return eva_jakes(p, spec.speed_kmh, spec.fc_hz, seed);
    case ChannelKind::file:
      return load_channel(spec.path, spec.L, spec.K);
  }
  throw std::logic_error("draw_channel: unknown kind");
}

double PsdResult::gap_db_at(double fnorm) const {
  auto band_mean = [&](double lo, double hi, const VecXd& psd_db) {
    double acc = 0.0;
    long cnt = 0;
    for (long i = 0; i < freq_hz.size(); ++i) {
      const double fn = freq_hz[i] / half_band_hz;
      if (fn >= lo && fn <= hi) {
        acc += std::pow(10.0, psd_db[i] / 10.0);
        ++cnt;
      }
    }
    return cnt ? acc / cnt : 0.0;
  };
  const double w = 0.02;
  double gap_pos = 10.0 * std::log10(band_mean(fnorm - w, fnorm + w, otfs_db) /
                                     band_mean(fnorm - w, fnorm + w, oddm_db));
  double gap_neg = 10.0 * std::log10(band_mean(-fnorm - w, -fnorm + w, otfs_db) /
                                     band_mean(-fnorm - w, -fnorm + w, oddm_db));
  return std::min(gap_pos, gap_neg);
}

PsdResult run_psd(const ExperimentSpec& spec) {
  const GridParams& p = spec.cfg.grid;
  validate(p);
  if (p.J < 4) {
    throw std::invalid_argument("run_psd: J >= 4 required for meaningful OOB content");
  }
  const QamConstellation cons(spec.cfg.qam_order);
  const ProtoPulse proto = design_srrc(p, spec.cfg.rolloff);
  const PulseTrain train = build_train(proto, p, false);

  const long frame = static_cast<long>(p.N) * p.M * p.J;
  const long QJ = static_cast<long>(p.Q) * p.J;
  const int nframes = std::max(spec.psd_frames, 1);

  // physically contiguous transmission: frame k starts at t = k*NT
  VecXcd oddm_stream = VecXcd::Zero(nframes * frame + 2 * QJ + 1);
  VecXcd otfs_stream = VecXcd::Zero(nframes * frame);
  for (int k = 0; k < nframes; ++k) {
    std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(k)));
    const DdFrame X = random_frame(p, cons, rng);
    const Waveform xo = modulate(X, train, p);
    oddm_stream.segment(k * frame + (xo.start + QJ), xo.size()) += xo.samples;
    const Waveform xr = otfs_modulate(X, p, false);
    otfs_stream.segment(k * frame, xr.size()) = xr.samples;
  }

  PsdResult res;
  res.fs = p.sample_rate();
  res.half_band_hz = 0.5 * p.M / p.T;
  VecXd psd_oddm = welch_psd(oddm_stream, frame, res.fs);
  VecXd psd_otfs = welch_psd(otfs_stream, frame, res.fs);
  res.freq_hz.resize(frame);
  for (long i = 0; i < frame; ++i) {
    res.freq_hz[i] = (static_cast<double>(i) - frame / 2) * res.fs / frame;
  }
  // equal mean in-band power before comparison
  double band_oddm = 0.0, band_otfs = 0.0;
  long cnt = 0;
  for (long i = 0; i < frame; ++i) {
    if (std::abs(res.freq_hz[i]) <= res.half_band_hz) {
      band_oddm += psd_oddm[i];
      band_otfs += psd_otfs[i];
      ++cnt;
    }
  }
  psd_otfs *= band_oddm / band_otfs;
  res.oddm_db.resize(frame);
  res.otfs_db.resize(frame);
  for (long i = 0; i < frame; ++i) {
    res.oddm_db[i] = 10.0 * std::log10(std::max(psd_oddm[i], 1e-300));
    res.otfs_db[i] = 10.0 * std::log10(std::max(psd_otfs[i], 1e-300));
  }

  if (!spec.out_dir.empty()) {
    ensure_dir(spec.out_dir);
    std::ofstream f(join_path(spec.out_dir, "psd.csv"));
    write_csv_header(f, "# spectrum centered at baseband (fftshift)");
    write_csv_header(f, "frequency_hz,psd_oddm_db,psd_otfs_db");
    char buf[160];
    for (long i = 0; i < frame; ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.6f,%.6f\n", res.freq_hz[i],
                    res.oddm_db[i], res.otfs_db[i]);
      f << buf;
    }
  }
  return res;
}

namespace {

// digital-domain channel for the OTFS baseline: cyclic shifts plus
// per-sample Doppler phases on the MN-sequence.
VecXcd apply_digital(const VecXcd& s, const DdChannel& ch) {
  const long MN = s.size();
  VecXcd r = VecXcd::Zero(MN);
  for (const DdPath& path : ch.paths) {
    const double w = 2.0 * kPi * path.k / static_cast<double>(MN);
    for (long q = 0; q < MN; ++q) {
      const long src = ((q - path.l) % MN + MN) % MN;
      r[q] += path.h * s[src] * std::polar(1.0, w * static_cast<double>(q - path.l));
    }
  }
  return r;
}

struct TrialCounts {
  long oddm_errs = 0;
  long otfs_errs = 0;
  long mmse_errs = 0;
  long bits = 0;
};

}  // namespace

const BerCurve* BerResult::find(const std::string& scheme) const {
  for (const auto& c : curves) {
    if (c.scheme == scheme) return &c;
  }
  return nullptr;
}

BerResult run_ber(const ExperimentSpec& spec) {
  const GridParams& p = spec.cfg.grid;
  validate(p);
  if (spec.snrs_db.empty()) throw std::invalid_argument("run_ber: SNR list is empty");
  if (spec.trials < 1) throw std::invalid_argument("run_ber: trials must be >= 1");
  const QamConstellation cons(spec.cfg.qam_order);
  const ProtoPulse proto = design_srrc(p, spec.cfg.rolloff);
  const PulseTrain train_cp = build_train(proto, p, true);
  const PulseTrain train = build_train(proto, p, false);
  const int bits_sym = cons.bits_per_symbol();
  const long MN = static_cast<long>(p.M) * p.N;

  BerResult res;
  res.curves.push_back({"oddm-mp", {}});
  res.curves.push_back({"otfs-mp", {}});
  if (spec.with_mmse) res.curves.push_back({"oddm-mmse", {}});

  for (std::size_t pi = 0; pi < spec.snrs_db.size(); ++pi) {
    const double snr = spec.snrs_db[pi];
    std::vector<TrialCounts> counts(spec.trials);

    auto do_trial = [&](int t) {
      const std::uint64_t base =
          mix_seed(spec.seed, (static_cast<std::uint64_t>(pi) << 32) |
                                  static_cast<std::uint64_t>(t));
      std::mt19937_64 bits_rng(mix_seed(base, 1));
      const DdChannel ch = draw_channel(spec.channel, p, mix_seed(base, 2));
      const double n0 = noise_n0(ch, snr);
      std::vector<int> tx;
      const DdFrame X = random_frame(p, cons, bits_rng, &tx);
      const DdChannelMatrix H = build(ch, p);

      TrialCounts& tc = counts[t];
      tc.bits = MN * bits_sym;

      // ODDM: waveform pipeline with matched filtering
      const Waveform xcp = modulate(X, train_cp, p);
      const Waveform y = apply(xcp, ch, {snr, mix_seed(base, 3)}, p);
      const DdFrame Y = demodulate(y, train, p);
      const DetectionResult det = mp_detect(vectorize(Y), H, cons, n0, spec.mp);
      for (long i = 0; i < MN; ++i) {
        tc.oddm_errs += std::popcount(static_cast<unsigned>(tx[i] ^ det.hard_index[i]));
      }

      // OTFS baseline: same digital sequence through the digital channel,
      // equal DD-domain noise variance
      VecXcd r = apply_digital(digital_sequence(X, p), ch);
      if (n0 > 0.0) {
        std::mt19937_64 nrng(mix_seed(base, 4));
        std::normal_distribution<double> g(0.0, std::sqrt(n0 / 2.0));
        for (long q = 0; q < MN; ++q) r[q] += cxd(g(nrng), g(nrng));
      }
      const DdFrame Yo = digital_demap(r, p);
      const DetectionResult deto = mp_detect(vectorize(Yo), H, cons, n0, spec.mp);
      for (long i = 0; i < MN; ++i) {
        tc.otfs_errs += std::popcount(static_cast<unsigned>(tx[i] ^ deto.hard_index[i]));
      }

      if (spec.with_mmse) {
        const DetectionResult detm = mmse_detect(vectorize(Y), H, cons, n0);
        for (long i = 0; i < MN; ++i) {
          tc.mmse_errs += std::popcount(static_cast<unsigned>(tx[i] ^ detm.hard_index[i]));
        }
      }
    };

    // trials are independent seeded units; thread count does not change
    // the aggregate
    const unsigned hw = std::thread::hardware_concurrency();
    const int nthreads =
        spec.threads > 0 ? spec.threads
                         : static_cast<int>(std::max(1u, std::min<unsigned>(hw, 8)));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int t = next.fetch_add(1); t < spec.trials; t = next.fetch_add(1)) {
        do_trial(t);
      }
    };
    for (int w = 1; w < nthreads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    long bits_total = 0, e_oddm = 0, e_otfs = 0, e_mmse = 0;
    for (const TrialCounts& tc : counts) {
      bits_total += tc.bits;
      e_oddm += tc.oddm_errs;
      e_otfs += tc.otfs_errs;
      e_mmse += tc.mmse_errs;
    }
    auto mk_point = [&](long errs) {
      BerPoint bp;
      bp.snr_db = snr;
      bp.bit_errors = errs;
      bp.bits = bits_total;
      bp.ber = static_cast<double>(errs) / bits_total;
      bp.ci = wilson(errs, bits_total);
      bp.ci_half = 0.5 * (bp.ci.hi - bp.ci.lo);
      return bp;
    };
    res.curves[0].points.push_back(mk_point(e_oddm));
    res.curves[1].points.push_back(mk_point(e_otfs));
    if (spec.with_mmse) res.curves[2].points.push_back(mk_point(e_mmse));
  }

  if (!spec.out_dir.empty()) {
    ensure_dir(spec.out_dir);
    std::ofstream f(join_path(spec.out_dir, "ber.csv"));
    write_csv_header(f, "scheme,snr_db,bit_errors,bits,ber,wilson_lo,wilson_hi");
    char buf[256];
    for (const BerCurve& c : res.curves) {
      for (const BerPoint& bp : c.points) {
        std::snprintf(buf, sizeof(buf), "%s,%.6g,%ld,%ld,%.9g,%.9g,%.9g\n",
                      c.scheme.c_str(), bp.snr_db, bp.bit_errors, bp.bits, bp.ber,
                      bp.ci.lo, bp.ci.hi);
        f << buf;
      }
    }
  }
  return res;
}

OrthoResult run_ortho(const ExperimentSpec& spec) {
  const GridParams& p = spec.cfg.grid;
  validate(p);
  const ProtoPulse proto = design_srrc(p, spec.cfg.rolloff);
  const PulseTrain train = build_train(proto, p, false);
  OrthoResult res;
  res.report = orthogonality_audit(train, p);

  if (!spec.out_dir.empty()) {
    ensure_dir(spec.out_dir);
    std::ofstream f(join_path(spec.out_dir, "ortho.csv"));
    write_csv_header(f, "m,n,re,im,abs,region");
    char buf[200];
    ambiguity_scan(train, p, [&](int m, int n, cxd a) {
      const char* region = std::abs(m) <= p.M - 2 * p.Q ? "exact" : "wrap";
      std::snprintf(buf, sizeof(buf), "%d,%d,%.12g,%.12g,%.12g,%s\n", m, n, a.real(),
                    a.imag(), std::abs(a), region);
      f << buf;
    });
    std::ofstream rep(join_path(spec.out_dir, "ortho_report.txt"));
    rep << "origin " << res.report.origin.real() << " " << res.report.origin.imag()
        << "\n";
    rep << "exact_max " << res.report.exact_max << " at m=" << res.report.exact_arg.m
        << " n=" << res.report.exact_arg.n << "\n";
    rep << "wrap_max " << res.report.wrap_max << " at m=" << res.report.wrap_arg.m
        << " n=" << res.report.wrap_arg.n << "\n";
    rep << "threads " << res.report.threads_used << "\n";
  }
  return res;
}

MatrixCheckResult run_matrix_check(const ExperimentSpec& spec) {
  const GridParams& p = spec.cfg.grid;
  validate(p);
  const QamConstellation cons(spec.cfg.qam_order);
  const ProtoPulse proto = design_srrc(p, spec.cfg.rolloff);
  const PulseTrain train_cp = build_train(proto, p, true);
  const PulseTrain train = build_train(proto, p, false);

  std::mt19937_64 rng(mix_seed(spec.seed, 10));
  const DdChannel ch = draw_channel(spec.channel, p, mix_seed(spec.seed, 11));
  const DdFrame X = random_frame(p, cons, rng);

  const Waveform xcp = modulate(X, train_cp, p);
  const Waveform y = apply(xcp, ch, {}, p);
  const DdFrame Y = demodulate(y, train, p);

  const DdChannelMatrix H = build(ch, p);
  const VecXcd hx = H.matvec(vectorize(X));
  const DdFrame Yh = unvectorize(hx, p.M, p.N);

  MatrixCheckResult res;
  res.max_err = (Y - Yh).cwiseAbs().maxCoeff();
  if (H.dim() <= 4096) {
    const VecXcd dense_y = H.dense() * vectorize(X);
    res.dense_sparse_err = (dense_y - hx).cwiseAbs().maxCoeff();
  }

  if (!spec.out_dir.empty()) {
    ensure_dir(spec.out_dir);
    std::ofstream f(join_path(spec.out_dir, "matrix_check.csv"));
    write_csv_header(f, "m,n,abs_err");
    char buf[128];
    for (int m = 0; m < p.M; ++m) {
      for (int n = 0; n < p.N; ++n) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.9g\n", m, n, std::abs(Y(m, n) - Yh(m, n)));
        f << buf;
      }
    }
  }
  return res;
}

LoopbackResult run_loopback(const ExperimentSpec& spec) {
  const GridParams& p = spec.cfg.grid;
  validate(p);
  const QamConstellation cons(spec.cfg.qam_order);
  const ProtoPulse proto = design_srrc(p, spec.cfg.rolloff);
  const PulseTrain train = build_train(proto, p, false);
  std::mt19937_64 rng(mix_seed(spec.seed, 20));
  const DdFrame X = random_frame(p, cons, rng);
  const Waveform x = modulate(X, train, p);
  const DdFrame Y = demodulate(x, train, p);
  LoopbackResult res;
  res.max_err = (Y - X).cwiseAbs().maxCoeff();

  if (!spec.out_dir.empty()) {
    ensure_dir(spec.out_dir);
    std::ofstream f(join_path(spec.out_dir, "waveform.csv"));
    write_csv_header(f, "t,re,im");
    char buf[160];
    for (long i = 0; i < x.size(); ++i) {
      const double t = (x.start + i) * x.dt;
      std::snprintf(buf, sizeof(buf), "%.12g,%.9g,%.9g\n", t, x.samples[i].real(),
                    x.samples[i].imag());
      f << buf;
    }
    std::ofstream rep(join_path(spec.out_dir, "loopback.txt"));
    rep << "max_abs_err " << res.max_err << "\n";
  }
  return res;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int run_all(const std::vector<ExperimentSpec>& specs, const std::string& out_dir) {
  ensure_dir(out_dir);
  std::ostringstream manifest;
  int failures = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ExperimentSpec spec = specs[i];
    const char* kind_name = "";
    switch (spec.kind) {
      case ExperimentSpec::Kind::ortho: kind_name = "ortho"; break;
      case ExperimentSpec::Kind::psd: kind_name = "psd"; break;
      case ExperimentSpec::Kind::ber: kind_name = "ber"; break;
      case ExperimentSpec::Kind::matrix_check: kind_name = "matrix-check"; break;
      case ExperimentSpec::Kind::loopback: kind_name = "loopback"; break;
    }
    std::string subdir = join_path(out_dir, std::to_string(i) + "_" + kind_name);
    spec.out_dir = subdir;
    manifest << "[" << i << "] " << kind_name << "\n";
    const std::string cfg_text = config_to_string(spec.cfg);
    std::istringstream cfg_lines(cfg_text);
    std::string line;
    while (std::getline(cfg_lines, line)) manifest << "  " << line << "\n";
    manifest << "  seed=" << spec.seed << "\n";
    manifest << "  input_hash=" << fnv1a(cfg_text) << "\n";
    try {
      switch (spec.kind) {
        case ExperimentSpec::Kind::ortho: run_ortho(spec); break;
        case ExperimentSpec::Kind::psd: run_psd(spec); break;
        case ExperimentSpec::Kind::ber: run_ber(spec); break;
        case ExperimentSpec::Kind::matrix_check: run_matrix_check(spec); break;
        case ExperimentSpec::Kind::loopback: run_loopback(spec); break;
      }
      manifest << "  status=ok\n";
    } catch (const std::exception& e) {
      manifest << "  status=failed: " << e.what() << "\n";
      ++failures;
    }
  }
  std::ofstream mf(join_path(out_dir, "manifest.txt"));
  mf << manifest.str();
  return failures == 0 ? 0 : 1;
}

}  // namespace oddm
