#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "oddm/channel.hpp"

using namespace oddm;

namespace {

constexpr double kPi = std::numbers::pi;

DdFrame random_qam4(const GridParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bit(0, 1);
  DdFrame X(p.M, p.N);
  for (int m = 0; m < p.M; ++m) {
    for (int n = 0; n < p.N; ++n) {
      X(m, n) = cxd(2 * bit(rng) - 1, 2 * bit(rng) - 1) / std::sqrt(2.0);
    }
  }
  return X;
}

}  // namespace

TEST_CASE("make_channel merges duplicate slots and counts P from G") {
  std::vector<DdPath> paths{{cxd(1, 0), 0, 0}, {cxd(0.5, 0), 0, 0}, {cxd(0, 1), 2, -1}};
  const DdChannel ch = make_channel(paths, 3, 1);
  CHECK(ch.P() == 2);
  CHECK(ch.G(1, 0) == cxd(1.5, 0));
  CHECK(ch.G(0, 2) == cxd(0, 1));
  int nnz = 0;
  for (int r = 0; r < ch.G.rows(); ++r) {
    for (int c = 0; c < ch.G.cols(); ++c) {
      if (ch.G(r, c) != cxd(0, 0)) ++nnz;
    }
  }
  CHECK(nnz == ch.P());
}

TEST_CASE("make_channel rejects off-grid paths") {
  CHECK_THROWS(make_channel({{cxd(1, 0), 3, 0}}, 3, 1));
  CHECK_THROWS(make_channel({{cxd(1, 0), 0, 2}}, 3, 1));
  CHECK_THROWS(make_channel({{cxd(1, 0), -1, 0}}, 3, 1));
}

TEST_CASE("identity path passes the waveform through unchanged") {
  GridParams p{16, 8, 1.0, 2, 4, 3};
  const PulseTrain ucp = build_train(design_srrc(p, 0.25), p, true);
  const Waveform x = modulate(random_qam4(p, 1), ucp, p);
  const DdChannel ch = make_channel({{cxd(1, 0), 0, 0}}, p.cp_len + 1, 0);
  const Waveform y = apply(x, ch, {}, p);
  // y's declared span is wider; content must match exactly on x's span
  for (long i = 0; i < x.size(); ++i) {
    const long g = i + x.start;
    CHECK(y.samples[g - y.start] == x.samples[i]);
  }
  for (long g = y.start; g < x.start; ++g) CHECK(y.samples[g - y.start] == cxd(0, 0));
}

TEST_CASE("pure delay is an exact sample shift") {
  GridParams p{16, 8, 1.0, 2, 4, 3};
  const PulseTrain ucp = build_train(design_srrc(p, 0.25), p, true);
  const Waveform x = modulate(random_qam4(p, 2), ucp, p);
  const DdChannel ch = make_channel({{cxd(1, 0), 2, 0}}, p.cp_len + 1, 0);
  const Waveform y = apply(x, ch, {}, p);
  const long sh = 2L * p.J;
  for (long i = 0; i < x.size(); ++i) {
    const long g = i + x.start + sh;
    if (g >= y.start && g < y.start + y.size()) {
      CHECK(std::abs(y.samples[g - y.start] - x.samples[i]) < 1e-15);
    }
  }
}

TEST_CASE("noiseless zero-Doppler unit path preserves energy") {
  GridParams p{16, 8, 1.0, 2, 4, 3};
  const PulseTrain ucp = build_train(design_srrc(p, 0.25), p, true);
  const Waveform x = modulate(random_qam4(p, 3), ucp, p);
  const DdChannel ch = make_channel({{cxd(1, 0), 1, 0}}, p.cp_len + 1, 0);
  const Waveform y = apply(x, ch, {}, p);
  CHECK(y.energy() == doctest::Approx(x.energy()).epsilon(1e-12));
}

TEST_CASE("path delay beyond the CP raises") {
  GridParams p{16, 8, 1.0, 2, 4, 2};
  const PulseTrain ucp = build_train(design_srrc(p, 0.25), p, true);
  const Waveform x = modulate(random_qam4(p, 4), ucp, p);
  const DdChannel ch = make_channel({{cxd(1, 0), 3, 0}}, 4, 0);
  CHECK_THROWS_AS(apply(x, ch, {}, p), std::invalid_argument);
}

TEST_CASE("waveform without CP rejects delayed paths") {
  GridParams p{16, 8, 1.0, 2, 4, 3};
  const PulseTrain u = build_train(design_srrc(p, 0.25), p, false);
  const Waveform x = modulate(random_qam4(p, 5), u, p);
  const DdChannel ch = make_channel({{cxd(1, 0), 1, 0}}, p.cp_len + 1, 0);
  CHECK_THROWS_AS(apply(x, ch, {}, p), std::invalid_argument);
}

TEST_CASE("Doppler ramp cyclically shifts the Doppler bin") {
  GridParams p{16, 8, 1.0, 2, 8, 3};
  const ProtoPulse a = design_srrc(p, 0.25);
  const PulseTrain ucp = build_train(a, p, true);
  const PulseTrain u = build_train(a, p, false);
  const int m0 = 3, n0 = 3, k = 2;
  DdFrame X = DdFrame::Zero(p.M, p.N);
  X(m0, n0) = 1.0;
  const Waveform x = modulate(X, ucp, p);
  const DdChannel ch = make_channel({{cxd(1, 0), 0, k}}, p.cp_len + 1, 2);
  const DdFrame Y = demodulate(apply(x, ch, {}, p), u, p);
  int bm = 0, bn = 0;
  double best = 0.0;
  for (int m = 0; m < p.M; ++m) {
    for (int n = 0; n < p.N; ++n) {
      if (std::abs(Y(m, n)) > best) {
        best = std::abs(Y(m, n));
        bm = m;
        bn = n;
      }
    }
  }
  CHECK(bm == m0);
  CHECK(bn == (n0 + k) % p.N);
  // phase picked up: e^{j2pi k m0/(MN)}
  const cxd want = std::polar(1.0, 2.0 * kPi * k * m0 / (double(p.M) * p.N));
  CHECK(std::abs(Y(bm, bn) - want) < 1e-3);
}

TEST_CASE("two-path channel matches the DD-domain prediction within 1e-3") {
  GridParams p{16, 8, 1.0, 1, 8, 3};
  const ProtoPulse a = design_srrc(p, 0.25);
  const PulseTrain ucp = build_train(a, p, true);
  const PulseTrain u = build_train(a, p, false);
  const DdFrame X = random_qam4(p, 6);
  const DdChannel ch =
      make_channel({{cxd(0.8, 0.1), 0, 0}, {cxd(-0.3, 0.4), 2, 0}}, p.cp_len + 1, 0);
  const DdFrame Y = demodulate(apply(modulate(X, ucp, p), ch, {}, p), u, p);
  // prediction straight from the sample-wise input-output relation
  DdFrame want = DdFrame::Zero(p.M, p.N);
  for (const DdPath& path : ch.paths) {
    for (int m = 0; m < p.M; ++m) {
      const int md = m - path.l;
      for (int n = 0; n < p.N; ++n) {
        const int nd = ((n - path.k) % p.N + p.N) % p.N;
        cxd v = X((md % p.M + p.M) % p.M, nd) *
                std::polar(1.0, 2.0 * kPi * path.k * md / (double(p.M) * p.N));
        if (md < 0) v *= std::polar(1.0, -2.0 * kPi * nd / p.N);
        want(m, n) += path.h * v;
      }
    }
  }
  CHECK((Y - want).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("with Dopplers the residual is bounded by the edge-wrap droop") {
  GridParams p{16, 8, 1.0, 1, 8, 3};
  const ProtoPulse a = design_srrc(p, 0.25);
  const PulseTrain ucp = build_train(a, p, true);
  const PulseTrain u = build_train(a, p, false);
  const DdFrame X = random_qam4(p, 7);
  const DdChannel ch =
      make_channel({{cxd(0.7, 0.0), 0, 1}, {cxd(0.0, 0.5), 2, -2}}, p.cp_len + 1, 2);
  const DdFrame Y = demodulate(apply(modulate(X, ucp, p), ch, {}, p), u, p);
  DdFrame want = DdFrame::Zero(p.M, p.N);
  for (const DdPath& path : ch.paths) {
    for (int m = 0; m < p.M; ++m) {
      const int md = m - path.l;
      for (int n = 0; n < p.N; ++n) {
        const int nd = ((n - path.k) % p.N + p.N) % p.N;
        cxd v = X((md % p.M + p.M) % p.M, nd) *
                std::polar(1.0, 2.0 * kPi * path.k * md / (double(p.M) * p.N));
        if (md < 0) v *= std::polar(1.0, -2.0 * kPi * nd / p.N);
        want(m, n) += path.h * v;
      }
    }
  }
  // subcarriers Doppler-shifted past the band edge lose the droop factor
  // N*integral(a^2 e^{-j2pi t/T}); at M=16, Q=1 that is about 6e-3
  CHECK((Y - want).cwiseAbs().maxCoeff() < 5e-2);
}

TEST_CASE("eva_jakes: zero speed gives zero Doppler everywhere") {
  GridParams p{512, 64, 1.0 / 15000.0, 16, 2, 40};
  const DdChannel ch = eva_jakes(p, 0.0, 5e9, 123);
  CHECK(ch.K == 0);
  for (const DdPath& path : ch.paths) CHECK(path.k == 0);
}

TEST_CASE("eva_jakes at 500 km/h, 5 GHz: nu_max and K") {
  GridParams p{512, 64, 1.0 / 15000.0, 16, 2, 40};
  const double nu = jakes_nu_max(500.0, 5e9);
  CHECK(nu == doctest::Approx(2314.8).epsilon(0.001));
  const DdChannel ch = eva_jakes(p, 500.0, 5e9, 7);
  CHECK(ch.K == 10);
  for (const DdPath& path : ch.paths) {
    CHECK(path.l >= 0);
    CHECK(path.l <= p.cp_len);
    CHECK(std::abs(path.k) <= ch.K);
  }
}

TEST_CASE("eva_jakes is deterministic per seed") {
  GridParams p{512, 64, 1.0 / 15000.0, 16, 2, 40};
  const DdChannel a = eva_jakes(p, 120.0, 5e9, 99);
  const DdChannel b = eva_jakes(p, 120.0, 5e9, 99);
  REQUIRE(a.paths.size() == b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    CHECK(a.paths[i].h == b.paths[i].h);
    CHECK(a.paths[i].l == b.paths[i].l);
    CHECK(a.paths[i].k == b.paths[i].k);
  }
  const DdChannel c = eva_jakes(p, 120.0, 5e9, 100);
  bool same = a.paths.size() == c.paths.size();
  if (same) {
    bool all_eq = true;
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
      all_eq = all_eq && a.paths[i].h == c.paths[i].h;
    }
    same = all_eq;
  }
  CHECK(!same);
}

TEST_CASE("eva_jakes rejects a CP shorter than the delay spread") {
  GridParams p{512, 64, 1.0 / 15000.0, 16, 2, 4};  // 4 * T/M ~ 0.52 us < 2.51 us
  CHECK_THROWS_AS(eva_jakes(p, 120.0, 5e9, 1), std::invalid_argument);
}

TEST_CASE("quantization: delays land within half a bin") {
  GridParams p{512, 64, 1.0 / 15000.0, 16, 2, 40};
  const double ts = p.delay_res();
  const double delays_ns[] = {0, 30, 150, 310, 370, 710, 1090, 1730, 2510};
  for (double d : delays_ns) {
    const int l = static_cast<int>(std::lround(d * 1e-9 / ts));
    CHECK(std::abs(l * ts - d * 1e-9) <= 0.5 * ts + 1e-18);
  }
}

TEST_CASE("demodulated noise variance calibrates to N0") {
  GridParams p{32, 16, 1.0, 2, 4, 0};
  const ProtoPulse a = design_srrc(p, 0.25);
  const PulseTrain u = build_train(a, p, false);
  const DdChannel ch = make_channel({{cxd(1, 0), 0, 0}}, 1, 0);
  const double snr_db = 10.0;
  const double n0 = noise_n0(ch, snr_db);
  CHECK(n0 == doctest::Approx(0.1).epsilon(1e-12));
  // all-zero frame: the demodulated grid is pure noise
  DdFrame X = DdFrame::Zero(p.M, p.N);
  double acc = 0.0;
  long cnt = 0;
  for (int seed = 0; seed < 4; ++seed) {
    const Waveform x = modulate(X, u, p);
    const Waveform y = apply(x, ch, {snr_db, static_cast<std::uint64_t>(seed)}, p);
    const DdFrame Y = demodulate(y, u, p);
    acc += Y.squaredNorm();
    cnt += Y.size();
  }
  const double measured = acc / cnt;
  CHECK(measured == doctest::Approx(n0).epsilon(0.1));
}

TEST_CASE("channel file round trip") {
  const DdChannel ch = random_channel(4, 4, 2, 77);
  const std::string path =
      (std::filesystem::temp_directory_path() / "oddm_chan_test.csv").string();
  save_channel(path, ch);
  const DdChannel back = load_channel(path, 4, 2);
  REQUIRE(back.paths.size() == ch.paths.size());
  for (std::size_t i = 0; i < ch.paths.size(); ++i) {
    CHECK(back.paths[i].l == ch.paths[i].l);
    CHECK(back.paths[i].k == ch.paths[i].k);
    CHECK(std::abs(back.paths[i].h - ch.paths[i].h) == 0.0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("random_channel draws distinct on-grid slots") {
  const DdChannel ch = random_channel(8, 4, 2, 5);
  CHECK(ch.P() == 8);
  for (const DdPath& path : ch.paths) {
    CHECK(path.l >= 0);
    CHECK(path.l < 4);
    CHECK(std::abs(path.k) <= 2);
  }
  CHECK_THROWS(random_channel(100, 2, 1, 5));
}
