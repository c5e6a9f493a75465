#include "oddm/modem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oddm {

namespace {

constexpr double kPi = std::numbers::pi;

void check_frame(const DdFrame& X, const GridParams& p) {
  if (X.rows() != p.M || X.cols() != p.N) {
    throw std::invalid_argument("frame dimensions do not match GridParams");
  }
}

// Intra-pulse subcarrier envelope E(n, j) = e^{j2pi n (j - QJ) / (NMJ)};
// the phase of subcarrier n across the prototype support relative to the
// replica center.
MatXcd envelope_table(const GridParams& p) {
  const int QJ = p.Q * p.J;
  MatXcd E(p.N, 2 * QJ + 1);
  const double base = 2.0 * kPi / (static_cast<double>(p.N) * p.M * p.J);
  for (int n = 0; n < p.N; ++n) {
    for (int j = 0; j <= 2 * QJ; ++j) {
      E(n, j) = std::polar(1.0, base * n * (j - QJ));
    }
  }
  return E;
}

// Prototype taps recovered from replica nd = 0 of the train (replicas do
// not overlap since 2Q < M).
VecXd proto_slice(const PulseTrain& train) {
  const GridParams& p = train.grid;
  const long QJ = static_cast<long>(p.Q) * p.J;
  return train.taps.segment(-QJ - train.start, 2 * QJ + 1);
}

}  // namespace

VecXcd vectorize(const DdFrame& X) {
  const int M = static_cast<int>(X.rows());
  const int N = static_cast<int>(X.cols());
  VecXcd x(static_cast<long>(M) * N);
  for (int m = 0; m < M; ++m) x.segment(static_cast<long>(m) * N, N) = X.row(m).transpose();
  return x;
}

DdFrame unvectorize(const VecXcd& x, int M, int N) {
  if (x.size() != static_cast<long>(M) * N) {
    throw std::invalid_argument("unvectorize: size mismatch");
  }
  DdFrame X(M, N);
  for (int m = 0; m < M; ++m) X.row(m) = x.segment(static_cast<long>(m) * N, N).transpose();
  return X;
}

VecXcd digital_sequence(const DdFrame& X, const GridParams& p) {
  check_frame(X, p);
  VecXcd s(static_cast<long>(p.M) * p.N);
  const double norm = 1.0 / std::sqrt(static_cast<double>(p.N));
  MatXcd W(p.N, p.N);  // W(n, nd) = e^{j2pi n nd / N}
  for (int n = 0; n < p.N; ++n) {
    for (int nd = 0; nd < p.N; ++nd) {
      W(n, nd) = std::polar(1.0, 2.0 * kPi * n * nd / p.N);
    }
  }
  MatXcd S = X * W;  // S(m, nd)
  for (int nd = 0; nd < p.N; ++nd) {
    for (int m = 0; m < p.M; ++m) {
      s[m + static_cast<long>(p.M) * nd] = norm * S(m, nd);
    }
  }
  return s;
}

DdFrame digital_demap(const VecXcd& s, const GridParams& p) {
  if (s.size() != static_cast<long>(p.M) * p.N) {
    throw std::invalid_argument("digital_demap: size mismatch");
  }
  DdFrame X(p.M, p.N);
  const double norm = 1.0 / std::sqrt(static_cast<double>(p.N));
  MatXcd Wc(p.N, p.N);
  for (int nd = 0; nd < p.N; ++nd) {
    for (int n = 0; n < p.N; ++n) {
      Wc(nd, n) = std::polar(1.0, -2.0 * kPi * n * nd / p.N);
    }
  }
  MatXcd Rm(p.M, p.N);  // staggered gather: Rm(m, nd) = s[m + M nd]
  for (int m = 0; m < p.M; ++m) {
    for (int nd = 0; nd < p.N; ++nd) {
      Rm(m, nd) = s[m + static_cast<long>(p.M) * nd];
    }
  }
  X = norm * (Rm * Wc);
  return X;
}

Waveform modulate(const DdFrame& X, const PulseTrain& train, const GridParams& p) {
  check_frame(X, p);
  if (train.grid.M != p.M || train.grid.N != p.N || train.grid.Q != p.Q ||
      train.grid.J != p.J) {
    throw std::invalid_argument("modulate: train built for different params");
  }
  const bool cp = train.cp_variant;
  const long MJ = static_cast<long>(p.M) * p.J;
  const long QJ = static_cast<long>(p.Q) * p.J;
  const VecXd a = proto_slice(train);
  const MatXcd E = envelope_table(p);

  Waveform x;
  x.dt = p.dt();
  x.start = cp ? -(static_cast<long>(p.cp_len) + p.Q) * p.J : -QJ;
  const long end = static_cast<long>(p.N) * MJ + QJ;
  x.samples = VecXcd::Zero(end - x.start + 1);

  const int nd_first = cp ? -1 : 0;
  MatXcd V(p.N - nd_first, p.N);
  for (int m = 0; m < p.M; ++m) {
    for (int nd = nd_first; nd < p.N; ++nd) {
      for (int n = 0; n < p.N; ++n) {
        V(nd - nd_first, n) = X(m, n) * std::polar(1.0, 2.0 * kPi * n * nd / p.N);
      }
    }
    MatXcd Wm = V * E;  // (slots x taps) envelope-weighted coefficients
    for (int nd = nd_first; nd < p.N; ++nd) {
      const long center = (static_cast<long>(m) + static_cast<long>(nd) * p.M) * p.J;
      const long lo = std::max(center - QJ, x.start);
      const long hi = std::min(center + QJ, x.start + x.size() - 1);
      for (long i = lo; i <= hi; ++i) {
        const long j = i - (center - QJ);
        x.samples[i - x.start] += a[j] * Wm(nd - nd_first, j);
      }
    }
  }
  return x;
}

Waveform modulate_filtered(const DdFrame& X, const ProtoPulse& proto,
                           const GridParams& p, bool cp) {
  check_frame(X, p);
  const long MN = static_cast<long>(p.M) * p.N;
  const long QJ = static_cast<long>(p.Q) * p.J;
  const VecXcd s = digital_sequence(X, p);
  const double gain = std::sqrt(static_cast<double>(p.N));

  Waveform x;
  x.dt = p.dt();
  const long q_first = cp ? -static_cast<long>(p.cp_len) : 0;
  x.start = q_first * p.J - QJ;
  const long end = (MN - 1) * p.J + QJ;
  x.samples = VecXcd::Zero(end - x.start + 1);
  for (long q = q_first; q < MN; ++q) {
    const cxd v = gain * s[(q + MN) % MN];
    const long center = q * p.J;
    for (long j = 0; j < proto.taps.size(); ++j) {
      x.samples[center - QJ + j - x.start] += proto.taps[j] * v;
    }
  }
  return x;
}

DdFrame demodulate(const Waveform& y, const PulseTrain& train, const GridParams& p) {
  if (train.grid.M != p.M || train.grid.N != p.N || train.grid.Q != p.Q ||
      train.grid.J != p.J) {
    throw std::invalid_argument("demodulate: train built for different params");
  }
  const long MJ = static_cast<long>(p.M) * p.J;
  const long QJ = static_cast<long>(p.Q) * p.J;
  const long last_center = (static_cast<long>(p.M) - 1 + static_cast<long>(p.N - 1) * p.M) * p.J;
  if (y.start > -QJ || y.start + y.size() - 1 < last_center + QJ) {
    throw std::invalid_argument("demodulate: waveform span does not cover matched filters");
  }
  const VecXd a = proto_slice(train);
  const MatXcd E = envelope_table(p);
  const long taps = a.size();

  DdFrame Y(p.M, p.N);
  MatXcd G(p.N, taps);
  MatXcd F(p.N, p.N);  // F(n, nd) = e^{-j2pi n nd / N}
  for (int n = 0; n < p.N; ++n) {
    for (int nd = 0; nd < p.N; ++nd) {
      F(n, nd) = std::polar(1.0, -2.0 * kPi * n * nd / p.N);
    }
  }
  for (int m = 0; m < p.M; ++m) {
    for (int nd = 0; nd < p.N; ++nd) {
      const long center = (static_cast<long>(m) + static_cast<long>(nd) * p.M) * p.J;
      for (long j = 0; j < taps; ++j) {
        const long i = center - QJ + j;
        const long off = i - y.start;
        G(nd, j) = (off >= 0 && off < y.size()) ? a[j] * y.samples[off] : cxd(0, 0);
      }
    }
    MatXcd Z = G * E.adjoint();  // Z(nd, n) = sum_j G(nd,j) conj(E(n,j))
    for (int n = 0; n < p.N; ++n) {
      cxd acc(0.0, 0.0);
      for (int nd = 0; nd < p.N; ++nd) acc += F(n, nd) * Z(nd, n);
      Y(m, n) = acc * y.dt;
    }
  }
  return Y;
}

Waveform otfs_modulate(const DdFrame& X, const GridParams& p, bool cp) {
  check_frame(X, p);
  const long MN = static_cast<long>(p.M) * p.N;
  const VecXcd s = digital_sequence(X, p);
  Waveform x;
  x.dt = p.dt();
  const long q_first = cp ? -static_cast<long>(p.cp_len) : 0;
  x.start = q_first * p.J;
  x.samples = VecXcd::Zero((MN - q_first) * p.J);
  for (long q = q_first; q < MN; ++q) {
    const cxd v = s[(q + MN) % MN];
    for (int j = 0; j < p.J; ++j) x.samples[(q - q_first) * p.J + j] = v;
  }
  return x;
}

DdFrame otfs_demodulate(const Waveform& y, const GridParams& p) {
  const long MN = static_cast<long>(p.M) * p.N;
  VecXcd r(MN);
  for (long q = 0; q < MN; ++q) {
    const long off = q * p.J - y.start;
    if (off < 0 || off >= y.size()) {
      throw std::invalid_argument("otfs_demodulate: waveform span too short");
    }
    r[q] = y.samples[off];
  }
  return digital_demap(r, p);
}

}  // namespace oddm
