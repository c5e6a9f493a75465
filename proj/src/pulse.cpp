#include "oddm/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

namespace oddm {

namespace {

constexpr double kPi = std::numbers::pi;

// SRRC impulse response at t (in units of the symbol interval T/M), unit
// nominal amplitude. Removable singularities at t = 0 and |t| = 1/(4a)
// are evaluated by their series limits.
double srrc_value(double t, double a) {
  if (std::abs(t) < 1e-12) {
    return 1.0 + a * (4.0 / kPi - 1.0);
  }
  if (a > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * a)) < 1e-9) {
    const double c = a / std::sqrt(2.0);
    return c * ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * a)) +
                (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * a)));
  }
  const double num =
      std::sin(kPi * t * (1.0 - a)) + 4.0 * a * t * std::cos(kPi * t * (1.0 + a));
  const double den = kPi * t * (1.0 - 16.0 * a * a * t * t);
  return num / den;
}

// Minimal-norm Gauss-Newton update driving the discrete autocorrelation at
// lags m*J (m = 1..2Q) to zero. The correction stays tiny (the truncated
// SRRC is already nearly root-Nyquist), so a handful of iterations reach
// machine precision.
void nyquist_refine(VecXd& g, int J, int Q) {
  const long L = g.size();
  std::vector<long> lags;
  for (int m = 1; m <= 2 * Q; ++m) {
    if (static_cast<long>(m) * J < L) lags.push_back(static_cast<long>(m) * J);
  }
  const int nc = static_cast<int>(lags.size());
  if (nc == 0) return;
  for (int iter = 0; iter < 40; ++iter) {
    VecXd c(nc);
    for (int k = 0; k < nc; ++k) {
      const long lag = lags[k];
      c[k] = g.tail(L - lag).dot(g.head(L - lag));
    }
    const double r0 = g.squaredNorm();
    if (c.cwiseAbs().maxCoeff() < 1e-13 * r0) break;
    Eigen::MatrixXd Jac = Eigen::MatrixXd::Zero(nc, L);
    for (int k = 0; k < nc; ++k) {
      const long lag = lags[k];
      Jac.row(k).tail(L - lag) += g.head(L - lag).transpose();
      Jac.row(k).head(L - lag) += g.tail(L - lag).transpose();
    }
    Eigen::MatrixXd JJt = Jac * Jac.transpose();
    VecXd lam = JJt.ldlt().solve(c);
    g -= Jac.transpose() * lam;
  }
  // Symmetry is preserved analytically; pin it against rounding drift.
  for (long i = 0; i < L / 2; ++i) {
    const double v = 0.5 * (g[i] + g[L - 1 - i]);
    g[i] = v;
    g[L - 1 - i] = v;
  }
}

}  // namespace

ProtoPulse design_srrc(const GridParams& p, double rolloff, bool refine) {
  validate(p);
  if (rolloff < 0.0 || rolloff > 1.0) {
    throw std::invalid_argument("design_srrc: rolloff must be in [0, 1]");
  }
  if (p.Q < 1) {
    throw std::invalid_argument("design_srrc: Q must be at least 1");
  }
  ProtoPulse proto;
  proto.rolloff = rolloff;
  proto.Q = p.Q;
  proto.J = p.J;
  proto.dt = p.dt();
  proto.energy_target = 1.0 / p.N;
  const int QJ = p.Q * p.J;
  proto.taps.resize(2 * QJ + 1);
  for (int j = 0; j <= 2 * QJ; ++j) {
    const double t = static_cast<double>(j - QJ) / p.J;
    proto.taps[j] = srrc_value(t, rolloff);
  }
  if (refine) {
    proto.taps /= proto.taps.norm();
    nyquist_refine(proto.taps, p.J, p.Q);
  }
  const double energy = proto.taps.squaredNorm() * proto.dt;
  proto.taps *= std::sqrt(proto.energy_target / energy);
  return proto;
}

double proto_autocorr(const ProtoPulse& proto, int m) {
  const long L = proto.taps.size();
  const long lag = std::labs(static_cast<long>(m) * proto.J);
  if (lag >= L) return 0.0;
  const double r = proto.taps.tail(L - lag).dot(proto.taps.head(L - lag));
  return r / proto.taps.squaredNorm();
}

PulseTrain build_train(const ProtoPulse& proto, const GridParams& p, bool cp) {
  validate(p);
  if (proto.Q != p.Q || proto.J != p.J) {
    throw std::invalid_argument("build_train: prototype sampled for different Q or J");
  }
  PulseTrain train;
  train.cp_variant = cp;
  train.grid = p;
  train.dt = p.dt();
  const long MJ = static_cast<long>(p.M) * p.J;
  const long QJ = static_cast<long>(p.Q) * p.J;
  const int n_first = cp ? -1 : 0;
  train.start = n_first * MJ - QJ;
  const long end = static_cast<long>(p.N - 1) * MJ + QJ;
  train.taps = VecXd::Zero(end - train.start + 1);
  for (int nd = n_first; nd < p.N; ++nd) {
    const long c = nd * MJ;
    train.taps.segment(c - QJ - train.start, proto.taps.size()) += proto.taps;
  }
  return train;
}

cxd ambiguity(const PulseTrain& train, int m, int n) {
  const GridParams& p = train.grid;
  const long lag = static_cast<long>(m) * p.J;
  const long lo = std::max(train.start, train.start + lag);
  const long hi = std::min(train.start + train.size() - 1,
                           train.start + train.size() - 1 + lag);
  if (lo > hi) return cxd(0.0, 0.0);
  const double w = -2.0 * kPi * n / (static_cast<double>(p.N) * p.M * p.J);
  cxd acc(0.0, 0.0);
  for (long i = lo; i <= hi; ++i) {
    const double prod = train.taps[i - train.start] * train.taps[i - lag - train.start];
    if (prod != 0.0) acc += prod * std::polar(1.0, w * static_cast<double>(i - lag));
  }
  return acc * train.dt;
}

cxd ambiguity_at(const PulseTrain& train, double tau, double nu) {
  const double dt = train.dt;
  const double shift = tau / dt;
  cxd acc(0.0, 0.0);
  for (long i = 0; i < train.size(); ++i) {
    const double u1 = train.taps[i];
    if (u1 == 0.0) continue;
    const double x = static_cast<double>(i + train.start) - shift;  // grid coords
    const double f = x - static_cast<double>(train.start);
    const long j = static_cast<long>(std::floor(f));
    if (j < 0 || j + 1 >= train.size()) continue;
    const double frac = f - j;
    const double u2 = (1.0 - frac) * train.taps[j] + frac * train.taps[j + 1];
    if (u2 == 0.0) continue;
    const double t_shifted = (i + train.start) * dt - tau;
    acc += u1 * u2 * std::polar(1.0, -2.0 * kPi * nu * t_shifted);
  }
  return acc * dt;
}

namespace {

// Sparse product w[i] = u[i] * u[i - m*J] for one delay row; indices are
// global grid positions.
struct ProductRow {
  std::vector<long> idx;
  std::vector<double> val;
};

ProductRow product_row(const PulseTrain& train, int m) {
  ProductRow row;
  const long lag = static_cast<long>(m) * train.grid.J;
  const long lo = std::max(train.start, train.start + lag);
  const long hi = std::min(train.start + train.size() - 1,
                           train.start + train.size() - 1 + lag);
  for (long i = lo; i <= hi; ++i) {
    const double prod = train.taps[i - train.start] * train.taps[i - lag - train.start];
    if (prod != 0.0) {
      row.idx.push_back(i);
      row.val.push_back(prod);
    }
  }
  return row;
}

VecXcd ambiguity_row(const PulseTrain& train, int m) {
  const GridParams& p = train.grid;
  const long lag = static_cast<long>(m) * p.J;
  const ProductRow row = product_row(train, m);
  VecXcd out = VecXcd::Zero(2 * p.N - 1);
  if (row.idx.empty()) return out;
  const double base = -2.0 * kPi / (static_cast<double>(p.N) * p.M * p.J);
  for (int n = -(p.N - 1); n <= p.N - 1; ++n) {
    cxd acc(0.0, 0.0);
    const double w = base * n;
    for (std::size_t t = 0; t < row.idx.size(); ++t) {
      acc += row.val[t] * std::polar(1.0, w * static_cast<double>(row.idx[t] - lag));
    }
    out[n + p.N - 1] = acc * train.dt;
  }
  return out;
}

void keep_top(std::vector<AuditPoint>& pts, std::size_t cap) {
  std::sort(pts.begin(), pts.end(),
            [](const AuditPoint& a, const AuditPoint& b) { return a.abs > b.abs; });
  if (pts.size() > cap) pts.resize(cap);
}

}  // namespace

void ambiguity_scan(const PulseTrain& train, const GridParams& p,
                    const std::function<void(int, int, cxd)>& cb) {
  for (int m = -(p.M - 1); m <= p.M - 1; ++m) {
    const VecXcd row = ambiguity_row(train, m);
    for (int n = -(p.N - 1); n <= p.N - 1; ++n) {
      cb(m, n, row[n + p.N - 1]);
    }
  }
}

AuditReport orthogonality_audit(const PulseTrain& train, const GridParams& p,
                                int threads) {
  validate(p);
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  const int n_rows = 2 * p.M - 1;
  struct Partial {
    double exact_max = -1.0;
    AuditPoint exact_arg;
    double wrap_max = -1.0;
    AuditPoint wrap_arg;
    std::vector<AuditPoint> exact_pts, wrap_pts;
    cxd origin;
  };
  std::vector<Partial> parts(threads);
  auto work = [&](int tid) {
    Partial& pt = parts[tid];
    for (int r = tid; r < n_rows; r += threads) {
      const int m = r - (p.M - 1);
      const VecXcd row = ambiguity_row(train, m);
      const bool wrap = std::abs(m) > p.M - 2 * p.Q;
      for (int n = -(p.N - 1); n <= p.N - 1; ++n) {
        const cxd a = row[n + p.N - 1];
        if (m == 0 && n == 0) {
          pt.origin = a;
          continue;
        }
        const double mag = std::abs(a);
        AuditPoint point{m, n, mag};
        if (wrap) {
          if (mag > pt.wrap_max) {
            pt.wrap_max = mag;
            pt.wrap_arg = point;
          }
          if (mag > 0.0) pt.wrap_pts.push_back(point);
        } else {
          if (mag > pt.exact_max) {
            pt.exact_max = mag;
            pt.exact_arg = point;
          }
          if (mag > 0.0) pt.exact_pts.push_back(point);
        }
      }
      keep_top(pt.exact_pts, 16);
      keep_top(pt.wrap_pts, 16);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();

  AuditReport rep;
  rep.threads_used = threads;
  for (const Partial& pt : parts) {
    if (pt.exact_max > rep.exact_max) {
      rep.exact_max = pt.exact_max;
      rep.exact_arg = pt.exact_arg;
    }
    if (pt.wrap_max > rep.wrap_max) {
      rep.wrap_max = pt.wrap_max;
      rep.wrap_arg = pt.wrap_arg;
    }
    rep.worst_exact.insert(rep.worst_exact.end(), pt.exact_pts.begin(), pt.exact_pts.end());
    rep.worst_wrap.insert(rep.worst_wrap.end(), pt.wrap_pts.begin(), pt.wrap_pts.end());
    if (std::abs(pt.origin) > std::abs(rep.origin)) rep.origin = pt.origin;
  }
  keep_top(rep.worst_exact, 16);
  keep_top(rep.worst_wrap, 16);
  return rep;
}

}  // namespace oddm
