#include "oddm/ddmatrix.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oddm {

cxd phase_term(int m, int l, int khat, int M, int N) {
  return std::polar(1.0, 2.0 * std::numbers::pi * khat * (m - l) /
                             (static_cast<double>(M) * N));
}

DdChannelMatrix build(const DdChannel& ch, const GridParams& p) {
  validate(p);
  if (ch.L > p.M) {
    throw std::invalid_argument("build: channel delay span L exceeds M");
  }
  DdChannelMatrix H;
  H.M_ = p.M;
  H.N_ = p.N;
  H.L_ = ch.L;
  H.K_ = ch.K;
  H.by_delay_.assign(ch.L, {});
  for (const DdPath& path : ch.paths) {
    if (path.l < 0 || path.l >= ch.L || std::abs(path.k) > ch.K) {
      throw std::invalid_argument("build: off-grid path");
    }
    H.by_delay_[path.l].push_back({path.k, path.h});
  }
  H.P_ = ch.P();
  return H;
}

std::vector<DdChannelMatrix::Coef> DdChannelMatrix::block(int m, int l) const {
  std::vector<Coef> out;
  if (l < 0 || l >= L_) return out;
  for (const Coef& c : by_delay_[l]) {
    out.push_back({c.khat, c.g * phase_term(m, l, c.khat, M_, N_)});
  }
  return out;
}

VecXcd DdChannelMatrix::matvec(const VecXcd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("matvec: dimension mismatch");
  VecXcd y = VecXcd::Zero(dim());
  for (int m = 0; m < M_; ++m) {
    for (int l = 0; l < L_; ++l) {
      if (by_delay_[l].empty()) continue;
      const int src = m - l;
      const bool wrap = src < 0;
      const int srcm = wrap ? src + M_ : src;
      const auto xs = x.segment(static_cast<long>(srcm) * N_, N_);
      auto ys = y.segment(static_cast<long>(m) * N_, N_);
      for (const Coef& c : by_delay_[l]) {
        const cxd coef = c.g * phase_term(m, l, c.khat, M_, N_);
        for (int n = 0; n < N_; ++n) {
          const int ns = ((n - c.khat) % N_ + N_) % N_;
          cxd v = xs[ns];
          if (wrap) {
            v *= std::polar(1.0, -2.0 * std::numbers::pi * ns / N_);
          }
          ys[n] += coef * v;
        }
      }
    }
  }
  return y;
}

MatXcd DdChannelMatrix::dense() const {
  if (dim() > 4096) throw std::invalid_argument("dense: MN > 4096");
  MatXcd Hd = MatXcd::Zero(dim(), dim());
  for (const auto& [r, c, v] : triplets()) Hd(r, c) += v;
  return Hd;
}

std::vector<std::tuple<int, int, cxd>> DdChannelMatrix::triplets() const {
  std::vector<std::tuple<int, int, cxd>> out;
  for (int m = 0; m < M_; ++m) {
    for (int l = 0; l < L_; ++l) {
      const int src = m - l;
      const bool wrap = src < 0;
      const int srcm = wrap ? src + M_ : src;
      for (const Coef& c : by_delay_[l]) {
        const cxd coef = c.g * phase_term(m, l, c.khat, M_, N_);
        for (int n = 0; n < N_; ++n) {
          const int ns = ((n - c.khat) % N_ + N_) % N_;
          cxd v = coef;
          if (wrap) {
            v *= std::polar(1.0, -2.0 * std::numbers::pi * ns / N_);
          }
          out.emplace_back(m * N_ + n, srcm * N_ + ns, v);
        }
      }
    }
  }
  return out;
}

}  // namespace oddm
