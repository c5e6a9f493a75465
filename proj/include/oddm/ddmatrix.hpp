#pragma once

#include "oddm/channel.hpp"
#include "oddm/params.hpp"

namespace oddm {

// e^{j2pi khat (m - l) / (MN)}: the Doppler phase a path picks up because
// the (m-l)-th symbol starts at (m-l)T/M.
cxd phase_term(int m, int l, int khat, int M, int N);

/// Exact DD-domain operator of the CP-included frame: y = H x with
/// N x N circulant blocks H_l^m = sum_k g(k,l) e^{j2pi khat(m-l)/MN} C^khat
/// on L block-diagonals, and the phase matrix D = diag{e^{-j2pi n/N}}
/// applied to wrapped blocks (m - l < 0).
///
/// Blocks are kept as sparse cyclic-shift coefficient lists; the
/// m-dependence of a block is a pure phase, so one list per delay column
/// serves every m and block(m, l) materializes the rotated coefficients.
class DdChannelMatrix {
 public:
  struct Coef {
    int khat = 0;
    cxd g;
  };

  DdChannelMatrix() = default;

  int M() const { return M_; }
  int N() const { return N_; }
  int L() const { return L_; }
  int K() const { return K_; }
  int P() const { return P_; }
  long dim() const { return static_cast<long>(M_) * N_; }

  // Cyclic-shift coefficients of H_l^m (phase included, D excluded).
  std::vector<Coef> block(int m, int l) const;

  // y = H x at cost O(MN * P).
  VecXcd matvec(const VecXcd& x) const;

  // Dense export for oracles; throws when MN > 4096.
  MatXcd dense() const;

  // Nonzero entries (row, col, value) of the dense operator.
  std::vector<std::tuple<int, int, cxd>> triplets() const;

  friend DdChannelMatrix build(const DdChannel& ch, const GridParams& p);

 private:
  int M_ = 0, N_ = 0, L_ = 0, K_ = 0, P_ = 0;
  std::vector<std::vector<Coef>> by_delay_;  // delay column -> coefficient list
};

// Validates the channel is on grid (delays < L <= M) and assembles the
// operator.
DdChannelMatrix build(const DdChannel& ch, const GridParams& p);

}  // namespace oddm
