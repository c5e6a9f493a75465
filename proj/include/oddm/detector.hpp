#pragma once

#include "oddm/ddmatrix.hpp"
#include "oddm/params.hpp"

namespace oddm {

struct MpConfig {
  int max_iters = 30;
  double damping = 0.6;        // in (0, 1]
  double convergence_eps = 1e-6;
  bool early_stop = true;
  double noise_floor = 1e-10;  // replaces non-positive noise variances
};

struct DetectionResult {
  MatXcd hard_symbols;             // M x N constellation points
  std::vector<int> hard_index;     // MN symbol labels, row-major
  Eigen::MatrixXd posteriors;      // MN x |constellation|, rows sum to 1
  int iterations_used = 0;
  bool converged = false;
  bool noise_floored = false;
};

// Gaussian-approximation message passing on the P-sparse graph of H;
// flooding schedule, damped variable-to-observation pmf updates, per
// iteration cost O(MN * P * |constellation|).
DetectionResult mp_detect(const VecXcd& y, const DdChannelMatrix& Hm,
                          const QamConstellation& constellation, double noise_var,
                          const MpConfig& cfg = {});

// Same detector over an explicit sparse operator; rows/cols index a
// dim = M*N system.
DetectionResult mp_detect(const VecXcd& y,
                          const std::vector<std::tuple<int, int, cxd>>& triplets,
                          int M, int N, const QamConstellation& constellation,
                          double noise_var, const MpConfig& cfg = {});

// Linear MMSE equalization then per-entry slicing; dense solve, MN <= 4096.
DetectionResult mmse_detect(const VecXcd& y, const DdChannelMatrix& Hm,
                            const QamConstellation& constellation, double noise_var);

// Exhaustive minimization of ||y - Hx||^2; requires
// |constellation|^(MN) <= 2^20.
DetectionResult map_bruteforce(const VecXcd& y, const DdChannelMatrix& Hm,
                               const QamConstellation& constellation,
                               double noise_var);

}  // namespace oddm
