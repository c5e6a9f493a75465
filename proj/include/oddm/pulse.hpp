#pragma once

#include <functional>

#include "oddm/params.hpp"

namespace oddm {

/// Sampled square-root Nyquist prototype a(t) on [-QT/M, +QT/M] at rate MJ/T.
/// taps[j] holds a((j - QJ) * dt); discrete energy sum(taps^2)*dt == 1/N.
struct ProtoPulse {
  VecXd taps;
  double rolloff = 0.0;
  int Q = 0;
  int J = 1;
  double dt = 0.0;
  double energy_target = 0.0;  // 1/N

  int half_len() const { return Q * J; }          // taps index of t = 0
  long size() const { return taps.size(); }       // 2QJ + 1
};

/// Transmit pulse train u(t) = sum_{nd} a(t - nd*T); nd runs 0..N-1, or
/// -1..N-1 for the CP variant u_cp. Samples live on the global grid
/// t = i*dt with i in [start, start + size).
struct PulseTrain {
  VecXd taps;
  long start = 0;       // grid index of taps[0]
  bool cp_variant = false;
  GridParams grid;
  double dt = 0.0;

  long size() const { return taps.size(); }
};

// Closed-form SRRC with interval T/M, truncated to +-QT/M. When refine is
// set (the default) the taps are adjusted by a minimal-norm Gauss-Newton
// step so the discrete autocorrelation vanishes at every nonzero lag m*J,
// then renormalized to energy 1/N. Throws on rolloff outside [0,1] or Q < 1.
ProtoPulse design_srrc(const GridParams& p, double rolloff, bool refine = true);

// Normalized autocorrelation sum(a[i]a[i-lag]) / sum(a^2) at lag m*J.
double proto_autocorr(const ProtoPulse& proto, int m);

PulseTrain build_train(const ProtoPulse& proto, const GridParams& p, bool cp = false);

// A_{u,u}(m*T/M, n/(NT)) by dt-weighted summation over the sample grid.
cxd ambiguity(const PulseTrain& train, int m, int n);

// Free mode: arbitrary (tau, nu); u(t - tau) is linearly interpolated
// between grid samples.
cxd ambiguity_at(const PulseTrain& train, double tau, double nu);

struct AuditPoint {
  int m = 0;
  int n = 0;
  double abs = 0.0;
};

/// Result of scanning |A_{u,u}| over the full DD grid |m|<=M-1, |n|<=N-1.
/// The exact region is |m| <= M-2Q; the wrap region is M-2Q < |m| <= M-1.
struct AuditReport {
  cxd origin;                    // A(0,0)
  double exact_max = 0.0;
  AuditPoint exact_arg;
  double wrap_max = 0.0;
  AuditPoint wrap_arg;
  std::vector<AuditPoint> worst_exact;  // top offenders, descending
  std::vector<AuditPoint> worst_wrap;
  int threads_used = 1;
};

AuditReport orthogonality_audit(const PulseTrain& train, const GridParams& p,
                                int threads = 0);

// Full-grid scan with a row callback; used by the audit CSV export.
// cb(m, n, A) is called for every grid point including the origin.
void ambiguity_scan(const PulseTrain& train, const GridParams& p,
                    const std::function<void(int, int, cxd)>& cb);

}  // namespace oddm
