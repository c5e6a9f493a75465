#pragma once

#include "oddm/params.hpp"
#include "oddm/pulse.hpp"

namespace oddm {

/// Complex baseband samples on the global grid t = i*dt for
/// i in [start, start + samples.size()).
struct Waveform {
  VecXcd samples;
  long start = 0;
  double dt = 0.0;

  long size() const { return samples.size(); }
  double t0() const { return start * dt; }
  double energy() const { return samples.squaredNorm() * dt; }
};

/// M x N delay-Doppler symbol grid; row m = delay bin, column n = Doppler /
/// subcarrier bin.
using DdFrame = MatXcd;

// x = [x_0^T ... x_{M-1}^T]^T with x_m = row m of X; index m*N + n.
VecXcd vectorize(const DdFrame& X);
DdFrame unvectorize(const VecXcd& x, int M, int N);

// Staggered upsampled-OFDM sequence of length MN: sample q = m + M*nd
// carries (1/sqrt(N)) * sum_n X(m,n) e^{j2pi n nd / N}.
VecXcd digital_sequence(const DdFrame& X, const GridParams& p);
DdFrame digital_demap(const VecXcd& s, const GridParams& p);

// x(t) = sum_{m,n} X(m,n) u(t - mT/M) e^{j2pi n (t - mT/M)/(NT)} sampled at
// rate MJ/T. The train's cp_variant selects the plain frame (span
// [-QT/M, NT+QT/M]) or the CP-included one (span [-(L+Q-1)T/M, NT+QT/M]).
Waveform modulate(const DdFrame& X, const PulseTrain& train, const GridParams& p);

// Digital sequence (cyclically CP-extended when cp is set) upsampled by J
// and convolved with the prototype taps; approximates modulate.
Waveform modulate_filtered(const DdFrame& X, const ProtoPulse& proto,
                           const GridParams& p, bool cp = false);

// Matched filtering: Y(m,n) = dt-weighted inner product of y against
// u(t - mT/M) e^{j2pi n (t - mT/M)/(NT)}. Throws if y does not cover the
// matched-filter support.
DdFrame demodulate(const Waveform& y, const PulseTrain& train, const GridParams& p);

// OTFS baseline: same digital sequence held for J samples each (rectangular
// pulse), frame-level CP when cp is set; receiver samples the T/M grid and
// inverts the digital mapping.
Waveform otfs_modulate(const DdFrame& X, const GridParams& p, bool cp = false);
DdFrame otfs_demodulate(const Waveform& y, const GridParams& p);

}  // namespace oddm
