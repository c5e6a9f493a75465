#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oddm/harness.hpp"

namespace {

oddm::ExperimentSpec base_spec(const std::string& config_path, std::uint64_t seed,
                               const std::string& out) {
  oddm::ExperimentSpec spec;
  if (!config_path.empty()) spec.cfg = oddm::load_config(config_path);
  spec.seed = seed ? seed : spec.cfg.seed;
  spec.out_dir = out;
  return spec;
}

void add_channel_opts(CLI::App* cmd, oddm::ChannelSpec* ch, std::string* channel_file) {
  cmd->add_option("--channel-file", *channel_file,
                  "CSV path list (l,k,re,im); bypasses statistical generation");
  cmd->add_option("--paths", ch->n_paths, "random on-grid path count");
  cmd->add_option("--chan-L", ch->L, "channel delay span L");
  cmd->add_option("--chan-K", ch->K, "channel Doppler span K");
  cmd->add_option("--speed-kmh", ch->speed_kmh, "EVA/Jakes UE speed");
  cmd->add_option("--fc-hz", ch->fc_hz, "carrier frequency");
  cmd->add_flag_callback("--eva", [ch]() { ch->kind = oddm::ChannelKind::eva; },
                         "use the EVA/Jakes statistical channel");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ODDM delay-Doppler modulation simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, channel_file;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "key=value config file")->required(false);
  app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--out", out_dir, "output directory for CSV artifacts");

  auto* ortho = app.add_subcommand("ortho", "orthogonality audit of the transmit pulse");
  auto* psd = app.add_subcommand("psd", "Welch PSD comparison, ODDM vs OTFS");
  int psd_frames = 100;
  psd->add_option("--frames", psd_frames, "number of random frames to average");
  auto* ber = app.add_subcommand("ber", "Monte Carlo BER sweep, ODDM-MP vs OTFS-MP");
  std::vector<double> snrs{0, 2, 4, 6, 8, 10, 12, 14, 16};
  int trials = 100;
  bool with_mmse = false;
  bool full_scale = false;
  ber->add_option("--snr", snrs, "SNR points in dB");
  ber->add_option("--trials", trials, "Monte Carlo trials per SNR point");
  ber->add_flag("--mmse", with_mmse, "also run the MMSE reference");
  ber->add_flag("--full", full_scale, "allow full-scale geometry (slow)");
  auto* mc = app.add_subcommand("matrix-check", "waveform-vs-matrix equivalence check");
  auto* lb = app.add_subcommand("loopback", "modulate/demodulate loopback error");

  oddm::ChannelSpec ch;
  add_channel_opts(ber, &ch, &channel_file);
  add_channel_opts(mc, &ch, &channel_file);

  CLI11_PARSE(app, argc, argv);

  try {
    oddm::ExperimentSpec spec = base_spec(config_path, seed, out_dir);
    if (!channel_file.empty()) {
      ch.kind = oddm::ChannelKind::file;
      ch.path = channel_file;
    }
    spec.channel = ch;

    if (ortho->parsed()) {
      const auto res = oddm::run_ortho(spec);
      std::printf("origin            % .12e %+.12ei\n", res.report.origin.real(),
                  res.report.origin.imag());
      std::printf("exact-region max  %.6e  at (m=%d, n=%d)\n", res.report.exact_max,
                  res.report.exact_arg.m, res.report.exact_arg.n);
      std::printf("wrap-region max   %.6e  at (m=%d, n=%d)\n", res.report.wrap_max,
                  res.report.wrap_arg.m, res.report.wrap_arg.n);
    } else if (psd->parsed()) {
      spec.psd_frames = psd_frames;
      const auto res = oddm::run_psd(spec);
      std::printf("OOB gap at 1.3x half-band: %.2f dB\n", res.gap_db_at(1.3));
    } else if (ber->parsed()) {
      spec.snrs_db = snrs;
      spec.trials = trials;
      spec.with_mmse = with_mmse;
      const long mn = static_cast<long>(spec.cfg.grid.M) * spec.cfg.grid.N;
      if (mn > 4096 && !full_scale) {
        std::fprintf(stderr,
                     "ber: MN=%ld is full-scale; pass --full to confirm (slow)\n", mn);
        return 2;
      }
      if (full_scale && mn > 4096) {
        std::fprintf(stderr, "ber: running full-scale geometry, expect a long run\n");
      }
      const auto res = oddm::run_ber(spec);
      for (const auto& curve : res.curves) {
        for (const auto& pt : curve.points) {
          std::printf("%-10s snr=%5.1f dB  ber=%.3e  [%.3e, %.3e]  (%ld/%ld)\n",
                      curve.scheme.c_str(), pt.snr_db, pt.ber, pt.ci.lo, pt.ci.hi,
                      pt.bit_errors, pt.bits);
        }
      }
    } else if (mc->parsed()) {
      const auto res = oddm::run_matrix_check(spec);
      std::printf("max |demod(apply(mod(x))) - Hx|   %.6e\n", res.max_err);
      std::printf("dense vs sparse matvec            %.6e\n", res.dense_sparse_err);
    } else if (lb->parsed()) {
      const auto res = oddm::run_loopback(spec);
      std::printf("loopback max |Y - X|  %.6e\n", res.max_err);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
