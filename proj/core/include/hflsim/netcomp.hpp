#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hflsim/rng.hpp"

namespace hfl {

// Urban microcell radio parameters. Throughput follows capped Shannon
// capacity over the median UMi NLOS pathloss:
//
//   PL(d)  = 22.7 + 36.7*log10(d) + 26*log10(f_GHz)
//   SNR_dB = tx_power + antenna_gain - PL(d)
//            - (noise_density + 10*log10(B) + noise_figure)
//   theta  = B * min(spectral_cap, log2(1 + SNR) / capacity_loss)
//
// The default noise figure is an effective calibration constant (it absorbs
// the unspecified interference/noise budget) chosen so that the population
// mean throughput over uniform placement in the default 2-km cell is
// 1.4 Mbit/s; the cap puts the maximum at 8.64 Mbit/s.
struct CellConfig {
    double cell_radius_m = 2000.0;
    double carrier_freq_ghz = 2.5;
    double bs_antenna_height_m = 11.0;      // scenario record; the median UMi
    double client_antenna_height_m = 1.0;   // NLOS form does not use heights
    double tx_power_dbm = 20.0;
    double antenna_gain_dbi = 0.0;
    double rb_bandwidth_hz = 1.8e6;         // 10 resource blocks
    double capacity_loss = 1.6;             // Delta
    double spectral_cap = 4.8;              // rho_max, bit/s/Hz
    double noise_density_dbm_per_hz = -174.0;
    double noise_figure_db = -13.94;        // calibrated, see above

    std::vector<std::string> validate() const;
};

/// Per-client static capabilities used by the selection algorithms. Realized
/// per-round values fluctuate around these within +-fluctuation.
struct ClientResources {
    double avg_throughput_bps = 0.0;   // theta_avg
    double avg_capability_sps = 0.0;   // gamma_avg, samples per second
    double fluctuation = 0.0;          // r_var in [0, 1)
};

/// Median pathloss in dB at the given distance. Distances below the 10 m
/// model validity floor are clamped (a one-time warning goes to stderr).
double pathloss_db(double distance_m, const CellConfig& cfg);

/// Long-term average throughput in bit/s for a client at the given distance.
double mean_throughput_bps(double distance_m, const CellConfig& cfg);

/// One realized per-round value: truncated normal centered on avg with
/// sd = fluctuation*avg/2, truncated to [(1-fluctuation)*avg,
/// (1+fluctuation)*avg]. fluctuation = 0 returns avg without consuming draws.
double sample_round_value(double avg, double fluctuation, Rng& rng);

/// Seconds to run `epochs` passes over n_samples at `capability` samples/s.
double update_time_s(long long n_samples, int epochs, double capability_sps);

/// Seconds to push payload_bytes at throughput_bps.
double upload_time_s(long long payload_bytes, double throughput_bps);

/// Uniform position in the cell disc (two draws: radius, angle).
std::pair<double, double> random_position_in_cell(double cell_radius_m, Rng& rng);

}  // namespace hfl
