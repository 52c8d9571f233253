#include "hflsim/netcomp.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace hfl {

namespace {
constexpr double kMinModelDistanceM = 10.0;
}

std::vector<std::string> CellConfig::validate() const {
    std::vector<std::string> errors;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0)) errors.push_back(std::string("cell: ") + name + " must be > 0");
    };
    positive(cell_radius_m, "cell_radius_m");
    positive(carrier_freq_ghz, "carrier_freq_ghz");
    positive(bs_antenna_height_m, "bs_antenna_height_m");
    positive(client_antenna_height_m, "client_antenna_height_m");
    positive(rb_bandwidth_hz, "rb_bandwidth_hz");
    positive(spectral_cap, "spectral_cap");
    if (!(capacity_loss >= 1.0)) errors.push_back("cell: capacity_loss must be >= 1");
    return errors;
}

double pathloss_db(double distance_m, const CellConfig& cfg) {
    if (distance_m < kMinModelDistanceM) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "hflsim: pathloss distance below 10 m clamped to model floor\n";
        distance_m = kMinModelDistanceM;
    }
    return 22.7 + 36.7 * std::log10(distance_m) + 26.0 * std::log10(cfg.carrier_freq_ghz);
}

double mean_throughput_bps(double distance_m, const CellConfig& cfg) {
    const double noise_dbm = cfg.noise_density_dbm_per_hz +
                             10.0 * std::log10(cfg.rb_bandwidth_hz) + cfg.noise_figure_db;
    const double snr_db = cfg.tx_power_dbm + cfg.antenna_gain_dbi -
                          pathloss_db(distance_m, cfg) - noise_dbm;
    const double snr = std::pow(10.0, snr_db / 10.0);
    const double efficiency = std::log2(1.0 + snr) / cfg.capacity_loss;
    return cfg.rb_bandwidth_hz * std::min(cfg.spectral_cap, efficiency);
}

double sample_round_value(double avg, double fluctuation, Rng& rng) {
    if (!(avg > 0.0)) throw std::invalid_argument("sample_round_value: avg must be > 0");
    if (fluctuation < 0.0 || fluctuation >= 1.0)
        throw std::invalid_argument("sample_round_value: fluctuation must be in [0, 1)");
    if (fluctuation == 0.0) return avg;
    const double half_width = fluctuation * avg;
    return rng.truncated_normal(avg, half_width / 2.0, avg - half_width, avg + half_width);
}

double update_time_s(long long n_samples, int epochs, double capability_sps) {
    if (!(capability_sps > 0.0))
        throw std::invalid_argument("update_time_s: capability must be > 0");
    if (n_samples < 0 || epochs < 0)
        throw std::invalid_argument("update_time_s: negative sample or epoch count");
    return static_cast<double>(epochs) * static_cast<double>(n_samples) / capability_sps;
}

double upload_time_s(long long payload_bytes, double throughput_bps) {
    if (!(throughput_bps > 0.0))
        throw std::invalid_argument("upload_time_s: throughput must be > 0");
    if (payload_bytes < 0) throw std::invalid_argument("upload_time_s: negative payload");
    return 8.0 * static_cast<double>(payload_bytes) / throughput_bps;
}

std::pair<double, double> random_position_in_cell(double cell_radius_m, Rng& rng) {
    const double r = cell_radius_m * std::sqrt(rng.uniform01());
    const double phi = 2.0 * std::numbers::pi * rng.uniform01();
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace hfl
