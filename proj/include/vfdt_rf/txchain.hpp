#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfdt_rf/random.hpp"
#include "vfdt_rf/signal.hpp"

namespace vfdt_rf {

// Hardware truth for one simulated transmitter.
struct ImpairmentProfile {
    double iip3_dbm = std::numeric_limits<double>::infinity();  // +inf: linear PA
    double iq_imbalance_db = 0.0;                                // total amplitude imbalance
    double phase_noise_max_offset_hz = 0.0;                      // 3-sigma frequency deviation
    double cfo_hz = 0.0;

    void validate() const;
};

struct ChannelProfile {
    double gain_db = 0.0;
    double snr_db = std::numeric_limits<double>::infinity();  // +inf: noiseless
    std::string location_id = "loc1";

    void validate() const;
};

enum class PulseShape { Rectangular, RootRaisedCosine };

std::string_view to_string(PulseShape shape);
PulseShape parse_pulse_shape(std::string_view text);

std::vector<std::uint8_t> generate_payload(std::size_t n_bits, RandomSource& rng);

// Root-raised-cosine taps, unit energy, length span_symbols * sps + 1.
std::vector<double> rrc_taps(double rolloff, std::size_t span_symbols, std::size_t sps);

// Gray-mapped 4-QAM: bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
// Rectangular shaping holds each symbol for sps samples. RRC shaping (roll-off
// 0.35, span 8) places symbol k's peak at sample k * sps and scales the taps by
// sqrt(sps) so the mean sample power matches the rectangular case.
IQSignal qam4_modulate(std::span<const std::uint8_t> bits, std::size_t samples_per_symbol,
                       double sample_rate_hz = 1.0, PulseShape shape = PulseShape::Rectangular);

// Memoryless cubic PA referenced to 1 ohm: y = x + g3 |x|^2 x with
// g3 = -(4/3) / A^2 and A^2 = 2 * 10^((iip3_dbm - 30) / 10).
double pa_cubic_coefficient(double iip3_dbm);
IQSignal pa_nonlinearity(const IQSignal& sig, double iip3_dbm);

// I scaled by 10^(+db/40), Q by 10^(-db/40). No phase mismatch.
IQSignal iq_imbalance(const IQSignal& sig, double imbalance_db);

// Single-pole low-pass (cutoff fs / 1000) filtered Gaussian frequency
// deviation, scaled so 3 sigma of the stationary process equals
// max_offset_hz, integrated into phase.
IQSignal phase_noise(const IQSignal& sig, double max_offset_hz, RandomSource& rng);

// y[n] = x[n] e^{j (2 pi cfo n / fs + initial_phase)}.
IQSignal apply_cfo(const IQSignal& sig, double cfo_hz, double initial_phase_rad = 0.0);

// Flat gain followed by complex AWGN at snr_db relative to the scaled signal power.
IQSignal apply_channel(const IQSignal& sig, const ChannelProfile& ch, RandomSource& rng);

struct SynthOptions {
    std::size_t n_bits = 16000;
    std::size_t samples_per_symbol = 4;
    double sample_rate_hz = 1024.0;
    PulseShape shape = PulseShape::Rectangular;
    // Amplitude gain applied ahead of the PA; sets the PA drive level.
    double pa_drive_db = 0.0;
};

// qam4 -> iq_imbalance -> phase_noise -> apply_cfo -> pa_nonlinearity.
// The payload is drawn from `rng` unless `payload` is non-empty. The LO phase
// at capture start is drawn uniformly from `rng` when cfo_hz != 0.
IQSignal synth_device(const ImpairmentProfile& profile, const SynthOptions& opts, RandomSource& rng,
                      std::span<const std::uint8_t> payload = {});

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct ProfileRanges {
    Range iip3_dbm{20.0, 40.0};
    Range iq_imbalance_db{0.0, 8.0};
    Range phase_noise_max_offset_hz{10.0, 50.0};
    Range cfo_hz{-50e3, 50e3};
};

struct FleetOptions {
    SynthOptions synth;
    ProfileRanges ranges;
    // Every device transmits the same message, as a fleet running identical
    // firmware would. When false each recording gets its own payload.
    bool shared_payload = true;
};

struct FleetRecording {
    std::string device_id;
    std::string location_id;
    ImpairmentProfile profile;
    IQSignal signal;
};

std::string device_name(std::size_t index);
ImpairmentProfile sample_profile(const ProfileRanges& ranges, RandomSource& rng);

// Profiles are drawn once per device and reused at every location; recording
// (d, l) uses child stream d * locations.size() + l so output does not depend
// on evaluation order.
std::vector<ImpairmentProfile> fleet_profiles(std::size_t n_devices, const ProfileRanges& ranges,
                                              const RandomSource& rng);
FleetRecording synth_fleet_recording(std::size_t device, std::size_t location,
                                     std::span<const ImpairmentProfile> profiles,
                                     std::span<const ChannelProfile> locations, const FleetOptions& opts,
                                     const RandomSource& rng);
std::vector<FleetRecording> synth_fleet(std::size_t n_devices, std::span<const ChannelProfile> locations,
                                        const FleetOptions& opts, const RandomSource& rng);

}  // namespace vfdt_rf
