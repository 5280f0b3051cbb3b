#include "vfdt_rf/txchain.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "vfdt_rf/error.hpp"

namespace vfdt_rf {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_finite(double v, const char* name) {
    if (std::isnan(v)) throw Error(ErrorCode::BadArgument, std::string(name) + " is NaN");
}

IQSignal scale_signal(const IQSignal& sig, double g) {
    std::vector<double> i(sig.i().begin(), sig.i().end());
    std::vector<double> q(sig.q().begin(), sig.q().end());
    for (double& v : i) v *= g;
    for (double& v : q) v *= g;
    return IQSignal(std::move(i), std::move(q), sig.sample_rate_hz());
}

}  // namespace

void ImpairmentProfile::validate() const {
    require_finite(iip3_dbm, "iip3_dbm");
    if (std::isinf(iip3_dbm) && iip3_dbm < 0) {
        throw Error(ErrorCode::BadArgument, "iip3_dbm must not be -inf");
    }
    if (!(iq_imbalance_db >= 0.0) || !std::isfinite(iq_imbalance_db)) {
        throw Error(ErrorCode::NegativeImbalance, "iq_imbalance_db must be finite and >= 0");
    }
    if (!(phase_noise_max_offset_hz >= 0.0) || !std::isfinite(phase_noise_max_offset_hz)) {
        throw Error(ErrorCode::NegativeOffset, "phase_noise_max_offset_hz must be finite and >= 0");
    }
    if (!std::isfinite(cfo_hz)) throw Error(ErrorCode::BadArgument, "cfo_hz must be finite");
}

void ChannelProfile::validate() const {
    if (location_id.empty()) throw Error(ErrorCode::BadArgument, "location_id is empty");
    if (!std::isfinite(gain_db)) throw Error(ErrorCode::BadArgument, "gain_db must be finite");
    require_finite(snr_db, "snr_db");
    if (std::isinf(snr_db) && snr_db < 0) throw Error(ErrorCode::BadArgument, "snr_db must not be -inf");
}

std::string_view to_string(PulseShape shape) {
    return shape == PulseShape::Rectangular ? "rect" : "rrc";
}

PulseShape parse_pulse_shape(std::string_view text) {
    if (text == "rect" || text == "rectangular") return PulseShape::Rectangular;
    if (text == "rrc") return PulseShape::RootRaisedCosine;
    throw Error(ErrorCode::BadArgument, "unknown pulse shape '" + std::string(text) + "'");
}

std::vector<std::uint8_t> generate_payload(std::size_t n_bits, RandomSource& rng) {
    if (n_bits < 2 || n_bits % 2 != 0) {
        throw Error(ErrorCode::OddBitCount, "payload needs an even number >= 2 of bits, got " +
                                                std::to_string(n_bits));
    }
    std::vector<std::uint8_t> bits(n_bits);
    std::uint64_t word = 0;
    for (std::size_t n = 0; n < n_bits; ++n) {
        if (n % 64 == 0) word = rng.next_u64();
        bits[n] = static_cast<std::uint8_t>((word >> (n % 64)) & 1U);
    }
    return bits;
}

std::vector<double> rrc_taps(double rolloff, std::size_t span_symbols, std::size_t sps) {
    const std::size_t len = span_symbols * sps + 1;
    const double half = static_cast<double>(span_symbols * sps) / 2.0;
    const double b = rolloff;
    std::vector<double> h(len);
    double energy = 0.0;
    for (std::size_t n = 0; n < len; ++n) {
        const double t = (static_cast<double>(n) - half) / static_cast<double>(sps);
        double v;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - b + 4.0 * b / std::numbers::pi;
        } else if (b > 0.0 && std::abs(std::abs(4.0 * b * t) - 1.0) < 1e-9) {
            v = b / std::numbers::sqrt2 *
                ((1.0 + 2.0 / std::numbers::pi) * std::sin(std::numbers::pi / (4.0 * b)) +
                 (1.0 - 2.0 / std::numbers::pi) * std::cos(std::numbers::pi / (4.0 * b)));
        } else {
            const double pt = std::numbers::pi * t;
            v = (std::sin(pt * (1.0 - b)) + 4.0 * b * t * std::cos(pt * (1.0 + b))) /
                (pt * (1.0 - (4.0 * b * t) * (4.0 * b * t)));
        }
        h[n] = v;
        energy += v * v;
    }
    const double norm = 1.0 / std::sqrt(energy);
    for (double& v : h) v *= norm;
    return h;
}

IQSignal qam4_modulate(std::span<const std::uint8_t> bits, std::size_t samples_per_symbol,
                       double sample_rate_hz, PulseShape shape) {
    if (bits.size() < 2 || bits.size() % 2 != 0) {
        throw Error(ErrorCode::OddBitCount, "4-QAM needs an even number >= 2 of bits");
    }
    if (samples_per_symbol < 1) throw Error(ErrorCode::BadArgument, "samples_per_symbol must be >= 1");
    const std::size_t n_sym = bits.size() / 2;
    const std::size_t sps = samples_per_symbol;
    const double a = 1.0 / std::numbers::sqrt2;
    std::vector<double> si(n_sym), sq(n_sym);
    for (std::size_t k = 0; k < n_sym; ++k) {
        si[k] = bits[2 * k] ? -a : a;
        sq[k] = bits[2 * k + 1] ? -a : a;
    }
    std::vector<double> i(n_sym * sps), q(n_sym * sps);
    if (shape == PulseShape::Rectangular) {
        for (std::size_t k = 0; k < n_sym; ++k) {
            for (std::size_t s = 0; s < sps; ++s) {
                i[k * sps + s] = si[k];
                q[k * sps + s] = sq[k];
            }
        }
    } else {
        constexpr std::size_t span = 8;
        const auto h = rrc_taps(0.35, span, sps);
        const double scale = std::sqrt(static_cast<double>(sps));
        const auto center = static_cast<std::ptrdiff_t>(span * sps / 2);
        const auto out_len = static_cast<std::ptrdiff_t>(i.size());
        for (std::size_t k = 0; k < n_sym; ++k) {
            const auto peak = static_cast<std::ptrdiff_t>(k * sps);
            for (std::size_t t = 0; t < h.size(); ++t) {
                const std::ptrdiff_t n = peak + static_cast<std::ptrdiff_t>(t) - center;
                if (n < 0 || n >= out_len) continue;
                i[static_cast<std::size_t>(n)] += scale * h[t] * si[k];
                q[static_cast<std::size_t>(n)] += scale * h[t] * sq[k];
            }
        }
    }
    return IQSignal(std::move(i), std::move(q), sample_rate_hz);
}

double pa_cubic_coefficient(double iip3_dbm) {
    if (std::isinf(iip3_dbm) && iip3_dbm > 0) return 0.0;
    constexpr double reference_ohms = 1.0;
    const double intercept_watts = std::pow(10.0, (iip3_dbm - 30.0) / 10.0);
    const double a_squared = 2.0 * reference_ohms * intercept_watts;
    return -(4.0 / 3.0) / a_squared;
}

IQSignal pa_nonlinearity(const IQSignal& sig, double iip3_dbm) {
    if (std::isnan(iip3_dbm) || (std::isinf(iip3_dbm) && iip3_dbm < 0)) {
        throw Error(ErrorCode::BadArgument, "iip3_dbm must be a number or +inf");
    }
    const double g3 = pa_cubic_coefficient(iip3_dbm);
    if (g3 == 0.0) return sig;
    std::vector<double> i(sig.size()), q(sig.size());
    for (std::size_t n = 0; n < sig.size(); ++n) {
        const double xi = sig.i()[n], xq = sig.q()[n];
        const double gain = 1.0 + g3 * (xi * xi + xq * xq);
        i[n] = gain * xi;
        q[n] = gain * xq;
    }
    return IQSignal(std::move(i), std::move(q), sig.sample_rate_hz());
}

IQSignal iq_imbalance(const IQSignal& sig, double imbalance_db) {
    if (!(imbalance_db >= 0.0) || !std::isfinite(imbalance_db)) {
        throw Error(ErrorCode::NegativeImbalance, "imbalance_db must be finite and >= 0");
    }
    if (imbalance_db == 0.0) return sig;
    const double gi = std::pow(10.0, imbalance_db / 40.0);
    const double gq = std::pow(10.0, -imbalance_db / 40.0);
    std::vector<double> i(sig.i().begin(), sig.i().end());
    std::vector<double> q(sig.q().begin(), sig.q().end());
    for (double& v : i) v *= gi;
    for (double& v : q) v *= gq;
    return IQSignal(std::move(i), std::move(q), sig.sample_rate_hz());
}

IQSignal phase_noise(const IQSignal& sig, double max_offset_hz, RandomSource& rng) {
    if (!(max_offset_hz >= 0.0) || !std::isfinite(max_offset_hz)) {
        throw Error(ErrorCode::NegativeOffset, "max_offset_hz must be finite and >= 0");
    }
    if (max_offset_hz == 0.0) return sig;
    const double fs = sig.sample_rate_hz();
    // y[n] = (1 - a) w[n] + a y[n-1]; stationary std = (1 - a) / sqrt(1 - a^2) for unit w.
    const double a = std::exp(-two_pi / 1000.0);
    const double stationary_std = (1.0 - a) / std::sqrt(1.0 - a * a);
    const double freq_scale = (max_offset_hz / 3.0) / stationary_std;
    std::vector<double> i(sig.size()), q(sig.size());
    double filtered = 0.0;
    double phase = 0.0;
    for (std::size_t n = 0; n < sig.size(); ++n) {
        filtered = (1.0 - a) * rng.gaussian() + a * filtered;
        phase += two_pi * freq_scale * filtered / fs;
        const double c = std::cos(phase), s = std::sin(phase);
        const double xi = sig.i()[n], xq = sig.q()[n];
        i[n] = xi * c - xq * s;
        q[n] = xi * s + xq * c;
    }
    return IQSignal(std::move(i), std::move(q), sig.sample_rate_hz());
}

IQSignal apply_cfo(const IQSignal& sig, double cfo_hz, double initial_phase_rad) {
    if (!std::isfinite(cfo_hz) || !std::isfinite(initial_phase_rad)) {
        throw Error(ErrorCode::BadArgument, "cfo_hz and initial phase must be finite");
    }
    if (cfo_hz == 0.0 && initial_phase_rad == 0.0) return sig;
    const double step = two_pi * cfo_hz / sig.sample_rate_hz();
    std::vector<double> i(sig.size()), q(sig.size());
    for (std::size_t n = 0; n < sig.size(); ++n) {
        // Phase from n directly so error does not accumulate over long recordings.
        const double phase = std::fmod(step * static_cast<double>(n), two_pi) + initial_phase_rad;
        const double c = std::cos(phase), s = std::sin(phase);
        const double xi = sig.i()[n], xq = sig.q()[n];
        i[n] = xi * c - xq * s;
        q[n] = xi * s + xq * c;
    }
    return IQSignal(std::move(i), std::move(q), sig.sample_rate_hz());
}

IQSignal apply_channel(const IQSignal& sig, const ChannelProfile& ch, RandomSource& rng) {
    ch.validate();
    const double g = std::pow(10.0, ch.gain_db / 20.0);
    std::vector<double> i(sig.i().begin(), sig.i().end());
    std::vector<double> q(sig.q().begin(), sig.q().end());
    if (ch.gain_db != 0.0) {
        for (double& v : i) v *= g;
        for (double& v : q) v *= g;
    }
    if (std::isfinite(ch.snr_db)) {
        double power = 0.0;
        for (std::size_t n = 0; n < i.size(); ++n) power += i[n] * i[n] + q[n] * q[n];
        power /= static_cast<double>(i.size());
        const double sigma = std::sqrt(power / std::pow(10.0, ch.snr_db / 10.0) / 2.0);
        for (std::size_t n = 0; n < i.size(); ++n) {
            i[n] += sigma * rng.gaussian();
            q[n] += sigma * rng.gaussian();
        }
    }
    return IQSignal(std::move(i), std::move(q), sig.sample_rate_hz());
}

IQSignal synth_device(const ImpairmentProfile& profile, const SynthOptions& opts, RandomSource& rng,
                      std::span<const std::uint8_t> payload) {
    profile.validate();
    std::vector<std::uint8_t> own;
    if (payload.empty()) {
        own = generate_payload(opts.n_bits, rng);
        payload = own;
    }
    auto sig = qam4_modulate(payload, opts.samples_per_symbol, opts.sample_rate_hz, opts.shape);
    sig = iq_imbalance(sig, profile.iq_imbalance_db);
    RandomSource pn_rng = rng.split(1);
    sig = phase_noise(sig, profile.phase_noise_max_offset_hz, pn_rng);
    const double lo_phase = profile.cfo_hz != 0.0 ? two_pi * rng.uniform() : 0.0;
    sig = apply_cfo(sig, profile.cfo_hz, lo_phase);
    if (opts.pa_drive_db != 0.0) {
        sig = scale_signal(sig, std::pow(10.0, opts.pa_drive_db / 20.0));
    }
    return pa_nonlinearity(sig, profile.iip3_dbm);
}

std::string device_name(std::size_t index) {
    std::string s = std::to_string(index);
    return "dev" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

ImpairmentProfile sample_profile(const ProfileRanges& r, RandomSource& rng) {
    ImpairmentProfile p;
    p.iip3_dbm = rng.uniform(r.iip3_dbm.lo, r.iip3_dbm.hi);
    p.iq_imbalance_db = rng.uniform(r.iq_imbalance_db.lo, r.iq_imbalance_db.hi);
    p.phase_noise_max_offset_hz = rng.uniform(r.phase_noise_max_offset_hz.lo, r.phase_noise_max_offset_hz.hi);
    p.cfo_hz = rng.uniform(r.cfo_hz.lo, r.cfo_hz.hi);
    return p;
}

std::vector<ImpairmentProfile> fleet_profiles(std::size_t n_devices, const ProfileRanges& ranges,
                                              const RandomSource& rng) {
    if (n_devices == 0) throw Error(ErrorCode::EmptyFleet, "fleet needs at least one device");
    RandomSource profile_rng = rng.split(0);
    std::vector<ImpairmentProfile> out;
    out.reserve(n_devices);
    for (std::size_t d = 0; d < n_devices; ++d) out.push_back(sample_profile(ranges, profile_rng));
    return out;
}

FleetRecording synth_fleet_recording(std::size_t device, std::size_t location,
                                     std::span<const ImpairmentProfile> profiles,
                                     std::span<const ChannelProfile> locations, const FleetOptions& opts,
                                     const RandomSource& rng) {
    std::vector<std::uint8_t> payload;
    if (opts.shared_payload) {
        RandomSource msg_rng = rng.split(1);
        payload = generate_payload(opts.synth.n_bits, msg_rng);
    }
    const std::uint64_t stream = 16 + device * locations.size() + location;
    RandomSource rec_rng = rng.split(stream);
    RandomSource tx_rng = rec_rng.split(0);
    RandomSource ch_rng = rec_rng.split(1);
    auto sig = synth_device(profiles[device], opts.synth, tx_rng, payload);
    sig = apply_channel(sig, locations[location], ch_rng);
    return FleetRecording{device_name(device), locations[location].location_id, profiles[device], std::move(sig)};
}

std::vector<FleetRecording> synth_fleet(std::size_t n_devices, std::span<const ChannelProfile> locations,
                                        const FleetOptions& opts, const RandomSource& rng) {
    if (n_devices == 0) throw Error(ErrorCode::EmptyFleet, "fleet needs at least one device");
    if (locations.empty()) throw Error(ErrorCode::NoLocations, "fleet needs at least one location");
    for (const auto& loc : locations) loc.validate();
    const auto profiles = fleet_profiles(n_devices, opts.ranges, rng);
    std::vector<FleetRecording> out;
    out.reserve(n_devices * locations.size());
    for (std::size_t d = 0; d < n_devices; ++d) {
        for (std::size_t l = 0; l < locations.size(); ++l) {
            out.push_back(synth_fleet_recording(d, l, profiles, locations, opts, rng));
        }
    }
    return out;
}

}  // namespace vfdt_rf
