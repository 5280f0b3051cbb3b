#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "check_code.hpp"
#include "oracles.hpp"
#include "vfdt_rf/txchain.hpp"
#include "vfdt_rf/vfdt.hpp"

using namespace vfdt_rf;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
const double r2 = 1.0 / std::sqrt(2.0);

IQSignal test_signal(std::size_t n_bits = 4000, std::uint64_t seed = 1, std::size_t sps = 4) {
    RandomSource rng(seed);
    return qam4_modulate(generate_payload(n_bits, rng), sps, 1000.0);
}

double mean_power(const IQSignal& s) {
    double p = 0;
    for (std::size_t n = 0; n < s.size(); ++n) p += std::norm(s[n]);
    return p / static_cast<double>(s.size());
}

}  // namespace

TEST_CASE("payload length, determinism and bit values") {
    RandomSource a(11);
    const auto bits = generate_payload(16000, a);
    CHECK(bits.size() == 16000);
    for (auto b : bits) REQUIRE(b <= 1);
    RandomSource b(11), c(11);
    CHECK(generate_payload(2, b) == generate_payload(2, c));
    RandomSource d(11);
    CHECK_ERROR_CODE(generate_payload(3, d), ErrorCode::OddBitCount);
    CHECK_ERROR_CODE(generate_payload(0, d), ErrorCode::OddBitCount);
}

TEST_CASE("Gray-mapped constellation points") {
    const std::vector<std::uint8_t> bits{0, 0, 1, 0, 0, 1, 1, 1};
    const auto s = qam4_modulate(bits, 1);
    REQUIRE(s.size() == 4);
    CHECK(s[0] == std::complex<double>(r2, r2));
    CHECK(s[1] == std::complex<double>(-r2, r2));
    CHECK(s[2] == std::complex<double>(r2, -r2));
    CHECK(s[3] == std::complex<double>(-r2, -r2));
    const std::vector<std::uint8_t> odd{0, 1, 1};
    CHECK_ERROR_CODE(qam4_modulate(odd, 1), ErrorCode::OddBitCount);
}

TEST_CASE("16000 bits at 4 samples per symbol give 32000 samples") {
    CHECK(test_signal(16000).size() == 32000);
}

TEST_CASE("rectangular 4-QAM is constant modulus for any payload") {
    const std::vector<std::uint8_t> same(2000, 1);
    const auto flat = qam4_modulate(same, 4).magnitude();
    const auto rnd = test_signal(2000).magnitude();
    REQUIRE(flat.size() == rnd.size());
    for (std::size_t n = 0; n < flat.size(); ++n) REQUIRE(std::abs(flat[n] - rnd[n]) < 1e-15);
}

TEST_CASE("RRC shaping keeps unit mean power and peaks on the symbol") {
    const auto taps = rrc_taps(0.35, 8, 4);
    CHECK(taps.size() == 33);
    double e = 0;
    for (double t : taps) e += t * t;
    CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
    RandomSource rng(2);
    const auto s = qam4_modulate(generate_payload(20000, rng), 4, 1.0, PulseShape::RootRaisedCosine);
    CHECK(s.size() == 40000);
    CHECK(mean_power(s) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("linear PA is an exact identity") {
    const auto s = test_signal();
    CHECK(pa_nonlinearity(s, inf) == s);
    CHECK(pa_cubic_coefficient(inf) == 0.0);
}

TEST_CASE("PA cubic coefficient at 30 dBm") {
    CHECK(pa_cubic_coefficient(30.0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
    const double a = 0.1;  // |x|^2 = 0.01
    const auto s = IQSignal::from_complex(std::vector<std::complex<double>>{std::polar(a, 0.3)}, 1.0);
    const auto y = pa_nonlinearity(s, 30.0);
    CHECK(std::abs(y[0]) / a == doctest::Approx(1.0 - 0.01 * 2.0 / 3.0).epsilon(1e-12));
    CHECK(std::arg(y[0]) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("two-tone test puts the extrapolated intercept at the configured IIP3") {
    const std::size_t n = 4096, k1 = 100, k2 = 110;
    for (double iip3 : {10.0, 20.0, 30.0, 40.0}) {
        // small-signal real two-tone at the input of the cubic model
        const double a = 0.01 * std::sqrt(2.0 * std::pow(10.0, (iip3 - 30.0) / 10.0));
        std::vector<double> i(n), q(n, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double w = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
            i[t] = a * (std::cos(w * k1) + std::cos(w * k2));
        }
        const auto y = pa_nonlinearity(IQSignal(i, q, 1.0), iip3);
        const double fund = oracle::tone_amplitude(y.i(), k1);
        const double im3 = oracle::tone_amplitude(y.i(), 2 * k1 - k2);
        const auto dbm = [](double amp) { return 10.0 * std::log10(amp * amp / 2.0) + 30.0; };
        const double p_in = dbm(a);
        const double measured = p_in + (dbm(fund) - dbm(im3)) / 2.0;
        CAPTURE(iip3);
        CHECK(measured == doctest::Approx(iip3).epsilon(1e-3));
    }
}

TEST_CASE("IQ imbalance splits the amplitude mismatch evenly") {
    const auto s = test_signal();
    CHECK(iq_imbalance(s, 0.0) == s);
    const auto y = iq_imbalance(s, 8.0);
    for (std::size_t n = 0; n < s.size(); n += 97) {
        CHECK(y[n].real() == doctest::Approx(s[n].real() * std::pow(10.0, 0.2)));
        CHECK(y[n].imag() == doctest::Approx(s[n].imag() * std::pow(10.0, -0.2)));
    }
    CHECK_ERROR_CODE(iq_imbalance(s, -1.0), ErrorCode::NegativeImbalance);
}

TEST_CASE("8 dB imbalance shifts the I and Q dimensions by 0.06644 at w = 1024") {
    const auto s = test_signal(2048, 5);
    const auto y = iq_imbalance(s, 8.0);
    std::span<const double> si = s.i().first(1024), sq = s.q().first(1024);
    std::span<const double> yi = y.i().first(1024), yq = y.q().first(1024);
    const double expected = std::log(std::pow(10.0, 8.0 / 40.0)) / std::log(1024.0);
    CHECK(expected == doctest::Approx(0.06644).epsilon(1e-4));
    CHECK(variance_dimension(yi).d - variance_dimension(si).d == doctest::Approx(-expected).epsilon(1e-9));
    CHECK(variance_dimension(yq).d - variance_dimension(sq).d == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("imbalance sweep moves I down and Q up") {
    const auto s = test_signal(16000, 6);
    double last_i = inf, last_q = -inf;
    for (double db : {0.0, 2.0, 4.0, 6.0, 8.0}) {
        const auto y = iq_imbalance(s, db);
        const auto ti = vfdt_trajectory(y.i(), {256, 64}).values;
        const auto tq = vfdt_trajectory(y.q(), {256, 64}).values;
        const double mi = oracle::mean(ti), mq = oracle::mean(tq);
        CHECK(mi < last_i);
        CHECK(mq > last_q);
        last_i = mi;
        last_q = mq;
    }
}

TEST_CASE("phase noise is a pure rotation") {
    const auto s = test_signal(8000, 7);
    RandomSource r0(1);
    CHECK(phase_noise(s, 0.0, r0) == s);
    for (double hz : {10.0, 50.0, 400.0}) {
        RandomSource rng(8);
        const auto y = phase_noise(s, hz, rng);
        REQUIRE(y.size() == s.size());
        for (std::size_t n = 0; n < s.size(); ++n) REQUIRE(std::abs(std::abs(y[n]) - std::abs(s[n])) < 1e-12);
    }
    RandomSource rng(1);
    CHECK_ERROR_CODE(phase_noise(s, -1.0, rng), ErrorCode::NegativeOffset);
}

TEST_CASE("phase noise frequency deviation has 3 sigma at the configured offset") {
    const std::size_t n = 400000;
    const std::vector<double> ones(n, 1.0), zeros(n, 0.0);
    RandomSource rng(9);
    const double fs = 1000.0, max_hz = 30.0;
    const auto y = phase_noise(IQSignal(ones, zeros, fs), max_hz, rng);
    const auto ph = y.unwrapped_phase();
    std::vector<double> f(n - 1);
    for (std::size_t k = 1; k < n; ++k) f[k - 1] = (ph[k] - ph[k - 1]) * fs / (2.0 * std::numbers::pi);
    // correlation time is ~160 samples, so 4e5 samples pin sigma to a few percent
    CHECK(3.0 * std::sqrt(oracle::variance(f)) == doctest::Approx(max_hz).epsilon(0.1));
}

TEST_CASE("CFO at a quarter of the sample rate cycles with period 4") {
    const std::vector<double> ones(16, 1.0), zeros(16, 0.0);
    const IQSignal s(ones, zeros, 4000.0);
    CHECK(apply_cfo(s, 0.0) == s);
    const auto y = apply_cfo(s, 1000.0);
    const double pattern[4] = {1.0, 0.0, -1.0, 0.0};
    for (std::size_t n = 0; n < 16; ++n) {
        CHECK(std::abs(y.i()[n] - pattern[n % 4]) < 1e-12);
        CHECK(std::abs(y.q()[n] - pattern[(n + 3) % 4]) < 1e-12);
    }
    const auto z = apply_cfo(s, 0.0, std::numbers::pi / 2);
    CHECK(std::abs(z.i()[0]) < 1e-12);
    CHECK(z.q()[0] == doctest::Approx(1.0));
}

TEST_CASE("channel gain and noise") {
    const auto s = test_signal(4000, 10);
    RandomSource rng(1);
    CHECK(apply_channel(s, ChannelProfile{}, rng) == s);
    const auto half = apply_channel(s, ChannelProfile{-6.0, inf, "loc"}, rng);
    const double minus6 = std::pow(10.0, -6.0 / 20.0);  // 0.501, "halved"
    for (std::size_t n = 0; n < s.size(); ++n) REQUIRE(std::abs(std::abs(half[n]) / std::abs(s[n]) - minus6) < 1e-3);

    const auto big = test_signal(50000, 11);  // 100000 samples
    RandomSource noise(12);
    const double gain_db = -3.0;
    const auto y = apply_channel(big, ChannelProfile{gain_db, 20.0, "loc"}, noise);
    const double g = std::pow(10.0, gain_db / 20.0);
    double ps = 0, pn = 0;
    for (std::size_t n = 0; n < big.size(); ++n) {
        ps += std::norm(g * big[n]);
        pn += std::norm(y[n] - g * big[n]);
    }
    CHECK(std::abs(10.0 * std::log10(ps / pn) - 20.0) < 0.2);
}

TEST_CASE("property: every stage preserves length") {
    const auto s = test_signal(1234 * 2, 13, 3);
    RandomSource rng(14);
    CHECK(pa_nonlinearity(s, 25.0).size() == s.size());
    CHECK(iq_imbalance(s, 3.0).size() == s.size());
    CHECK(phase_noise(s, 20.0, rng).size() == s.size());
    CHECK(apply_cfo(s, 12.0).size() == s.size());
    CHECK(apply_channel(s, ChannelProfile{-1.0, 10.0, "x"}, rng).size() == s.size());
}

TEST_CASE("synth_device with no impairments is the clean modulation") {
    SynthOptions opts;
    opts.n_bits = 2000;
    RandomSource a(15), b(15);
    const auto y = synth_device(ImpairmentProfile{}, opts, a);
    const auto x = qam4_modulate(generate_payload(opts.n_bits, b), opts.samples_per_symbol, opts.sample_rate_hz);
    CHECK(y == x);
}

TEST_CASE("synth_device is deterministic") {
    const ImpairmentProfile p{27.0, 3.0, 20.0, 1500.0};
    SynthOptions opts;
    opts.n_bits = 4000;
    RandomSource a(16), b(16);
    CHECK(synth_device(p, opts, a) == synth_device(p, opts, b));
}

TEST_CASE("IIP3 20 and 40 dBm devices are separable on mean VFDT of I") {
    SynthOptions opts;
    opts.n_bits = 2000;  // 4000 samples, >= 50 windows of 256 at offset 64
    auto stats = [&](double iip3) {
        RandomSource rng(17);
        ImpairmentProfile p;
        p.iip3_dbm = iip3;
        const auto y = synth_device(p, opts, rng);
        auto t = vfdt_trajectory(y.i(), {256, 64}).values;
        t.resize(50);
        return std::pair{oracle::mean(t), std::sqrt(oracle::variance(t))};
    };
    const auto [m20, s20] = stats(20.0);
    const auto [m40, s40] = stats(40.0);
    CHECK(std::abs(m20 - m40) > 3.0 * std::max(s20, s40));
}

TEST_CASE("fleet of 30 devices at 5 locations") {
    std::vector<ChannelProfile> locs;
    for (int l = 1; l <= 5; ++l) locs.push_back({-1.0 * l, 30.0, "loc" + std::to_string(l)});
    FleetOptions opts;
    opts.synth.n_bits = 512;
    const RandomSource rng(18);
    const auto fleet = synth_fleet(30, locs, opts, rng);
    CHECK(fleet.size() == 150);
    std::map<std::string, ImpairmentProfile> seen;
    for (const auto& r : fleet) {
        const auto [it, fresh] = seen.emplace(r.device_id, r.profile);
        if (!fresh) {
            CHECK(it->second.iip3_dbm == r.profile.iip3_dbm);
            CHECK(it->second.cfo_hz == r.profile.cfo_hz);
        }
        CHECK(r.signal.size() == 1024);
    }
    CHECK(seen.size() == 30);

    const auto again = synth_fleet(30, locs, opts, rng);
    bool same = true;
    for (std::size_t k = 0; k < fleet.size(); ++k) same = same && fleet[k].signal == again[k].signal;
    CHECK(same);
}

TEST_CASE("fleet edge cases") {
    const std::vector<ChannelProfile> one{{0.0, inf, "loc1"}};
    FleetOptions opts;
    opts.synth.n_bits = 64;
    const RandomSource rng(19);
    CHECK(synth_fleet(1, one, opts, rng).size() == 1);
    CHECK_ERROR_CODE(synth_fleet(0, one, opts, rng), ErrorCode::EmptyFleet);
    CHECK_ERROR_CODE(synth_fleet(2, std::span<const ChannelProfile>{}, opts, rng), ErrorCode::NoLocations);
}

TEST_CASE("sampled profiles stay inside the configured ranges") {
    ProfileRanges ranges;
    RandomSource rng(20);
    for (int k = 0; k < 1000; ++k) {
        const auto p = sample_profile(ranges, rng);
        REQUIRE(p.iip3_dbm >= 20.0);
        REQUIRE(p.iip3_dbm <= 40.0);
        REQUIRE(p.iq_imbalance_db >= 0.0);
        REQUIRE(p.iq_imbalance_db <= 8.0);
        REQUIRE(p.phase_noise_max_offset_hz >= 10.0);
        REQUIRE(p.phase_noise_max_offset_hz <= 50.0);
        REQUIRE(std::abs(p.cfo_hz) <= 50e3);
    }
}
