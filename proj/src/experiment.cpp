#include "vfdt_rf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "vfdt_rf/error.hpp"

using nlohmann::json;

namespace vfdt_rf {

std::string_view to_string(ImpairmentKind kind) {
    switch (kind) {
        case ImpairmentKind::PA: return "pa";
        case ImpairmentKind::IQImbalance: return "iq";
        case ImpairmentKind::PhaseNoise: return "phase-noise";
    }
    return "unknown";
}

ImpairmentKind parse_impairment_kind(std::string_view text) {
    if (text == "pa") return ImpairmentKind::PA;
    if (text == "iq" || text == "iq-imbalance") return ImpairmentKind::IQImbalance;
    if (text == "phase-noise" || text == "pn") return ImpairmentKind::PhaseNoise;
    throw Error(ErrorCode::BadArgument, "unknown impairment '" + std::string(text) + "'");
}

std::vector<double> published_settings(ImpairmentKind kind) {
    switch (kind) {
        case ImpairmentKind::PA: return {20, 25, 30, 35, 40};
        case ImpairmentKind::IQImbalance: return {0, 2, 4, 6, 8};
        case ImpairmentKind::PhaseNoise: return {10, 20, 30, 40, 50};
    }
    return {};
}

namespace {

struct StreamAccumulator {
    std::vector<double> trial_means;
    std::vector<double> all_values;
    bool degenerate = false;

    void add(std::span<const double> stream, const WindowConfig& window, VarianceMode mode) {
        if (degenerate) return;
        try {
            const auto traj = vfdt_trajectory(stream, window, mode);
            trial_means.push_back(std::accumulate(traj.values.begin(), traj.values.end(), 0.0) /
                                  static_cast<double>(traj.values.size()));
            all_values.insert(all_values.end(), traj.values.begin(), traj.values.end());
        } catch (const DegenerateWindowError&) {
            degenerate = true;
        }
    }

    StreamStats finish() const {
        StreamStats s;
        s.degenerate = degenerate;
        if (degenerate || trial_means.empty()) {
            s.mean = std::numeric_limits<double>::quiet_NaN();
            s.std_error = std::numeric_limits<double>::quiet_NaN();
            return s;
        }
        s.windows = all_values.size();
        const auto& basis = trial_means.size() > 1 ? trial_means : all_values;
        const auto n = static_cast<double>(basis.size());
        s.mean = std::accumulate(all_values.begin(), all_values.end(), 0.0) / static_cast<double>(all_values.size());
        const double m = std::accumulate(basis.begin(), basis.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : basis) ss += (v - m) * (v - m);
        s.std_error = basis.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        return s;
    }
};

IQSignal apply_impairment(ImpairmentKind kind, double setting, const IQSignal& sig, RandomSource& rng) {
    switch (kind) {
        case ImpairmentKind::PA: return pa_nonlinearity(sig, setting);
        case ImpairmentKind::IQImbalance: return iq_imbalance(sig, setting);
        case ImpairmentKind::PhaseNoise: return phase_noise(sig, setting, rng);
    }
    return sig;
}

}  // namespace

SweepPoint sweep_point(ImpairmentKind kind, double setting, const SweepConfig& cfg) {
    cfg.window.validate();
    if (cfg.trials == 0) throw Error(ErrorCode::BadArgument, "sweep needs at least one trial");
    const RandomSource root(cfg.seed);
    StreamAccumulator acc_i, acc_q, acc_mag, acc_phase;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const RandomSource trial = root.split(t);
        RandomSource payload_rng = trial.split(0);
        RandomSource impairment_rng = trial.split(1);
        RandomSource noise_rng = trial.split(2);
        const auto bits = generate_payload(cfg.synth.n_bits, payload_rng);
        auto sig = qam4_modulate(bits, cfg.synth.samples_per_symbol, cfg.synth.sample_rate_hz, cfg.synth.shape);
        if (cfg.synth.pa_drive_db != 0.0) {
            sig = apply_channel(sig, ChannelProfile{cfg.synth.pa_drive_db, std::numeric_limits<double>::infinity(), "tx"},
                                noise_rng);
        }
        sig = apply_impairment(kind, setting, sig, impairment_rng);
        if (std::isfinite(cfg.snr_db)) sig = apply_channel(sig, ChannelProfile{0.0, cfg.snr_db, "rx"}, noise_rng);
        acc_i.add(sig.i(), cfg.window, cfg.mode);
        acc_q.add(sig.q(), cfg.window, cfg.mode);
        acc_mag.add(sig.magnitude(), cfg.window, cfg.mode);
        acc_phase.add(sig.unwrapped_phase(), cfg.window, cfg.mode);
    }
    return SweepPoint{setting, acc_i.finish(), acc_q.finish(), acc_mag.finish(), acc_phase.finish()};
}

std::vector<SweepPoint> run_sweep(ImpairmentKind kind, std::span<const double> settings, const SweepConfig& cfg) {
    std::vector<SweepPoint> out;
    out.reserve(settings.size());
    for (double s : settings) out.push_back(sweep_point(kind, s, cfg));
    return out;
}

FleetDataset synth_fleet_dataset(std::size_t n_devices, std::span<const ChannelProfile> locations,
                                 const FleetOptions& opts, const FeatureConfig& features,
                                 std::size_t max_examples, const RandomSource& rng) {
    if (n_devices == 0) throw Error(ErrorCode::EmptyFleet, "fleet needs at least one device");
    if (locations.empty()) throw Error(ErrorCode::NoLocations, "fleet needs at least one location");
    FleetDataset ds;
    ds.profiles = fleet_profiles(n_devices, opts.ranges, rng);
    for (std::size_t d = 0; d < n_devices; ++d) {
        ds.device_ids.push_back(device_name(d));
        for (std::size_t l = 0; l < locations.size(); ++l) {
            const auto rec = synth_fleet_recording(d, l, ds.profiles, locations, opts, rng);
            const ExampleLabels labels{static_cast<int>(d), rec.location_id};
            auto v = make_examples(rec.signal, labels, features, max_examples);
            auto r = make_raw_examples(rec.signal, labels, max_examples);
            std::move(v.begin(), v.end(), std::back_inserter(ds.vfdt));
            std::move(r.begin(), r.end(), std::back_inserter(ds.raw));
        }
    }
    return ds;
}

void ExperimentSpec::validate() const {
    if (train_locations.empty()) throw Error(ErrorCode::BadArgument, "experiment needs train locations");
    if (test_locations.empty()) throw Error(ErrorCode::BadArgument, "experiment needs test locations");
    if (device_subset_size == 1) throw Error(ErrorCode::BadArgument, "device subset must be 0 (all) or >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::BadArgument, "train_fraction must be in (0, 1)");
    }
}

json ExperimentSpec::to_json() const {
    return json{{"train_locations", train_locations},
                {"test_locations", test_locations},
                {"representation", std::string(to_string(representation))},
                {"device_subset_size", device_subset_size},
                {"seed", seed},
                {"train_fraction", train_fraction},
                {"model", std::string(to_string(model))},
                {"epochs", training.epochs},
                {"optimizer", std::string(to_string(training.optimizer))},
                {"learning_rate", training.learning_rate},
                {"batch_size", training.batch_size},
                {"hidden_units", training.hidden_units}};
}

ExperimentSpec ExperimentSpec::from_json(const json& j) {
    ExperimentSpec s;
    try {
        s.train_locations = j.at("train_locations").get<std::vector<std::string>>();
        s.test_locations = j.at("test_locations").get<std::vector<std::string>>();
        s.representation = parse_representation(j.value("representation", std::string("vfdt")));
        s.device_subset_size = j.value("device_subset_size", std::size_t{0});
        s.seed = j.value("seed", std::uint64_t{1});
        s.train_fraction = j.value("train_fraction", 0.9);
        s.model = parse_model_kind(j.value("model", std::string("softmax")));
        s.training.epochs = j.value("epochs", s.training.epochs);
        s.training.optimizer = parse_optimizer(j.value("optimizer", std::string("adam")));
        s.training.learning_rate = j.value("learning_rate", s.training.learning_rate);
        s.training.batch_size = j.value("batch_size", s.training.batch_size);
        s.training.hidden_units = j.value("hidden_units", s.training.hidden_units);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadArgument, std::string("experiment spec: ") + e.what());
    }
    s.training.seed = s.seed;
    s.validate();
    return s;
}

ExperimentData prepare_experiment(std::span<const LabeledExample> examples, std::span<const std::string> device_ids,
                                  const ExperimentSpec& spec) {
    spec.validate();
    std::set<int> labels_present;
    std::set<std::string> locations_present;
    for (const auto& ex : examples) {
        labels_present.insert(ex.device_label);
        locations_present.insert(ex.location_label);
    }
    for (const auto* group : {&spec.train_locations, &spec.test_locations}) {
        for (const auto& loc : *group) {
            if (!locations_present.contains(loc)) {
                throw Error(ErrorCode::MissingLocation, "no examples for location '" + loc + "'");
            }
        }
    }

    const RandomSource root(spec.seed);
    std::vector<int> chosen(labels_present.begin(), labels_present.end());
    if (spec.device_subset_size > 0) {
        if (spec.device_subset_size > chosen.size()) {
            throw Error(ErrorCode::BadArgument, "device subset of " + std::to_string(spec.device_subset_size) +
                                                    " exceeds the " + std::to_string(chosen.size()) +
                                                    " devices available");
        }
        RandomSource pick = root.split(0);
        for (std::size_t k = 0; k < spec.device_subset_size; ++k) {
            std::swap(chosen[k], chosen[k + pick.below(chosen.size() - k)]);
        }
        chosen.resize(spec.device_subset_size);
        std::sort(chosen.begin(), chosen.end());
    }
    std::map<int, int> relabel;
    ExperimentData result;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        relabel[chosen[k]] = static_cast<int>(k);
        const auto idx = static_cast<std::size_t>(chosen[k]);
        result.devices.push_back(idx < device_ids.size() ? device_ids[idx] : device_name(idx));
    }

    const std::set<std::string> train_locs(spec.train_locations.begin(), spec.train_locations.end());
    const std::set<std::string> test_locs(spec.test_locations.begin(), spec.test_locations.end());
    auto& train_set = result.train_set;
    auto& test_sets = result.test_sets;
    std::uint64_t loc_index = 0;
    for (const auto& loc : locations_present) {
        ++loc_index;
        if (!train_locs.contains(loc) && !test_locs.contains(loc)) continue;
        std::vector<LabeledExample> here;
        for (const auto& ex : examples) {
            if (ex.location_label != loc) continue;
            const auto it = relabel.find(ex.device_label);
            if (it == relabel.end()) continue;
            here.push_back(ex);
            here.back().device_label = it->second;
        }
        RandomSource split_rng = root.split(1000 + loc_index);
        auto split = split_dataset(std::move(here), spec.train_fraction, split_rng);
        if (train_locs.contains(loc)) {
            std::move(split.train.begin(), split.train.end(), std::back_inserter(train_set));
        }
        if (test_locs.contains(loc)) test_sets[loc] = std::move(split.test);
    }

    return result;
}

ExperimentResult evaluate_experiment(const ClassifierModel& model, const ExperimentData& data,
                                     const ExperimentSpec& spec) {
    ExperimentResult result;
    result.model = model;
    result.devices = data.devices;
    std::vector<LabeledExample> pooled;
    for (const auto& loc : spec.test_locations) {
        const auto it = data.test_sets.find(loc);
        if (it == data.test_sets.end()) throw Error(ErrorCode::MissingLocation, "no test split for '" + loc + "'");
        result.per_test_location[loc] = evaluate(model, it->second);
        pooled.insert(pooled.end(), it->second.begin(), it->second.end());
    }
    result.pooled = evaluate(model, pooled);
    return result;
}

ExperimentResult run_experiment(std::span<const LabeledExample> examples, std::span<const std::string> device_ids,
                                const ExperimentSpec& spec) {
    const auto data = prepare_experiment(examples, device_ids, spec);
    TrainingConfig training = spec.training;
    training.seed = spec.seed;
    return evaluate_experiment(train(spec.model, data.train_set, training), data, spec);
}

}  // namespace vfdt_rf
