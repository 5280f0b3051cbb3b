#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfdt_rf/classify.hpp"
#include "vfdt_rf/features.hpp"
#include "vfdt_rf/txchain.hpp"

namespace vfdt_rf {

// ---------------------------------------------------------------------------
// Single-impairment sweeps

enum class ImpairmentKind { PA, IQImbalance, PhaseNoise };

std::string_view to_string(ImpairmentKind kind);
ImpairmentKind parse_impairment_kind(std::string_view text);
// IIP3 {20..40} dBm, imbalance {0..8} dB, phase noise {10..50} Hz.
std::vector<double> published_settings(ImpairmentKind kind);

struct SweepConfig {
    SynthOptions synth;
    WindowConfig window{256, 64};
    VarianceMode mode = VarianceMode::AmplitudeVariance;
    std::size_t trials = 1;  // independent payloads, shared across settings
    std::uint64_t seed = 1;
    double snr_db = std::numeric_limits<double>::infinity();  // receiver noise floor
};

struct StreamStats {
    double mean = 0.0;
    double std_error = 0.0;  // across trials, or across windows when trials == 1
    std::size_t windows = 0;
    bool degenerate = false;  // some window had zero variance
};

struct SweepPoint {
    double setting = 0.0;
    StreamStats i, q, magnitude, phase;
};

// Every setting reuses the same payloads and noise draws, so differences
// between settings come from the impairment alone.
SweepPoint sweep_point(ImpairmentKind kind, double setting, const SweepConfig& cfg);
std::vector<SweepPoint> run_sweep(ImpairmentKind kind, std::span<const double> settings, const SweepConfig& cfg);

// ---------------------------------------------------------------------------
// Fleet corpora held in memory

struct FleetDataset {
    std::vector<LabeledExample> vfdt;
    std::vector<LabeledExample> raw;
    std::vector<std::string> device_ids;
    std::vector<ImpairmentProfile> profiles;
};

// Synthesizes one recording at a time and keeps only the extracted examples.
// `max_examples` caps examples per recording for both representations.
FleetDataset synth_fleet_dataset(std::size_t n_devices, std::span<const ChannelProfile> locations,
                                 const FleetOptions& opts, const FeatureConfig& features,
                                 std::size_t max_examples, const RandomSource& rng);

// ---------------------------------------------------------------------------
// Cross-location train / evaluate

struct ExperimentSpec {
    std::vector<std::string> train_locations;
    std::vector<std::string> test_locations;
    Representation representation = Representation::VFDT;
    std::size_t device_subset_size = 0;  // 0: every device
    std::uint64_t seed = 1;
    double train_fraction = 0.9;
    ModelKind model = ModelKind::Softmax;
    TrainingConfig training;

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentSpec from_json(const nlohmann::json& j);
};

// Inputs to one experiment after device selection and per-location splits.
struct ExperimentData {
    std::vector<std::string> devices;  // class index -> device id
    std::vector<LabeledExample> train_set;
    std::map<std::string, std::vector<LabeledExample>> test_sets;
};

struct ExperimentResult {
    ClassifierModel model;
    std::vector<std::string> devices;  // class index -> device id
    std::map<std::string, EvalReport> per_test_location;
    EvalReport pooled;  // all test locations together
};

// Every location's examples are split train/test per device with the same
// fraction. The model trains on the pooled train parts of train_locations and
// is scored on the test part of each test location. With a device subset,
// the chosen devices are relabeled 0..k-1 in ascending original order.
// The split depends only on the examples and spec, so a separately trained
// model can be scored later on exactly the same held-out part.
ExperimentData prepare_experiment(std::span<const LabeledExample> examples, std::span<const std::string> device_ids,
                                  const ExperimentSpec& spec);
ExperimentResult evaluate_experiment(const ClassifierModel& model, const ExperimentData& data,
                                     const ExperimentSpec& spec);
// prepare_experiment, train, evaluate_experiment.
ExperimentResult run_experiment(std::span<const LabeledExample> examples, std::span<const std::string> device_ids,
                                const ExperimentSpec& spec);

}  // namespace vfdt_rf
