#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfdt_rf/random.hpp"
#include "vfdt_rf/signal.hpp"
#include "vfdt_rf/vfdt.hpp"

namespace vfdt_rf {

inline constexpr std::size_t trajectory_len = 1024;
inline constexpr std::size_t feature_dim = 2 * trajectory_len;

enum class Representation { VFDT, RawIQ };

std::string_view to_string(Representation rep);
Representation parse_representation(std::string_view text);

struct FeatureConfig {
    std::size_t window_len = 256;
    std::size_t window_offset = 64;
    VarianceMode mode = VarianceMode::AmplitudeVariance;

    WindowConfig window() const { return {window_len, window_offset}; }
    // Samples per stream consumed by one example: window_len + 1023 * offset.
    std::size_t samples_per_example() const { return window_len + (trajectory_len - 1) * window_offset; }
    void validate() const;
    nlohmann::json to_json() const;
    static FeatureConfig from_json(const nlohmann::json& j);
};

struct ExampleLabels {
    int device_label = 0;
    std::string location_label;
};

// Row-major 2 x 1024 block: features[0..1023] is row 0 (I), the rest row 1 (Q).
struct LabeledExample {
    std::vector<double> features;
    int device_label = 0;
    std::string location_label;
    Representation representation = Representation::VFDT;

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(features).subspan(r * trajectory_len, trajectory_len);
    }
};

std::size_t vfdt_example_count(std::size_t n_samples, const FeatureConfig& cfg);

// Contiguous, non-overlapping slices of samples_per_example() samples; each
// yields one example whose rows are the I and Q trajectories. `max_examples`
// of 0 means no cap. Degenerate windows raise DegenerateWindowError with the
// slice index.
std::vector<LabeledExample> make_examples(const IQSignal& sig, const ExampleLabels& labels,
                                          const FeatureConfig& cfg, std::size_t max_examples = 0);

// Consecutive non-overlapping 1024-sample slices; rows are raw I and Q.
std::vector<LabeledExample> make_raw_examples(const IQSignal& sig, const ExampleLabels& labels,
                                              std::size_t max_examples = 0);

struct Split {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> test;
};

// Per-device stratified shuffle split. Each class with n examples contributes
// round(n * train_fraction) to train, clamped so a class with >= 2 examples
// keeps at least one on each side.
Split split_dataset(std::vector<LabeledExample> examples, double train_fraction, RandomSource& rng);

// Example file: 8-byte magic "VFDTEX01", uint32 LE header length, UTF-8 JSON
// header, then `count` fixed-size records of 2048 LE float32 features,
// uint16 LE device label and a NUL-padded 32-byte location label.
inline constexpr std::size_t location_label_width = 32;
inline constexpr std::size_t example_record_size = feature_dim * 4 + 2 + location_label_width;

struct ExampleFile {
    Representation representation = Representation::VFDT;
    std::vector<LabeledExample> examples;
    std::vector<std::string> device_ids;  // class index -> device id
    nlohmann::json provenance = nlohmann::json::object();
};

void write_examples(const std::filesystem::path& path, const ExampleFile& file);
ExampleFile read_examples(const std::filesystem::path& path);

}  // namespace vfdt_rf
