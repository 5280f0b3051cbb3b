#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfdt_rf/features.hpp"
#include "vfdt_rf/random.hpp"

namespace vfdt_rf {

enum class ModelKind { NearestCentroid, Softmax, MLP1 };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// Per-dimension z-score fitted on the training set. Dimensions whose training
// variance is zero map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(std::span<const LabeledExample> examples);
    void apply(std::span<const double> in, std::span<double> out) const;
    std::vector<double> apply(std::span<const double> in) const;
};

// Plain SGD or Adam (beta1 0.9, beta2 0.999, eps 1e-8) on mini-batch gradients.
enum class Optimizer { SGD, Adam };

std::string_view to_string(Optimizer opt);
Optimizer parse_optimizer(std::string_view text);

struct TrainingConfig {
    std::size_t epochs = 30;
    Optimizer optimizer = Optimizer::Adam;
    double learning_rate = 3e-4;
    std::size_t batch_size = 32;
    std::size_t hidden_units = 128;
    double leaky_slope = 0.01;
    std::uint64_t seed = 1;
};

// Parameters live in one flat vector:
//   NearestCentroid  centroids [C x D]
//   Softmax          W [C x D], b [C]
//   MLP1             W1 [H x D], b1 [H], W2 [C x H], b2 [C]
struct ClassifierModel {
    ModelKind kind = ModelKind::Softmax;
    std::size_t n_classes = 0;
    std::size_t input_dim = 0;
    std::size_t hidden_units = 0;
    double leaky_slope = 0.01;
    Standardizer standardizer;  // unused by NearestCentroid
    std::vector<double> params;
    TrainingConfig training;
    std::vector<double> loss_history;  // full training-set loss after each epoch

    static ClassifierModel zeros(ModelKind kind, std::size_t n_classes, std::size_t input_dim,
                                 std::size_t hidden_units = 0, double leaky_slope = 0.01);
    std::size_t param_count() const;
    void validate() const;

    // Class scores for one raw (unstandardized) feature vector. Higher is
    // better; NearestCentroid scores are negated squared distances.
    std::vector<double> scores(std::span<const double> features) const;
};

// NearestCentroid ignores epochs / lr. Throws EmptyClass when a label in
// [0, max label] has no example and NonFiniteLoss on divergence.
ClassifierModel train(ModelKind kind, std::span<const LabeledExample> train_set, const TrainingConfig& cfg);

// argmax of class scores; ties go to the lowest index.
int predict(const ClassifierModel& model, std::span<const double> features);
int predict(const ClassifierModel& model, const LabeledExample& example);

// Mean cross-entropy of a differentiable model on already-standardized inputs.
double batch_loss(const ClassifierModel& model, std::span<const std::vector<double>> inputs,
                  std::span<const int> labels);
// Gradient of batch_loss with respect to model.params.
std::vector<double> batch_gradient(const ClassifierModel& model, std::span<const std::vector<double>> inputs,
                                   std::span<const int> labels);

struct EvalReport {
    double accuracy = 0.0;
    std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]
    std::map<std::string, double> per_location;
    std::size_t total = 0;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    std::string confusion_csv() const;
};

EvalReport evaluate(const ClassifierModel& model, std::span<const LabeledExample> test_set);

struct GradientCheckReport {
    ModelKind kind = ModelKind::Softmax;
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::size_t total_params = 0;
    double loss = 0.0;
    bool passed = false;

    nlohmann::json to_json() const;
};

// Central differences (step 1e-5) against the analytic gradient on a random
// 1% of weights (at least 50, at most all). Inputs are standardized with the
// batch's own statistics; weights get a small random initialization. Relative
// error is |a - n| / max(|a|, |n|, 1e-7).
GradientCheckReport gradient_check(ModelKind kind, std::span<const LabeledExample> batch, double tolerance,
                                   RandomSource& rng, std::size_t hidden_units = 16);

// Checkpoint: magic "VFDTMDL1", uint32 LE header length, JSON header
// (kind, shapes, training config, loss history, standardization stats) and
// LE float32 parameter payload.
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace vfdt_rf
