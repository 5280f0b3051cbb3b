#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "check_code.hpp"
#include "oracles.hpp"
#include "vfdt_rf/classify.hpp"
#include "vfdt_rf/experiment.hpp"

using namespace vfdt_rf;
namespace fs = std::filesystem;

namespace {

LabeledExample example(std::vector<double> f, int label, std::string loc = "loc1") {
    LabeledExample e;
    e.features = std::move(f);
    e.device_label = label;
    e.location_label = std::move(loc);
    return e;
}

// Gaussian blobs around per-class random centers.
std::vector<LabeledExample> blobs(int classes, int per_class, std::size_t dim, double spread, std::uint64_t seed) {
    std::vector<LabeledExample> out;
    for (int c = 0; c < classes; ++c) {
        const auto center = oracle::white(dim, seed + 100 * c);
        for (int k = 0; k < per_class; ++k) {
            auto f = oracle::white(dim, seed + 100 * c + k + 1, spread);
            for (std::size_t d = 0; d < dim; ++d) f[d] += center[d];
            out.push_back(example(std::move(f), c));
        }
    }
    return out;
}

std::vector<std::vector<double>> standardized(const Standardizer& s, std::span<const LabeledExample> set) {
    std::vector<std::vector<double>> out;
    for (const auto& e : set) out.push_back(s.apply(e.features));
    return out;
}

std::vector<int> labels_of(std::span<const LabeledExample> set) {
    std::vector<int> out;
    for (const auto& e : set) out.push_back(e.device_label);
    return out;
}

}  // namespace

TEST_CASE("nearest centroid separates constant classes perfectly") {
    std::vector<LabeledExample> fit_set, held_out;
    for (int k = 0; k < 5; ++k) {
        fit_set.push_back(example(std::vector<double>(8, 1.0), 0));
        fit_set.push_back(example(std::vector<double>(8, -2.0), 1));
    }
    held_out.push_back(example(std::vector<double>(8, 1.0), 0));
    held_out.push_back(example(std::vector<double>(8, -2.0), 1));
    const auto m = train(ModelKind::NearestCentroid, fit_set, {});
    CHECK(evaluate(m, held_out).accuracy == 1.0);
}

TEST_CASE("single example per class: centroids are the examples") {
    const std::vector<LabeledExample> set{example({1.0, 2.0, 3.0}, 0), example({-1.0, 0.5, 9.0}, 1)};
    const auto m = train(ModelKind::NearestCentroid, set, {});
    CHECK(std::vector<double>(m.params.begin(), m.params.begin() + 3) == set[0].features);
    CHECK(std::vector<double>(m.params.begin() + 3, m.params.end()) == set[1].features);
    CHECK(predict(m, set[1]) == 1);
    CHECK(predict(m, set[0].features) == 0);
}

TEST_CASE("equidistant tie goes to the lower index") {
    const std::vector<LabeledExample> set{example({1.0, 0.0}, 0), example({-1.0, 0.0}, 1)};
    const auto m = train(ModelKind::NearestCentroid, set, {});
    const std::vector<double> mid{0.0, 5.0};
    CHECK(predict(m, mid) == 0);
    const std::vector<double> wrong(3, 0.0);
    CHECK_ERROR_CODE(predict(m, wrong), ErrorCode::ShapeMismatch);
}

TEST_CASE("a model stuck on one class scores 1/30 on balanced data") {
    auto m = ClassifierModel::zeros(ModelKind::Softmax, 30, 4);
    m.standardizer.mean.assign(4, 0.0);
    m.standardizer.stddev.assign(4, 1.0);
    m.params[m.params.size() - 30 + 7] = 1.0;  // bias of class 7
    std::vector<LabeledExample> test;
    for (int c = 0; c < 30; ++c) test.push_back(example({0.1 * c, 1.0, -1.0, 2.0}, c));
    const auto r = evaluate(m, test);
    CHECK(r.accuracy == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    for (int c = 0; c < 30; ++c) CHECK(r.confusion[c][7] == 1);
}

TEST_CASE("property: confusion matrix is consistent with accuracy") {
    const auto data = blobs(4, 30, 6, 1.5, 1);
    RandomSource rng(2);
    auto split = split_dataset(data, 0.7, rng);
    for (auto kind : {ModelKind::NearestCentroid, ModelKind::Softmax, ModelKind::MLP1}) {
        TrainingConfig cfg;
        cfg.hidden_units = 16;
        cfg.epochs = 10;
        const auto m = train(kind, split.train, cfg);
        const auto r = evaluate(m, split.test);
        std::uint64_t trace = 0, total = 0;
        for (std::size_t i = 0; i < r.confusion.size(); ++i) {
            for (std::size_t j = 0; j < r.confusion.size(); ++j) total += r.confusion[i][j];
            trace += r.confusion[i][i];
        }
        CHECK(total == split.test.size());
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
        CHECK(r.accuracy == doctest::Approx(static_cast<double>(trace) / static_cast<double>(total)));
        CHECK(r.per_location.at("loc1") == doctest::Approx(r.accuracy));
    }
}

TEST_CASE("all-correct predictions give a diagonal confusion matrix") {
    const std::vector<LabeledExample> set{example({0.0}, 0), example({10.0}, 1), example({20.0}, 2)};
    const auto m = train(ModelKind::NearestCentroid, set, {});
    const auto r = evaluate(m, set);
    CHECK(r.accuracy == 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(r.confusion[i][j] == (i == j ? 1u : 0u));
    CHECK_ERROR_CODE(evaluate(m, std::span<const LabeledExample>{}), ErrorCode::EmptyTestSet);
}

TEST_CASE("eval report JSON and CSV") {
    EvalReport r;
    r.accuracy = 0.5;
    r.total = 4;
    r.confusion = {{1, 1}, {1, 1}};
    r.per_location = {{"loc1", 0.25}, {"loc2", 0.75}};
    const auto back = EvalReport::from_json(r.to_json());
    CHECK(back.accuracy == 0.5);
    CHECK(back.confusion == r.confusion);
    CHECK(back.per_location == r.per_location);
    CHECK(r.confusion_csv() == "true\\predicted,0,1\n0,1,1\n1,1,1\n");
}

TEST_CASE("training rejects missing classes") {
    const std::vector<LabeledExample> set{example({0.0}, 0), example({1.0}, 2)};
    CHECK_ERROR_CODE(train(ModelKind::Softmax, set, {}), ErrorCode::EmptyClass);
    CHECK_ERROR_CODE(train(ModelKind::Softmax, std::span<const LabeledExample>{}, {}), ErrorCode::EmptyClass);
}

TEST_CASE("divergent learning rate raises NonFiniteLoss") {
    const auto data = blobs(3, 10, 4, 0.5, 3);
    TrainingConfig cfg;
    cfg.optimizer = Optimizer::SGD;
    cfg.learning_rate = 1e308;  // first step overflows the weights
    CHECK_ERROR_CODE(train(ModelKind::Softmax, data, cfg), ErrorCode::NonFiniteLoss);
}

TEST_CASE("gradient check passes for both differentiable models") {
    const auto toy = blobs(3, 2, 5, 1.0, 4);  // includes a 4-example, 3-class subset below
    const std::vector<LabeledExample> four{toy[0], toy[1], toy[2], toy[4]};
    RandomSource rng(5);
    const auto soft = gradient_check(ModelKind::Softmax, four, 1e-4, rng);
    CHECK(soft.passed);
    CHECK(soft.max_relative_error < 1e-4);
    CHECK(soft.checked == soft.total_params);  // fewer than 50 parameters: all checked

    const auto big = blobs(10, 3, feature_dim, 1.0, 6);
    RandomSource r2(7);
    const auto sb = gradient_check(ModelKind::Softmax, big, 1e-4, r2);
    CHECK(sb.max_relative_error < 1e-4);
    CHECK(sb.checked == static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(sb.total_params))));
    RandomSource r3(8);
    const auto mlp = gradient_check(ModelKind::MLP1, big, 1e-4, r3, 5);
    CHECK(mlp.max_relative_error < 1e-4);
    RandomSource r4(9);
    CHECK_THROWS(gradient_check(ModelKind::NearestCentroid, four, 1e-4, r4));
}

TEST_CASE("zero weights on a balanced batch give loss ln C") {
    for (std::size_t classes : {2u, 10u, 30u}) {
        const auto data = blobs(static_cast<int>(classes), 2, 16, 1.0, 10);
        const auto s = Standardizer::fit(data);
        for (auto kind : {ModelKind::Softmax, ModelKind::MLP1}) {
            auto m = ClassifierModel::zeros(kind, classes, 16, 8);
            m.standardizer = s;
            const double loss = batch_loss(m, standardized(s, data), labels_of(data));
            CHECK(std::abs(loss - std::log(static_cast<double>(classes))) < 1e-9);
        }
    }
}

TEST_CASE("standardization round trip on the training set") {
    auto data = blobs(3, 20, 12, 2.0, 11);
    for (auto& e : data) e.features[5] = 4.0;  // a constant dimension
    const auto s = Standardizer::fit(data);
    const auto z = standardized(s, data);
    for (std::size_t d = 0; d < 12; ++d) {
        double m = 0, v = 0;
        for (const auto& row : z) m += row[d];
        m /= static_cast<double>(z.size());
        for (const auto& row : z) v += (row[d] - m) * (row[d] - m);
        v /= static_cast<double>(z.size());
        CHECK(std::abs(m) < 1e-9);
        if (d == 5) {
            CHECK(v == 0.0);
            CHECK(z[0][d] == 0.0);
        } else {
            CHECK(std::abs(v - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("training loss falls over the first epochs on a synthetic VFDT fleet") {
    FleetOptions opts;
    opts.synth.sample_rate_hz = 45e6;
    const FeatureConfig features;
    const std::size_t per_recording = 8;
    opts.synth.n_bits = 2 * ((features.samples_per_example() * per_recording + 3) / 4);
    const std::vector<ChannelProfile> locs{{0.0, 30.0, "loc1"}};
    const auto ds = synth_fleet_dataset(10, locs, opts, features, per_recording, RandomSource(12));
    REQUIRE(ds.vfdt.size() == 80);
    const auto m = train(ModelKind::Softmax, ds.vfdt, TrainingConfig{});
    REQUIRE(m.loss_history.size() == 30);
    for (std::size_t e = 1; e < 5; ++e) CHECK(m.loss_history[e] < m.loss_history[e - 1]);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto data = blobs(4, 15, 10, 1.0, 13);
    for (auto kind : {ModelKind::Softmax, ModelKind::MLP1}) {
        TrainingConfig cfg;
        cfg.hidden_units = 12;
        cfg.epochs = 5;
        const auto a = train(kind, data, cfg);
        const auto b = train(kind, data, cfg);
        CHECK(a.params == b.params);
        CHECK(evaluate(a, data).to_json() == evaluate(b, data).to_json());
        cfg.seed = 99;
        if (kind == ModelKind::MLP1) CHECK(train(kind, data, cfg).params != a.params);
    }
}

TEST_CASE("checkpoint round trip") {
    const auto data = blobs(3, 10, 7, 1.0, 14);
    const fs::path path = fs::temp_directory_path() / "vfdt_rf_test_model.bin";
    for (auto kind : {ModelKind::NearestCentroid, ModelKind::Softmax, ModelKind::MLP1}) {
        TrainingConfig cfg;
        cfg.hidden_units = 6;
        cfg.epochs = 3;
        const auto m = train(kind, data, cfg);
        save_model(m, path);
        const auto back = load_model(path);
        CHECK(back.kind == kind);
        CHECK(back.n_classes == 3);
        CHECK(back.input_dim == 7);
        CHECK(back.loss_history == m.loss_history);
        CHECK(back.standardizer.mean == m.standardizer.mean);
        REQUIRE(back.params.size() == m.params.size());
        for (std::size_t k = 0; k < m.params.size(); ++k)
            CHECK(back.params[k] == static_cast<double>(static_cast<float>(m.params[k])));
        for (const auto& e : data) CHECK(predict(back, e) == predict(m, e));
    }
    fs::resize_file(path, fs::file_size(path) - 4);
    CHECK_ERROR_CODE(load_model(path), ErrorCode::BadFileFormat);
    fs::remove(path);
}

TEST_CASE("experiment spec parsing and device subsets") {
    const auto spec = ExperimentSpec::from_json(
        {{"train_locations", {"loc1"}}, {"test_locations", {"loc1", "loc2"}}, {"device_subset_size", 3},
         {"seed", 5}, {"epochs", 4}, {"model", "centroid"}});
    CHECK(spec.training.epochs == 4);
    CHECK(spec.model == ModelKind::NearestCentroid);
    CHECK(ExperimentSpec::from_json(spec.to_json()).to_json() == spec.to_json());

    std::vector<LabeledExample> data;
    for (const char* loc : {"loc1", "loc2"}) {
        for (auto e : blobs(6, 10, 4, 0.1, 15)) {
            e.location_label = loc;
            data.push_back(std::move(e));
        }
    }
    std::vector<std::string> ids;
    for (int d = 0; d < 6; ++d) ids.push_back(device_name(d));
    const auto r = run_experiment(data, ids, spec);
    CHECK(r.devices.size() == 3);
    CHECK(std::is_sorted(r.devices.begin(), r.devices.end()));
    CHECK(r.model.n_classes == 3);
    CHECK(r.per_test_location.at("loc1").accuracy == 1.0);
    CHECK(r.pooled.total == r.per_test_location.at("loc1").total + r.per_test_location.at("loc2").total);

    auto missing = spec;
    missing.test_locations = {"loc9"};
    CHECK_ERROR_CODE(run_experiment(data, ids, missing), ErrorCode::MissingLocation);
}
