#include "vfdt_rf/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "vfdt_rf/dataio.hpp"
#include "vfdt_rf/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vfdt_rf {

namespace {

constexpr char model_magic[8] = {'V', 'F', 'D', 'T', 'M', 'D', 'L', '1'};

double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

struct Layout {
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
};

Layout layout_of(const ClassifierModel& m) {
    Layout l;
    const std::size_t c = m.n_classes, d = m.input_dim, h = m.hidden_units;
    switch (m.kind) {
        case ModelKind::NearestCentroid: l.total = c * d; break;
        case ModelKind::Softmax:
            l.b1 = c * d;
            l.total = c * d + c;
            break;
        case ModelKind::MLP1:
            l.b1 = h * d;
            l.w2 = l.b1 + h;
            l.b2 = l.w2 + c * h;
            l.total = l.b2 + c;
            break;
    }
    return l;
}

// Dense row-major y = W x + b with W [rows x cols].
void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
            std::span<double> y) {
    const std::size_t cols = x.size();
    for (std::size_t r = 0; r < y.size(); ++r) {
        const double* row = w.data() + r * cols;
        double acc = b[r];
        for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
        y[r] = acc;
    }
}

// Forward pass on a standardized input; fills logits and, for MLP1, the
// hidden pre-activations.
void forward(const ClassifierModel& m, std::span<const double> x, std::vector<double>& pre,
             std::vector<double>& hidden, std::vector<double>& logits) {
    const auto l = layout_of(m);
    const std::span<const double> p(m.params);
    logits.resize(m.n_classes);
    if (m.kind == ModelKind::Softmax) {
        affine(p.subspan(0, l.b1), p.subspan(l.b1, m.n_classes), x, logits);
        return;
    }
    pre.resize(m.hidden_units);
    hidden.resize(m.hidden_units);
    affine(p.subspan(0, l.b1), p.subspan(l.b1, m.hidden_units), x, pre);
    for (std::size_t k = 0; k < pre.size(); ++k) hidden[k] = pre[k] > 0.0 ? pre[k] : m.leaky_slope * pre[k];
    affine(p.subspan(l.w2, m.n_classes * m.hidden_units), p.subspan(l.b2, m.n_classes), hidden, logits);
}

void require_differentiable(ModelKind kind) {
    if (kind == ModelKind::NearestCentroid) {
        throw Error(ErrorCode::BadArgument, "nearest-centroid has no differentiable loss");
    }
}

std::size_t infer_classes(std::span<const LabeledExample> set) {
    int max_label = -1;
    for (const auto& ex : set) {
        if (ex.device_label < 0) throw Error(ErrorCode::BadArgument, "negative device label");
        max_label = std::max(max_label, ex.device_label);
    }
    return static_cast<std::size_t>(max_label + 1);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::NearestCentroid: return "centroid";
        case ModelKind::Softmax: return "softmax";
        case ModelKind::MLP1: return "mlp1";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "centroid" || text == "nearest-centroid") return ModelKind::NearestCentroid;
    if (text == "softmax") return ModelKind::Softmax;
    if (text == "mlp1" || text == "mlp") return ModelKind::MLP1;
    throw Error(ErrorCode::BadArgument, "unknown model kind '" + std::string(text) + "'");
}

std::string_view to_string(Optimizer opt) { return opt == Optimizer::SGD ? "sgd" : "adam"; }

Optimizer parse_optimizer(std::string_view text) {
    if (text == "sgd") return Optimizer::SGD;
    if (text == "adam") return Optimizer::Adam;
    throw Error(ErrorCode::BadArgument, "unknown optimizer '" + std::string(text) + "'");
}

Standardizer Standardizer::fit(std::span<const LabeledExample> examples) {
    if (examples.empty()) throw Error(ErrorCode::TooFewExamples, "cannot fit standardizer on no examples");
    const std::size_t d = examples.front().features.size();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (const auto& ex : examples) {
        if (ex.features.size() != d) throw Error(ErrorCode::ShapeMismatch, "examples differ in dimension");
        for (std::size_t k = 0; k < d; ++k) s.mean[k] += ex.features[k];
    }
    const auto n = static_cast<double>(examples.size());
    for (double& v : s.mean) v /= n;
    for (const auto& ex : examples) {
        for (std::size_t k = 0; k < d; ++k) {
            const double c = ex.features[k] - s.mean[k];
            s.stddev[k] += c * c;
        }
    }
    for (double& v : s.stddev) v = std::sqrt(v / n);
    return s;
}

void Standardizer::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != mean.size() || out.size() != mean.size()) {
        throw Error(ErrorCode::ShapeMismatch, "feature dimension does not match standardizer");
    }
    for (std::size_t k = 0; k < in.size(); ++k) {
        out[k] = stddev[k] > 0.0 ? (in[k] - mean[k]) / stddev[k] : 0.0;
    }
}

std::vector<double> Standardizer::apply(std::span<const double> in) const {
    std::vector<double> out(in.size());
    apply(in, out);
    return out;
}

ClassifierModel ClassifierModel::zeros(ModelKind kind, std::size_t n_classes, std::size_t input_dim,
                                       std::size_t hidden_units, double leaky_slope) {
    ClassifierModel m;
    m.kind = kind;
    m.n_classes = n_classes;
    m.input_dim = input_dim;
    m.hidden_units = kind == ModelKind::MLP1 ? hidden_units : 0;
    m.leaky_slope = leaky_slope;
    m.params.assign(layout_of(m).total, 0.0);
    if (kind != ModelKind::NearestCentroid) {
        m.standardizer.mean.assign(input_dim, 0.0);
        m.standardizer.stddev.assign(input_dim, 1.0);
    }
    return m;
}

std::size_t ClassifierModel::param_count() const { return layout_of(*this).total; }

void ClassifierModel::validate() const {
    if (n_classes < 2) throw Error(ErrorCode::ShapeMismatch, "model needs >= 2 classes");
    if (input_dim == 0) throw Error(ErrorCode::ShapeMismatch, "model input_dim is 0");
    if (kind == ModelKind::MLP1 && hidden_units == 0) throw Error(ErrorCode::ShapeMismatch, "MLP1 needs hidden units");
    if (params.size() != param_count()) throw Error(ErrorCode::ShapeMismatch, "parameter count mismatch");
    if (kind != ModelKind::NearestCentroid &&
        (standardizer.mean.size() != input_dim || standardizer.stddev.size() != input_dim)) {
        throw Error(ErrorCode::ShapeMismatch, "standardizer dimension mismatch");
    }
}

std::vector<double> ClassifierModel::scores(std::span<const double> features) const {
    if (features.size() != input_dim) {
        throw Error(ErrorCode::ShapeMismatch, "example has " + std::to_string(features.size()) +
                                                  " features, model expects " + std::to_string(input_dim));
    }
    std::vector<double> out(n_classes);
    if (kind == ModelKind::NearestCentroid) {
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double* centroid = params.data() + c * input_dim;
            double dist = 0.0;
            for (std::size_t k = 0; k < input_dim; ++k) {
                const double diff = features[k] - centroid[k];
                dist += diff * diff;
            }
            out[c] = -dist;
        }
        return out;
    }
    const auto x = standardizer.apply(features);
    std::vector<double> pre, hidden;
    forward(*this, x, pre, hidden, out);
    return out;
}

double batch_loss(const ClassifierModel& model, std::span<const std::vector<double>> inputs,
                  std::span<const int> labels) {
    require_differentiable(model.kind);
    std::vector<double> pre, hidden, logits;
    double total = 0.0;
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        forward(model, inputs[n], pre, hidden, logits);
        total += log_sum_exp(logits) - logits[static_cast<std::size_t>(labels[n])];
    }
    return total / static_cast<double>(inputs.size());
}

std::vector<double> batch_gradient(const ClassifierModel& model, std::span<const std::vector<double>> inputs,
                                   std::span<const int> labels) {
    require_differentiable(model.kind);
    const auto l = layout_of(model);
    const std::size_t c_count = model.n_classes, d = model.input_dim, h = model.hidden_units;
    std::vector<double> grad(l.total, 0.0);
    std::vector<double> pre, hidden, logits, dz(c_count), dh(h);
    const double inv_n = 1.0 / static_cast<double>(inputs.size());
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        const auto& x = inputs[n];
        forward(model, x, pre, hidden, logits);
        const double lse = log_sum_exp(logits);
        for (std::size_t c = 0; c < c_count; ++c) {
            dz[c] = (std::exp(logits[c] - lse) - (static_cast<int>(c) == labels[n] ? 1.0 : 0.0)) * inv_n;
        }
        if (model.kind == ModelKind::Softmax) {
            for (std::size_t c = 0; c < c_count; ++c) {
                double* row = grad.data() + c * d;
                for (std::size_t k = 0; k < d; ++k) row[k] += dz[c] * x[k];
                grad[l.b1 + c] += dz[c];
            }
            continue;
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t c = 0; c < c_count; ++c) {
            double* grow = grad.data() + l.w2 + c * h;
            const double* wrow = model.params.data() + l.w2 + c * h;
            for (std::size_t j = 0; j < h; ++j) {
                grow[j] += dz[c] * hidden[j];
                dh[j] += wrow[j] * dz[c];
            }
            grad[l.b2 + c] += dz[c];
        }
        for (std::size_t j = 0; j < h; ++j) {
            const double da = dh[j] * (pre[j] > 0.0 ? 1.0 : model.leaky_slope);
            if (da == 0.0) continue;
            double* row = grad.data() + j * d;
            for (std::size_t k = 0; k < d; ++k) row[k] += da * x[k];
            grad[l.b1 + j] += da;
        }
    }
    return grad;
}

ClassifierModel train(ModelKind kind, std::span<const LabeledExample> train_set, const TrainingConfig& cfg) {
    if (train_set.empty()) throw Error(ErrorCode::EmptyClass, "empty training set");
    const std::size_t n_classes = infer_classes(train_set);
    std::vector<std::size_t> per_class(n_classes, 0);
    for (const auto& ex : train_set) ++per_class[static_cast<std::size_t>(ex.device_label)];
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (per_class[c] == 0) {
            throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no training example");
        }
    }
    if (n_classes < 2) throw Error(ErrorCode::EmptyClass, "training needs at least two classes");
    if (kind != ModelKind::NearestCentroid && (cfg.epochs < 1 || !(cfg.learning_rate > 0.0))) {
        throw Error(ErrorCode::BadArgument, "epochs must be >= 1 and learning rate > 0");
    }
    const std::size_t d = train_set.front().features.size();
    auto model = ClassifierModel::zeros(kind, n_classes, d, cfg.hidden_units, cfg.leaky_slope);
    model.training = cfg;

    if (kind == ModelKind::NearestCentroid) {
        for (const auto& ex : train_set) {
            if (ex.features.size() != d) throw Error(ErrorCode::ShapeMismatch, "examples differ in dimension");
            double* centroid = model.params.data() + static_cast<std::size_t>(ex.device_label) * d;
            for (std::size_t k = 0; k < d; ++k) centroid[k] += ex.features[k];
        }
        for (std::size_t c = 0; c < n_classes; ++c) {
            for (std::size_t k = 0; k < d; ++k) model.params[c * d + k] /= static_cast<double>(per_class[c]);
        }
        return model;
    }

    model.standardizer = Standardizer::fit(train_set);
    std::vector<std::vector<double>> inputs;
    std::vector<int> labels;
    inputs.reserve(train_set.size());
    for (const auto& ex : train_set) {
        inputs.push_back(model.standardizer.apply(ex.features));
        labels.push_back(ex.device_label);
    }

    RandomSource rng(cfg.seed);
    if (kind == ModelKind::MLP1) {
        RandomSource init = rng.split(0);
        const auto l = layout_of(model);
        const double s1 = std::sqrt(2.0 / static_cast<double>(d));
        const double s2 = std::sqrt(2.0 / static_cast<double>(model.hidden_units));
        for (std::size_t k = 0; k < l.b1; ++k) model.params[k] = s1 * init.gaussian();
        for (std::size_t k = l.w2; k < l.b2; ++k) model.params[k] = s2 * init.gaussian();
    }

    RandomSource order_rng = rng.split(1);
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
    std::vector<std::vector<double>> batch_inputs;
    std::vector<int> batch_labels;
    std::vector<double> m1(model.params.size(), 0.0), m2(model.params.size(), 0.0);
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[order_rng.below(k)]);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            batch_inputs.clear();
            batch_labels.clear();
            for (std::size_t k = start; k < end; ++k) {
                batch_inputs.push_back(inputs[order[k]]);
                batch_labels.push_back(labels[order[k]]);
            }
            const auto grad = batch_gradient(model, batch_inputs, batch_labels);
            if (cfg.optimizer == Optimizer::SGD) {
                for (std::size_t k = 0; k < grad.size(); ++k) model.params[k] -= cfg.learning_rate * grad[k];
                continue;
            }
            ++step;
            const double c1 = 1.0 - std::pow(0.9, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(0.999, static_cast<double>(step));
            for (std::size_t k = 0; k < grad.size(); ++k) {
                m1[k] = 0.9 * m1[k] + 0.1 * grad[k];
                m2[k] = 0.999 * m2[k] + 0.001 * grad[k] * grad[k];
                model.params[k] -= cfg.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + 1e-8);
            }
        }
        const double loss = batch_loss(model, inputs, labels);
        if (!std::isfinite(loss)) {
            throw Error(ErrorCode::NonFiniteLoss,
                        "training loss diverged at epoch " + std::to_string(epoch + 1) + "; lower the learning rate");
        }
        model.loss_history.push_back(loss);
    }
    return model;
}

int predict(const ClassifierModel& model, std::span<const double> features) {
    const auto s = model.scores(features);
    // max_element returns the first maximum, so ties resolve to the lowest index.
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

int predict(const ClassifierModel& model, const LabeledExample& example) { return predict(model, example.features); }

json EvalReport::to_json() const {
    json per_loc = json::object();
    for (const auto& [loc, acc] : per_location) per_loc[loc] = acc;
    return json{{"accuracy", accuracy},
                {"n_classes", confusion.size()},
                {"total", total},
                {"confusion", confusion},
                {"per_location", per_loc}};
}

EvalReport EvalReport::from_json(const json& j) {
    EvalReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.total = j.at("total").get<std::size_t>();
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::uint64_t>>>();
    for (const auto& [loc, acc] : j.at("per_location").items()) r.per_location[loc] = acc.get<double>();
    return r;
}

std::string EvalReport::confusion_csv() const {
    std::ostringstream out;
    out << "true\\predicted";
    for (std::size_t c = 0; c < confusion.size(); ++c) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < confusion.size(); ++r) {
        out << r;
        for (auto v : confusion[r]) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

EvalReport evaluate(const ClassifierModel& model, std::span<const LabeledExample> test_set) {
    if (test_set.empty()) throw Error(ErrorCode::EmptyTestSet, "nothing to evaluate");
    EvalReport r;
    r.confusion.assign(model.n_classes, std::vector<std::uint64_t>(model.n_classes, 0));
    std::map<std::string, std::pair<std::size_t, std::size_t>> loc_counts;
    std::size_t correct = 0;
    for (const auto& ex : test_set) {
        const int pred = predict(model, ex);
        if (ex.device_label < 0 || static_cast<std::size_t>(ex.device_label) >= model.n_classes) {
            throw Error(ErrorCode::ShapeMismatch, "test label " + std::to_string(ex.device_label) +
                                                      " outside model classes");
        }
        ++r.confusion[static_cast<std::size_t>(ex.device_label)][static_cast<std::size_t>(pred)];
        const bool hit = pred == ex.device_label;
        correct += hit ? 1 : 0;
        if (!ex.location_label.empty()) {
            auto& [ok, n] = loc_counts[ex.location_label];
            ok += hit ? 1 : 0;
            ++n;
        }
    }
    r.total = test_set.size();
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
    for (const auto& [loc, counts] : loc_counts) {
        r.per_location[loc] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    return r;
}

json GradientCheckReport::to_json() const {
    return json{{"kind", std::string(to_string(kind))},
                {"max_relative_error", max_relative_error},
                {"checked", checked},
                {"total_params", total_params},
                {"loss", loss},
                {"passed", passed}};
}

GradientCheckReport gradient_check(ModelKind kind, std::span<const LabeledExample> batch, double tolerance,
                                   RandomSource& rng, std::size_t hidden_units) {
    require_differentiable(kind);
    if (batch.empty()) throw Error(ErrorCode::TooFewExamples, "gradient check needs a batch");
    const std::size_t n_classes = std::max<std::size_t>(2, infer_classes(batch));
    const std::size_t d = batch.front().features.size();
    auto model = ClassifierModel::zeros(kind, n_classes, d, hidden_units);
    model.standardizer = Standardizer::fit(batch);
    for (double& p : model.params) p = 0.1 * rng.gaussian();

    std::vector<std::vector<double>> inputs;
    std::vector<int> labels;
    for (const auto& ex : batch) {
        inputs.push_back(model.standardizer.apply(ex.features));
        labels.push_back(ex.device_label);
    }

    const auto analytic = batch_gradient(model, inputs, labels);
    const std::size_t total = model.params.size();
    const auto want = static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(total)));
    const std::size_t count = std::min(total, std::max<std::size_t>(50, want));
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t k = 0; k < count; ++k) std::swap(idx[k], idx[k + rng.below(total - k)]);

    constexpr double step = 1e-5;
    GradientCheckReport report;
    report.kind = kind;
    report.total_params = total;
    report.checked = count;
    report.loss = batch_loss(model, inputs, labels);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t p = idx[k];
        const double saved = model.params[p];
        model.params[p] = saved + step;
        const double up = batch_loss(model, inputs, labels);
        model.params[p] = saved - step;
        const double down = batch_loss(model, inputs, labels);
        model.params[p] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), 1e-7});
        report.max_relative_error = std::max(report.max_relative_error, std::abs(analytic[p] - numeric) / denom);
    }
    report.passed = report.max_relative_error < tolerance;
    return report;
}

void save_model(const ClassifierModel& model, const fs::path& path) {
    model.validate();
    json header = {{"format_version", 1},
                   {"kind", std::string(to_string(model.kind))},
                   {"n_classes", model.n_classes},
                   {"input_dim", model.input_dim},
                   {"hidden_units", model.hidden_units},
                   {"leaky_slope", model.leaky_slope},
                   {"param_count", model.params.size()},
                   {"training",
                    {{"epochs", model.training.epochs},
                     {"optimizer", std::string(to_string(model.training.optimizer))},
                     {"learning_rate", model.training.learning_rate},
                     {"batch_size", model.training.batch_size},
                     {"seed", model.training.seed}}},
                   {"loss_history", model.loss_history},
                   {"standardizer", {{"mean", model.standardizer.mean}, {"stddev", model.standardizer.stddev}}}};
    const std::string text = header.dump();
    std::vector<std::uint8_t> bytes(model_magic, model_magic + 8);
    const auto len = static_cast<std::uint32_t>(text.size());
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(len >> (8 * b)));
    bytes.insert(bytes.end(), text.begin(), text.end());
    for (double p : model.params) append_f32_le(bytes, static_cast<float>(p));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

ClassifierModel load_model(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 12 || std::memcmp(bytes.data(), model_magic, 8) != 0) {
        throw Error(ErrorCode::BadFileFormat, path.string() + " is not a model checkpoint");
    }
    const std::uint32_t len = static_cast<std::uint32_t>(bytes[8]) | (static_cast<std::uint32_t>(bytes[9]) << 8) |
                              (static_cast<std::uint32_t>(bytes[10]) << 16) |
                              (static_cast<std::uint32_t>(bytes[11]) << 24);
    if (12 + static_cast<std::size_t>(len) > bytes.size()) throw Error(ErrorCode::BadFileFormat, "truncated header");
    ClassifierModel m;
    try {
        const json h = json::parse(bytes.begin() + 12, bytes.begin() + 12 + len);
        m.kind = parse_model_kind(h.at("kind").get<std::string>());
        m.n_classes = h.at("n_classes").get<std::size_t>();
        m.input_dim = h.at("input_dim").get<std::size_t>();
        m.hidden_units = h.at("hidden_units").get<std::size_t>();
        m.leaky_slope = h.at("leaky_slope").get<double>();
        const auto& t = h.at("training");
        m.training.epochs = t.at("epochs").get<std::size_t>();
        m.training.optimizer = parse_optimizer(t.value("optimizer", std::string("adam")));
        m.training.learning_rate = t.at("learning_rate").get<double>();
        m.training.batch_size = t.at("batch_size").get<std::size_t>();
        m.training.seed = t.at("seed").get<std::uint64_t>();
        m.training.hidden_units = m.hidden_units;
        m.training.leaky_slope = m.leaky_slope;
        m.loss_history = h.at("loss_history").get<std::vector<double>>();
        m.standardizer.mean = h.at("standardizer").at("mean").get<std::vector<double>>();
        m.standardizer.stddev = h.at("standardizer").at("stddev").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadFileFormat, std::string("checkpoint header: ") + e.what());
    }
    const std::size_t expected = layout_of(m).total;
    if (bytes.size() - 12 - len != expected * 4) {
        throw Error(ErrorCode::BadFileFormat, "checkpoint payload size does not match shapes");
    }
    m.params.resize(expected);
    const std::uint8_t* p = bytes.data() + 12 + len;
    for (std::size_t k = 0; k < expected; ++k) m.params[k] = load_f32_le(p + 4 * k);
    m.validate();
    return m;
}

}  // namespace vfdt_rf
