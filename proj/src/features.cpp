#include "vfdt_rf/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "vfdt_rf/dataio.hpp"
#include "vfdt_rf/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vfdt_rf {

namespace {
constexpr char example_magic[8] = {'V', 'F', 'D', 'T', 'E', 'X', '0', '1'};
}

std::string_view to_string(Representation rep) { return rep == Representation::VFDT ? "vfdt" : "rawiq"; }

Representation parse_representation(std::string_view text) {
    if (text == "vfdt") return Representation::VFDT;
    if (text == "rawiq" || text == "iq") return Representation::RawIQ;
    throw Error(ErrorCode::BadArgument, "unknown representation '" + std::string(text) + "'");
}

void FeatureConfig::validate() const {
    window().validate();
    if (mode == VarianceMode::IncrementVariance && window_len < 3) {
        throw Error(ErrorCode::BadWindowConfig, "increment mode needs window_len >= 3");
    }
}

json FeatureConfig::to_json() const {
    return json{{"window_len", window_len},
                {"window_offset", window_offset},
                {"trajectory_len", trajectory_len},
                {"mode", std::string(to_string(mode))}};
}

FeatureConfig FeatureConfig::from_json(const json& j) {
    FeatureConfig c;
    c.window_len = j.at("window_len").get<std::size_t>();
    c.window_offset = j.at("window_offset").get<std::size_t>();
    c.mode = parse_variance_mode(j.at("mode").get<std::string>());
    c.validate();
    return c;
}

std::size_t vfdt_example_count(std::size_t n_samples, const FeatureConfig& cfg) {
    return n_samples / cfg.samples_per_example();
}

std::vector<LabeledExample> make_examples(const IQSignal& sig, const ExampleLabels& labels,
                                          const FeatureConfig& cfg, std::size_t max_examples) {
    cfg.validate();
    const std::size_t per = cfg.samples_per_example();
    std::size_t count = vfdt_example_count(sig.size(), cfg);
    if (count == 0) {
        throw Error(ErrorCode::RecordingTooShort, "recording of " + std::to_string(sig.size()) +
                                                      " samples; one VFDT example needs " + std::to_string(per));
    }
    if (max_examples > 0) count = std::min(count, max_examples);
    std::vector<LabeledExample> out(count);
    for (std::size_t e = 0; e < count; ++e) {
        auto& ex = out[e];
        ex.features.resize(feature_dim);
        ex.device_label = labels.device_label;
        ex.location_label = labels.location_label;
        ex.representation = Representation::VFDT;
        const std::span<double> dst(ex.features);
        try {
            vfdt_trajectory_into(sig.i().subspan(e * per, per), cfg.window(), cfg.mode,
                                 dst.first(trajectory_len));
            vfdt_trajectory_into(sig.q().subspan(e * per, per), cfg.window(), cfg.mode,
                                 dst.last(trajectory_len));
        } catch (const DegenerateWindowError&) {
            throw DegenerateWindowError(e, "degenerate window in example slice");
        }
    }
    return out;
}

std::vector<LabeledExample> make_raw_examples(const IQSignal& sig, const ExampleLabels& labels,
                                              std::size_t max_examples) {
    std::size_t count = sig.size() / trajectory_len;
    if (count == 0) {
        throw Error(ErrorCode::RecordingTooShort, "recording of " + std::to_string(sig.size()) +
                                                      " samples; one raw example needs 1024");
    }
    if (max_examples > 0) count = std::min(count, max_examples);
    std::vector<LabeledExample> out(count);
    for (std::size_t e = 0; e < count; ++e) {
        auto& ex = out[e];
        ex.features.resize(feature_dim);
        ex.device_label = labels.device_label;
        ex.location_label = labels.location_label;
        ex.representation = Representation::RawIQ;
        const auto i = sig.i().subspan(e * trajectory_len, trajectory_len);
        const auto q = sig.q().subspan(e * trajectory_len, trajectory_len);
        std::copy(i.begin(), i.end(), ex.features.begin());
        std::copy(q.begin(), q.end(), ex.features.begin() + trajectory_len);
    }
    return out;
}

Split split_dataset(std::vector<LabeledExample> examples, double train_fraction, RandomSource& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::BadArgument, "train_fraction must be in (0, 1)");
    }
    if (examples.size() < 2) throw Error(ErrorCode::TooFewExamples, "need at least 2 examples to split");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t k = 0; k < examples.size(); ++k) by_class[examples[k].device_label].push_back(k);
    Split split;
    for (auto& [label, idx] : by_class) {
        // Fisher-Yates with the counter-based source keeps the split reproducible.
        for (std::size_t k = idx.size(); k > 1; --k) std::swap(idx[k - 1], idx[rng.below(k)]);
        const std::size_t n = idx.size();
        auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
        if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
        for (std::size_t k = 0; k < n; ++k) {
            auto& dst = k < n_train ? split.train : split.test;
            dst.push_back(std::move(examples[idx[k]]));
        }
    }
    return split;
}

void write_examples(const fs::path& path, const ExampleFile& file) {
    json header = {{"format_version", 1},
                   {"representation", std::string(to_string(file.representation))},
                   {"count", file.examples.size()},
                   {"feature_rows", 2},
                   {"feature_cols", trajectory_len},
                   {"record_size", example_record_size},
                   {"location_label_width", location_label_width},
                   {"device_ids", file.device_ids},
                   {"provenance", file.provenance}};
    const std::string text = header.dump();
    std::vector<std::uint8_t> bytes;
    bytes.reserve(12 + text.size() + file.examples.size() * example_record_size);
    bytes.insert(bytes.end(), example_magic, example_magic + 8);
    const auto len = static_cast<std::uint32_t>(text.size());
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(len >> (8 * b)));
    bytes.insert(bytes.end(), text.begin(), text.end());
    for (const auto& ex : file.examples) {
        if (ex.features.size() != feature_dim) {
            throw Error(ErrorCode::ShapeMismatch, "example is not 2 x 1024");
        }
        if (ex.location_label.size() > location_label_width) {
            throw Error(ErrorCode::BadArgument, "location label longer than 32 bytes: " + ex.location_label);
        }
        if (ex.device_label < 0 || ex.device_label > 0xFFFF) {
            throw Error(ErrorCode::BadArgument, "device label out of uint16 range");
        }
        for (double v : ex.features) append_f32_le(bytes, static_cast<float>(v));
        const auto label = static_cast<std::uint16_t>(ex.device_label);
        bytes.push_back(static_cast<std::uint8_t>(label & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>(label >> 8));
        std::array<std::uint8_t, location_label_width> loc{};
        std::memcpy(loc.data(), ex.location_label.data(), ex.location_label.size());
        bytes.insert(bytes.end(), loc.begin(), loc.end());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

ExampleFile read_examples(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 12 || std::memcmp(bytes.data(), example_magic, 8) != 0) {
        throw Error(ErrorCode::BadFileFormat, path.string() + " is not an example file");
    }
    const std::uint32_t len = static_cast<std::uint32_t>(bytes[8]) | (static_cast<std::uint32_t>(bytes[9]) << 8) |
                              (static_cast<std::uint32_t>(bytes[10]) << 16) |
                              (static_cast<std::uint32_t>(bytes[11]) << 24);
    if (12 + static_cast<std::size_t>(len) > bytes.size()) {
        throw Error(ErrorCode::BadFileFormat, "truncated header in " + path.string());
    }
    json header;
    try {
        header = json::parse(bytes.begin() + 12, bytes.begin() + 12 + len);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadFileFormat, std::string("header: ") + e.what());
    }
    ExampleFile file;
    std::size_t count = 0;
    try {
        file.representation = parse_representation(header.at("representation").get<std::string>());
        count = header.at("count").get<std::size_t>();
        file.device_ids = header.value("device_ids", std::vector<std::string>{});
        file.provenance = header.value("provenance", json::object());
        if (header.at("record_size").get<std::size_t>() != example_record_size) {
            throw Error(ErrorCode::BadFileFormat, "unexpected record size");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadFileFormat, std::string("header: ") + e.what());
    }
    const std::size_t body = bytes.size() - 12 - len;
    if (body != count * example_record_size) {
        throw Error(ErrorCode::BadFileFormat, "payload holds " + std::to_string(body) + " bytes, expected " +
                                                  std::to_string(count) + " records of " +
                                                  std::to_string(example_record_size));
    }
    file.examples.resize(count);
    const std::uint8_t* p = bytes.data() + 12 + len;
    for (auto& ex : file.examples) {
        ex.features.resize(feature_dim);
        for (std::size_t k = 0; k < feature_dim; ++k) ex.features[k] = load_f32_le(p + 4 * k);
        p += feature_dim * 4;
        ex.device_label = static_cast<int>(p[0] | (p[1] << 8));
        p += 2;
        const auto* end = std::find(p, p + location_label_width, std::uint8_t{0});
        ex.location_label.assign(p, end);
        p += location_label_width;
        ex.representation = file.representation;
    }
    return file;
}

}  // namespace vfdt_rf
