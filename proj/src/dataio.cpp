#include "vfdt_rf/dataio.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "vfdt_rf/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vfdt_rf {

void RecordingMeta::validate() const {
    if (device_id.empty()) throw Error(ErrorCode::BadSidecar, "device_id is empty");
    if (location_id.empty()) throw Error(ErrorCode::BadSidecar, "location_id is empty");
    if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::BadSampleRate, "sample_rate_hz must be > 0");
}

json RecordingMeta::to_json() const {
    return json{{"device_id", device_id},
                {"location_id", location_id},
                {"sample_rate_hz", sample_rate_hz},
                {"center_freq_hz", center_freq_hz},
                {"capture_notes", capture_notes},
                {"format_version", format_version}};
}

RecordingMeta RecordingMeta::from_json(const json& j) {
    try {
        RecordingMeta m;
        m.device_id = j.at("device_id").get<std::string>();
        m.location_id = j.at("location_id").get<std::string>();
        m.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        m.center_freq_hz = j.value("center_freq_hz", default_center_freq_hz);
        m.capture_notes = j.value("capture_notes", std::string{});
        m.format_version = j.value("format_version", recording_format_version);
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadSidecar, e.what());
    }
}

fs::path sidecar_path(const fs::path& iq_path) { return fs::path(iq_path.string() + ".json"); }

void append_f32_le(std::vector<std::uint8_t>& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

float load_f32_le(const std::uint8_t* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

std::vector<std::uint8_t> encode_iq(const IQSignal& sig) {
    std::vector<std::uint8_t> out;
    out.reserve(sig.size() * 8);
    for (std::size_t n = 0; n < sig.size(); ++n) {
        append_f32_le(out, static_cast<float>(sig.i()[n]));
        append_f32_le(out, static_cast<float>(sig.q()[n]));
    }
    return out;
}

IQSignal decode_iq(std::span<const std::uint8_t> bytes, double sample_rate_hz) {
    if (bytes.size() % 8 != 0) {
        throw Error(ErrorCode::OddFloatCount,
                    std::to_string(bytes.size()) + " bytes is not a whole number of float32 I/Q pairs");
    }
    const std::size_t n = bytes.size() / 8;
    std::vector<double> i(n), q(n);
    for (std::size_t k = 0; k < n; ++k) {
        i[k] = load_f32_le(bytes.data() + 8 * k);
        q[k] = load_f32_le(bytes.data() + 8 * k + 4);
    }
    return IQSignal(std::move(i), std::move(q), sample_rate_hz);
}

namespace {

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadSidecar, path.string() + ": " + e.what());
    }
}

}  // namespace

void write_iq(const IQSignal& sig, const RecordingMeta& meta, const fs::path& path) {
    meta.validate();
    write_file(path, encode_iq(sig));
    write_text(sidecar_path(path), meta.to_json().dump(2) + "\n");
}

IQRead read_iq(const fs::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() % 8 != 0) {
        throw Error(ErrorCode::OddFloatCount, path.string() + " holds " + std::to_string(bytes.size()) +
                                                  " bytes, not a whole number of float32 I/Q pairs");
    }
    const auto side = sidecar_path(path);
    RecordingMeta meta;
    bool missing = true;
    if (fs::exists(side)) {
        meta = RecordingMeta::from_json(read_json(side));
        missing = false;
    }
    return IQRead{decode_iq(bytes, meta.sample_rate_hz), std::move(meta), missing};
}

json Corpus::to_json() const {
    json arr = json::array();
    for (const auto& e : recordings) {
        json j = e.meta.to_json();
        j["file"] = e.file;
        arr.push_back(std::move(j));
    }
    return arr;
}

Corpus Corpus::load(const fs::path& manifest_path) {
    if (!fs::exists(manifest_path)) {
        throw Error(ErrorCode::IoFailure, "manifest " + manifest_path.string() + " does not exist");
    }
    const json arr = read_json(manifest_path);
    if (!arr.is_array()) throw Error(ErrorCode::BadSidecar, "manifest must be a JSON array");
    Corpus c;
    c.manifest_path = manifest_path;
    for (const auto& j : arr) {
        CorpusEntry e{RecordingMeta::from_json(j), j.value("file", std::string{})};
        if (e.file.empty()) throw Error(ErrorCode::BadSidecar, "manifest entry without file");
        c.recordings.push_back(std::move(e));
    }
    return c;
}

Corpus build_manifest(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
    std::set<std::string> iq_files;
    std::set<std::string> sidecars;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() > 3 && name.ends_with(".iq")) iq_files.insert(name);
        else if (name.size() > 8 && name.ends_with(".iq.json")) sidecars.insert(name);
    }
    Corpus c;
    c.manifest_path = dir / "manifest.json";
    for (const auto& side : sidecars) {
        const std::string iq = side.substr(0, side.size() - 5);
        if (!iq_files.contains(iq)) {
            throw Error(ErrorCode::DanglingSidecar, side + " has no matching " + iq);
        }
    }
    std::map<std::pair<std::string, std::string>, std::string> seen;
    for (const auto& iq : iq_files) {
        if (!sidecars.contains(iq + ".json")) {
            c.warnings.push_back(iq + " has no sidecar; skipped");
            continue;
        }
        auto meta = RecordingMeta::from_json(read_json(dir / (iq + ".json")));
        const auto size = fs::file_size(dir / iq);
        if (size % 8 != 0) {
            throw Error(ErrorCode::OddFloatCount, iq + " is not a whole number of float32 I/Q pairs");
        }
        const auto key = std::make_pair(meta.device_id, meta.location_id);
        if (auto it = seen.find(key); it != seen.end()) {
            throw Error(ErrorCode::DuplicatePair, "device '" + key.first + "' at location '" + key.second +
                                                      "' appears in both " + it->second + " and " + iq);
        }
        seen.emplace(key, iq);
        c.recordings.push_back(CorpusEntry{std::move(meta), iq});
    }
    // std::set iteration already yields lexicographic file order.
    write_text(c.manifest_path, c.to_json().dump(2) + "\n");
    return c;
}

}  // namespace vfdt_rf
