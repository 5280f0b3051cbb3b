#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfdt_rf/signal.hpp"

namespace vfdt_rf {

inline constexpr double default_capture_rate_hz = 45e6;
inline constexpr double default_center_freq_hz = 2.412e9;
inline constexpr int recording_format_version = 1;

struct RecordingMeta {
    std::string device_id = "unknown";
    std::string location_id = "unknown";
    double sample_rate_hz = default_capture_rate_hz;
    double center_freq_hz = default_center_freq_hz;
    std::string capture_notes;
    int format_version = recording_format_version;

    void validate() const;
    nlohmann::json to_json() const;
    static RecordingMeta from_json(const nlohmann::json& j);
    friend bool operator==(const RecordingMeta&, const RecordingMeta&) = default;
};

struct IQRead {
    IQSignal signal;
    RecordingMeta meta;
    bool sidecar_missing = false;
};

std::filesystem::path sidecar_path(const std::filesystem::path& iq_path);

// Little-endian float32 helpers; bit_cast based, independent of host order.
void append_f32_le(std::vector<std::uint8_t>& out, float v);
float load_f32_le(const std::uint8_t* p);

// Interleaved LE float32 I0,Q0,I1,Q1,... plus `<path>.json` sidecar.
void write_iq(const IQSignal& sig, const RecordingMeta& meta, const std::filesystem::path& path);
IQRead read_iq(const std::filesystem::path& path);

// Raw interleaved payload only (no sidecar); exposed for byte-level checks.
std::vector<std::uint8_t> encode_iq(const IQSignal& sig);
IQSignal decode_iq(std::span<const std::uint8_t> bytes, double sample_rate_hz);

struct CorpusEntry {
    RecordingMeta meta;
    std::string file;  // relative to the corpus directory
};

struct Corpus {
    std::vector<CorpusEntry> recordings;  // sorted by file name
    std::filesystem::path manifest_path;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    static Corpus load(const std::filesystem::path& manifest_path);
    std::filesystem::path directory() const { return manifest_path.parent_path(); }
};

// Scans `dir` for `.iq` files with sidecars, validates them and writes
// `dir/manifest.json`. Throws DuplicatePair or DanglingSidecar. `.iq` files
// without a sidecar are skipped and reported in Corpus::warnings.
Corpus build_manifest(const std::filesystem::path& dir);

}  // namespace vfdt_rf
