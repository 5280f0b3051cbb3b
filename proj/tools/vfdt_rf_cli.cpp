// vfdt-rf: corpus synthesis, feature extraction, training and figure export.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vfdt_rf/classify.hpp"
#include "vfdt_rf/dataio.hpp"
#include "vfdt_rf/error.hpp"
#include "vfdt_rf/experiment.hpp"
#include "vfdt_rf/features.hpp"
#include "vfdt_rf/txchain.hpp"
#include "vfdt_rf/vfdt.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vfdt_rf;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// shared plumbing

struct Common {
    std::size_t jobs = 1;
    std::string spec_path;
    json spec_content;  // null when no spec file was given

    json echo() const {
        if (spec_path.empty()) return nullptr;
        return json{{"path", spec_path}, {"content", spec_content}};
    }
};

json load_json_file(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw UsageError(std::string("cannot open ") + what + " '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(std::string(what) + " '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Flag beats spec file beats VFDT_RF_SEED beats 1.
std::uint64_t resolve_seed(const CLI::App* cmd, std::uint64_t flag, const json& spec) {
    if (cmd->count("--seed") > 0) return flag;
    if (spec.is_object() && spec.contains("seed")) return spec["seed"].get<std::uint64_t>();
    if (const char* env = std::getenv("VFDT_RF_SEED"); env != nullptr && *env != '\0') {
        std::uint64_t v = 0;
        const std::string_view text(env);
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
            throw UsageError("VFDT_RF_SEED must be an unsigned integer, got '" + std::string(text) + "'");
        }
        return v;
    }
    return 1;
}

// Runs fn(0..n-1) on up to `jobs` threads. Results must be written by index;
// the first exception (lowest index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                fn(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < std::min(jobs, n); ++w) pool.emplace_back(work);
        work();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<std::string> locations_in(const std::vector<LabeledExample>& examples) {
    std::set<std::string> locs;
    for (const auto& ex : examples) locs.insert(ex.location_label);
    return {locs.begin(), locs.end()};
}

const std::vector<std::string> mode_names{"amplitude", "increment"};
const std::vector<std::string> model_names{"softmax", "mlp1", "centroid"};

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::size_t devices = 30;
    std::size_t locations = 5;
    std::uint64_t seed = 1;
    std::string out;
    std::size_t samples = 4 * FeatureConfig{}.samples_per_example();
    double sample_rate = default_capture_rate_hz;
    std::size_t sps = 4;
    std::string shape = "rect";
    double drive_db = 0.0;
    bool independent_payloads = false;
};

// Location k (1-based) sits 3 dB further away and 5 dB noisier than k-1.
std::vector<ChannelProfile> default_locations(std::size_t n) {
    std::vector<ChannelProfile> out;
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back({-3.0 * static_cast<double>(k), 30.0 - 5.0 * static_cast<double>(k),
                       "loc" + std::to_string(k + 1)});
    }
    return out;
}

json profile_json(const ImpairmentProfile& p) {
    return json{{"iip3_dbm", p.iip3_dbm},
                {"iq_imbalance_db", p.iq_imbalance_db},
                {"phase_noise_max_offset_hz", p.phase_noise_max_offset_hz},
                {"cfo_hz", p.cfo_hz}};
}

int cmd_simulate(const CLI::App* cmd, const SimulateArgs& a, const Common& common) {
    std::vector<ChannelProfile> locations = default_locations(a.locations);
    if (common.spec_content.is_object() && common.spec_content.contains("locations")) {
        locations.clear();
        for (const auto& l : common.spec_content["locations"]) {
            locations.push_back({l.value("gain_db", 0.0), l.value("snr_db", 30.0), l.at("location_id").get<std::string>()});
        }
    }
    FleetOptions opts;
    opts.synth.sample_rate_hz = a.sample_rate;
    opts.synth.samples_per_symbol = a.sps;
    opts.synth.shape = parse_pulse_shape(a.shape);
    opts.synth.pa_drive_db = a.drive_db;
    opts.synth.n_bits = 2 * ((a.samples + a.sps - 1) / a.sps);
    opts.shared_payload = !a.independent_payloads;
    const RandomSource rng(resolve_seed(cmd, a.seed, common.spec_content));
    if (a.devices == 0) throw Error(ErrorCode::EmptyFleet, "fleet needs at least one device");
    if (locations.empty()) throw Error(ErrorCode::NoLocations, "fleet needs at least one location");
    for (const auto& l : locations) l.validate();

    const fs::path dir(a.out);
    fs::create_directories(dir);
    const auto profiles = fleet_profiles(a.devices, opts.ranges, rng);
    const std::size_t total = a.devices * locations.size();
    parallel_for(total, common.jobs, [&](std::size_t k) {
        const auto rec = synth_fleet_recording(k / locations.size(), k % locations.size(), profiles, locations, opts, rng);
        RecordingMeta meta;
        meta.device_id = rec.device_id;
        meta.location_id = rec.location_id;
        meta.sample_rate_hz = a.sample_rate;
        meta.capture_notes = "synthetic";
        write_iq(rec.signal, meta, dir / (rec.device_id + "_" + rec.location_id + ".iq"));
    });
    const auto corpus = build_manifest(dir);

    json fleet{{"devices", a.devices},
               {"seed", rng.seed()},
               {"rng", std::string(RandomSource::algorithm_id)},
               {"samples_per_recording", opts.synth.n_bits / 2 * a.sps},
               {"sample_rate_hz", a.sample_rate},
               {"samples_per_symbol", a.sps},
               {"pulse_shape", std::string(to_string(opts.synth.shape))},
               {"pa_drive_db", a.drive_db},
               {"shared_payload", opts.shared_payload},
               {"spec_file", common.echo()}};
    for (const auto& l : locations) {
        fleet["locations"].push_back({{"location_id", l.location_id}, {"gain_db", l.gain_db}, {"snr_db", l.snr_db}});
    }
    for (std::size_t d = 0; d < profiles.size(); ++d) {
        auto p = profile_json(profiles[d]);
        p["device_id"] = device_name(d);
        fleet["profiles"].push_back(p);
    }
    write_json(dir / "fleet.json", fleet);
    std::cout << "wrote " << corpus.recordings.size() << " recordings (" << a.devices << " devices x "
              << locations.size() << " locations) to " << dir.string() << "\nmanifest: " << corpus.manifest_path.string()
              << "\n";
    for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
    std::string manifest;
    std::string rep = "vfdt";
    std::size_t window = 256;
    std::size_t offset = 64;
    std::string mode = "amplitude";
    std::size_t max_per_recording = 0;
    std::string out;
};

fs::path manifest_file(const std::string& given) {
    fs::path p(given);
    if (fs::is_directory(p)) p /= "manifest.json";
    if (!fs::is_regular_file(p)) throw UsageError("manifest not found: '" + p.string() + "'");
    return p;
}

int cmd_extract(const ExtractArgs& a, const Common& common) {
    const auto corpus = Corpus::load(manifest_file(a.manifest));
    const auto rep = parse_representation(a.rep);
    FeatureConfig cfg{a.window, a.offset, parse_variance_mode(a.mode)};
    cfg.validate();

    std::set<std::string> device_set;
    for (const auto& r : corpus.recordings) device_set.insert(r.meta.device_id);
    const std::vector<std::string> devices(device_set.begin(), device_set.end());
    auto label_of = [&](const std::string& id) {
        return static_cast<int>(std::lower_bound(devices.begin(), devices.end(), id) - devices.begin());
    };

    const std::size_t n = corpus.recordings.size();
    std::vector<std::vector<LabeledExample>> per_recording(n);
    std::vector<std::string> failures(n);
    std::vector<std::optional<ErrorCode>> codes(n);
    parallel_for(n, common.jobs, [&](std::size_t k) {
        const auto& entry = corpus.recordings[k];
        try {
            const auto read = read_iq(corpus.directory() / entry.file);
            const ExampleLabels labels{label_of(entry.meta.device_id), entry.meta.location_id};
            per_recording[k] = rep == Representation::VFDT
                                   ? make_examples(read.signal, labels, cfg, a.max_per_recording)
                                   : make_raw_examples(read.signal, labels, a.max_per_recording);
        } catch (const Error& e) {
            failures[k] = e.what();
            codes[k] = e.code();
        }
    });

    ExampleFile file;
    file.representation = rep;
    file.device_ids = devices;
    json recordings = json::array();
    std::size_t ok = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& entry = corpus.recordings[k];
        json r{{"file", entry.file}, {"device_id", entry.meta.device_id}, {"location_id", entry.meta.location_id},
               {"examples", per_recording[k].size()}};
        if (codes[k]) {
            r["error"] = failures[k];
            std::cerr << "skipped " << entry.file << ": " << failures[k] << "\n";
        } else {
            ++ok;
        }
        recordings.push_back(r);
        std::move(per_recording[k].begin(), per_recording[k].end(), std::back_inserter(file.examples));
    }
    if (n == 0) throw Error(ErrorCode::NothingToExport, "manifest lists no recordings");
    if (ok == 0) {
        const auto first = std::find_if(codes.begin(), codes.end(), [](const auto& c) { return c.has_value(); });
        throw Error(**first, "no recording produced examples; first failure: " +
                                 failures[static_cast<std::size_t>(first - codes.begin())]);
    }

    const std::size_t per_example = rep == Representation::VFDT ? cfg.samples_per_example() : trajectory_len;
    const std::string rule = rep == Representation::VFDT
                                 ? "non-overlapping slices of window_len + 1023 * window_offset samples per stream"
                                 : "non-overlapping slices of 1024 samples per stream";
    file.provenance = {{"representation", std::string(to_string(rep))},
                       {"slice_rule", rule},
                       {"samples_per_example", per_example},
                       {"max_per_recording", a.max_per_recording},
                       {"manifest", corpus.manifest_path.string()},
                       {"recordings", recordings},
                       {"spec_file", common.echo()}};
    if (rep == Representation::VFDT) file.provenance["features"] = cfg.to_json();
    write_examples(a.out, file);
    std::cout << to_string(rep) << ": " << file.examples.size() << " examples from " << ok << "/" << n
              << " recordings, " << per_example << " samples per example (" << rule << ")\n"
              << "wrote " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train / eval / train-eval

struct TrainArgs {
    std::string examples;
    std::vector<std::string> train_locs;
    std::vector<std::string> test_locs;
    std::string model = "softmax";
    std::size_t epochs = TrainingConfig{}.epochs;
    double lr = TrainingConfig{}.learning_rate;
    std::string optimizer = "adam";
    std::size_t batch = TrainingConfig{}.batch_size;
    std::size_t hidden = TrainingConfig{}.hidden_units;
    std::size_t subset = 0;
    std::vector<std::size_t> subsets;
    double train_fraction = 0.9;
    std::uint64_t seed = 1;
    std::string model_out;
    std::string model_in;
    std::string out_dir;
};

// Spec file fields first, then any flag given on the command line.
ExperimentSpec build_spec(const CLI::App* cmd, const TrainArgs& a, const Common& common, const ExampleFile& data) {
    json j = ExperimentSpec{}.to_json();
    if (common.spec_content.is_object()) j.merge_patch(common.spec_content);
    auto flag = [&](const char* name, const char* key, const auto& value) {
        if (cmd->count(name) > 0) j[key] = value;
    };
    flag("--train-locs", "train_locations", a.train_locs);
    flag("--test-locs", "test_locations", a.test_locs);
    flag("--model", "model", a.model);
    flag("--epochs", "epochs", a.epochs);
    flag("--lr", "learning_rate", a.lr);
    flag("--optimizer", "optimizer", a.optimizer);
    flag("--batch", "batch_size", a.batch);
    flag("--hidden", "hidden_units", a.hidden);
    flag("--subset", "device_subset_size", a.subset);
    flag("--train-fraction", "train_fraction", a.train_fraction);
    j["seed"] = resolve_seed(cmd, a.seed, common.spec_content);
    j["representation"] = std::string(to_string(data.representation));
    if (j["train_locations"].empty()) throw UsageError("no training locations: pass --train-locs or a spec file");
    if (j["test_locations"].empty()) j["test_locations"] = locations_in(data.examples);
    return ExperimentSpec::from_json(j);
}

ExampleFile load_examples(const std::string& path) {
    if (!fs::is_regular_file(path)) throw UsageError("example file not found: '" + path + "'");
    return read_examples(path);
}

std::string joined(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : std::string(1, sep)) + s;
    return out;
}

json report_json(const ExperimentResult& r, const ExperimentSpec& spec, const std::string& examples,
                 const Common& common) {
    json per = json::object();
    for (const auto& [loc, rep] : r.per_test_location) per[loc] = rep.to_json();
    return json{{"spec", spec.to_json()},
                {"examples", examples},
                {"devices", r.devices},
                {"loss_history", r.model.loss_history},
                {"per_location", per},
                {"pooled", r.pooled.to_json()},
                {"spec_file", common.echo()}};
}

std::string accuracy_rows(const ExperimentResult& r, const ExperimentSpec& spec) {
    std::string rows;
    const auto train = joined(spec.train_locations, '+');
    const std::string rep(to_string(spec.representation));
    for (const auto& loc : spec.test_locations) {
        rows += train + "," + loc + "," + rep + "," + num(r.per_test_location.at(loc).accuracy) + "\n";
    }
    return rows;
}

const char* accuracy_header = "train_locs,test_loc,representation,accuracy\n";

void write_reports(const fs::path& dir, const ExperimentResult& r, const ExperimentSpec& spec,
                   const std::string& examples, const Common& common) {
    write_json(dir / "report.json", report_json(r, spec, examples, common));
    write_text(dir / "accuracy.csv", accuracy_header + accuracy_rows(r, spec));
    for (const auto& [loc, rep] : r.per_test_location) write_text(dir / ("confusion_" + loc + ".csv"), rep.confusion_csv());
    std::cout << "pooled accuracy " << num(r.pooled.accuracy) << " over " << r.pooled.total << " examples";
    for (const auto& loc : spec.test_locations) std::cout << "; " << loc << " " << num(r.per_test_location.at(loc).accuracy);
    std::cout << "\nwrote " << (dir / "report.json").string() << "\n";
}

fs::path sidecar_of(const std::string& model_path) { return model_path + ".json"; }

int cmd_train(const CLI::App* cmd, const TrainArgs& a, const Common& common) {
    const auto file = load_examples(a.examples);
    const auto spec = build_spec(cmd, a, common, file);
    const auto data = prepare_experiment(file.examples, file.device_ids, spec);
    const auto model = train(spec.model, data.train_set, spec.training);
    save_model(model, a.model_out);
    write_json(sidecar_of(a.model_out), json{{"spec", spec.to_json()},
                                             {"examples", a.examples},
                                             {"devices", data.devices},
                                             {"spec_file", common.echo()}});
    std::cout << "trained " << to_string(spec.model) << " on " << data.train_set.size() << " examples, "
              << data.devices.size() << " devices";
    if (!model.loss_history.empty()) std::cout << ", final loss " << num(model.loss_history.back());
    std::cout << "\nwrote " << a.model_out << "\n";
    return 0;
}

int cmd_eval(const CLI::App* cmd, const TrainArgs& a, const Common& common) {
    if (!fs::is_regular_file(a.model_in)) throw UsageError("model not found: '" + a.model_in + "'");
    const auto side = load_json_file(sidecar_of(a.model_in), "model sidecar");
    json j = side.at("spec");
    if (cmd->count("--test-locs") > 0) j["test_locations"] = a.test_locs;
    const std::string examples = cmd->count("--examples") > 0 ? a.examples : side.at("examples").get<std::string>();
    const auto spec = ExperimentSpec::from_json(j);
    const auto file = load_examples(examples);
    const auto model = load_model(a.model_in);
    const auto data = prepare_experiment(file.examples, file.device_ids, spec);
    write_reports(a.out_dir, evaluate_experiment(model, data, spec), spec, examples, common);
    return 0;
}

int cmd_train_eval(const CLI::App* cmd, const TrainArgs& a, const Common& common) {
    const auto file = load_examples(a.examples);
    const auto base = build_spec(cmd, a, common, file);
    const fs::path dir(a.out_dir);
    if (a.subsets.empty()) {
        write_reports(dir, run_experiment(file.examples, file.device_ids, base), base, a.examples, common);
        return 0;
    }
    // Scalability sweep: one run per device-subset size.
    std::string rows = "subset_size," + std::string(accuracy_header);
    for (const auto k : a.subsets) {
        auto spec = base;
        spec.device_subset_size = k;
        spec.validate();
        const auto r = run_experiment(file.examples, file.device_ids, spec);
        const auto sub = dir / ("subset_" + std::to_string(k));
        write_reports(sub, r, spec, a.examples, common);
        std::istringstream lines(accuracy_rows(r, spec));
        for (std::string line; std::getline(lines, line);) rows += std::to_string(k) + "," + line + "\n";
    }
    write_text(dir / "scalability.csv", rows);
    std::cout << "wrote " << (dir / "scalability.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// vfdt: one recording's trajectories

struct VfdtArgs {
    std::string in;
    std::size_t window = 256;
    std::size_t offset = 64;
    std::string mode = "amplitude";
    std::size_t start = 0;
    std::size_t count = 0;
    std::string out;
    std::string csv;
};

std::string trajectory_csv(const std::vector<double>& i, const std::vector<double>& q) {
    std::string text = "window_index,vfdt_i,vfdt_q\n";
    for (std::size_t k = 0; k < i.size(); ++k) text += std::to_string(k) + "," + num(i[k]) + "," + num(q[k]) + "\n";
    return text;
}

int cmd_vfdt(const VfdtArgs& a, const Common& common) {
    if (!fs::is_regular_file(a.in)) throw UsageError("recording not found: '" + a.in + "'");
    const auto read = read_iq(a.in);
    if (read.sidecar_missing) std::cerr << "warning: no sidecar for " << a.in << ", assuming defaults\n";
    const auto& sig = read.signal;
    if (a.start > sig.size()) throw Error(ErrorCode::StreamTooShort, "start beyond end of recording");
    const std::size_t len = a.count == 0 ? sig.size() - a.start : std::min(a.count, sig.size() - a.start);
    const WindowConfig window{a.window, a.offset};
    const auto mode = parse_variance_mode(a.mode);
    const auto ti = vfdt_trajectory(sig.i().subspan(a.start, len), window, mode);
    const auto tq = vfdt_trajectory(sig.q().subspan(a.start, len), window, mode);
    const json out{{"source", a.in},
                   {"device_id", read.meta.device_id},
                   {"location_id", read.meta.location_id},
                   {"sample_rate_hz", sig.sample_rate_hz()},
                   {"window_len", a.window},
                   {"window_offset", a.offset},
                   {"mode", std::string(to_string(mode))},
                   {"start", a.start},
                   {"samples", len},
                   {"vfdt_i", ti.values},
                   {"vfdt_q", tq.values},
                   {"spec_file", common.echo()}};
    if (!a.out.empty()) write_json(a.out, out);
    if (!a.csv.empty()) write_text(a.csv, trajectory_csv(ti.values, tq.values));
    if (a.out.empty() && a.csv.empty()) std::cout << trajectory_csv(ti.values, tq.values);
    else std::cerr << ti.values.size() << " windows per stream\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep: one impairment at a time

struct SweepArgs {
    std::string impairment = "pa";
    std::vector<double> settings;
    std::size_t trials = 4;
    double sample_rate = 1024.0;
    std::size_t sps = 4;
    std::size_t bits = 16000;
    std::string shape = "rect";
    std::string mode = "amplitude";
    std::size_t window = 256;
    std::size_t offset = 64;
    double drive_db = 0.0;
    std::uint64_t seed = 1;
    std::string out;
};

json stats_json(const StreamStats& s) {
    return json{{"mean", s.mean}, {"std_error", s.std_error}, {"windows", s.windows}, {"degenerate", s.degenerate}};
}

int cmd_sweep(const CLI::App* cmd, const SweepArgs& a, const Common& common) {
    const auto kind = parse_impairment_kind(a.impairment);
    SweepConfig cfg;
    cfg.synth.sample_rate_hz = a.sample_rate;
    cfg.synth.samples_per_symbol = a.sps;
    cfg.synth.n_bits = a.bits;
    cfg.synth.shape = parse_pulse_shape(a.shape);
    cfg.synth.pa_drive_db = a.drive_db;
    cfg.window = {a.window, a.offset};
    cfg.mode = parse_variance_mode(a.mode);
    cfg.trials = a.trials;
    cfg.seed = resolve_seed(cmd, a.seed, common.spec_content);
    const auto settings = a.settings.empty() ? published_settings(kind) : a.settings;
    const auto points = run_sweep(kind, settings, cfg);
    json out{{"impairment", std::string(to_string(kind))},
             {"config",
              {{"sample_rate_hz", a.sample_rate},
               {"samples_per_symbol", a.sps},
               {"n_bits", a.bits},
               {"pulse_shape", std::string(to_string(cfg.synth.shape))},
               {"mode", std::string(to_string(cfg.mode))},
               {"window_len", a.window},
               {"window_offset", a.offset},
               {"pa_drive_db", a.drive_db},
               {"trials", a.trials},
               {"seed", cfg.seed}}},
             {"points", json::array()},
             {"spec_file", common.echo()}};
    for (const auto& p : points) {
        out["points"].push_back({{"setting", p.setting},
                                 {"i", stats_json(p.i)},
                                 {"q", stats_json(p.q)},
                                 {"magnitude", stats_json(p.magnitude)},
                                 {"phase", stats_json(p.phase)}});
        std::cout << p.setting << ": I " << num(p.i.mean) << " Q " << num(p.q.mean) << " |x| " << num(p.magnitude.mean)
                  << "\n";
    }
    if (!a.out.empty()) write_json(a.out, out);
    return 0;
}

// ---------------------------------------------------------------------------
// export-plot

struct ExportArgs {
    std::string kind;
    std::vector<std::string> inputs;
    std::string out;
};

std::vector<fs::path> expand_reports(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& e : fs::recursive_directory_iterator(in)) {
                if (e.is_regular_file() && e.path().filename() == "report.json") out.push_back(e.path());
            }
        } else {
            out.emplace_back(in);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_export(const ExportArgs& a) {
    std::string text;
    std::size_t rows = 0;
    if (a.kind == "trajectory") {
        const auto j = load_json_file(a.inputs.at(0), "trajectory");
        const auto i = j.at("vfdt_i").get<std::vector<double>>();
        const auto q = j.at("vfdt_q").get<std::vector<double>>();
        text = trajectory_csv(i, q);
        rows = i.size();
    } else if (a.kind == "sweep") {
        text = "setting,mean_vfdt_i,mean_vfdt_q,mean_vfdt_mag\n";
        // A degenerate stream has no mean (null in JSON); its field stays empty.
        auto cell = [](const json& v) { return v.is_null() ? std::string() : num(v.get<double>()); };
        for (const auto& path : a.inputs) {
            const auto j = load_json_file(path, "sweep");
            for (const auto& p : j.at("points")) {
                text += cell(p.at("setting")) + "," + cell(p.at("i").at("mean")) + "," + cell(p.at("q").at("mean")) +
                        "," + cell(p.at("magnitude").at("mean")) + "\n";
                ++rows;
            }
        }
    } else {
        text = accuracy_header;
        for (const auto& path : expand_reports(a.inputs)) {
            const auto j = load_json_file(path, "report");
            const auto& spec = j.at("spec");
            const auto train = joined(spec.at("train_locations").get<std::vector<std::string>>(), '+');
            const auto rep = spec.at("representation").get<std::string>();
            for (const auto& [loc, r] : j.at("per_location").items()) {
                text += train + "," + loc + "," + rep + "," + num(r.at("accuracy").get<double>()) + "\n";
                ++rows;
            }
        }
    }
    if (rows == 0) throw Error(ErrorCode::NothingToExport, "no " + a.kind + " data in the given inputs");
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
        std::cerr << rows << " rows -> " << a.out << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradArgs {
    std::string model = "softmax";
    std::string examples;
    std::size_t batch = 30;
    std::size_t classes = 10;
    std::size_t hidden = 16;
    double tolerance = 1e-4;
    std::uint64_t seed = 1;
};

int cmd_gradcheck(const CLI::App* cmd, const GradArgs& a, const Common& common) {
    const auto kind = parse_model_kind(a.model);
    RandomSource rng(resolve_seed(cmd, a.seed, common.spec_content));
    std::vector<LabeledExample> batch;
    if (!a.examples.empty()) {
        auto file = load_examples(a.examples);
        file.examples.resize(std::min(a.batch, file.examples.size()));
        batch = std::move(file.examples);
    } else {
        // Random 2 x 1024 inputs with round-robin labels.
        RandomSource data = rng.split(99);
        for (std::size_t k = 0; k < a.batch; ++k) {
            LabeledExample e;
            e.features.resize(feature_dim);
            for (double& v : e.features) v = data.gaussian();
            e.device_label = static_cast<int>(k % a.classes);
            batch.push_back(std::move(e));
        }
    }
    const auto report = gradient_check(kind, batch, a.tolerance, rng, a.hidden);
    auto j = report.to_json();
    j["tolerance"] = a.tolerance;
    j["batch"] = batch.size();
    std::cout << j.dump(2) << "\n";
    if (!report.passed) {
        std::cerr << "gradient check failed: max relative error " << report.max_relative_error << " >= " << a.tolerance
                  << "\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------

void add_seed(CLI::App* cmd, std::uint64_t& seed) {
    cmd->add_option("--seed", seed, "RNG seed (default: spec file, then VFDT_RF_SEED, then 1)");
}

void add_training_flags(CLI::App* cmd, TrainArgs& a) {
    cmd->add_option("--model", a.model, "classifier")->check(CLI::IsMember(model_names));
    cmd->add_option("--epochs", a.epochs)->check(CLI::PositiveNumber);
    cmd->add_option("--lr", a.lr, "learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--optimizer", a.optimizer)->check(CLI::IsMember({"adam", "sgd"}));
    cmd->add_option("--batch", a.batch, "mini-batch size")->check(CLI::PositiveNumber);
    cmd->add_option("--hidden", a.hidden, "hidden units (mlp1)")->check(CLI::PositiveNumber);
    cmd->add_option("--subset", a.subset, "train on a random subset of this many devices (0: all)");
    cmd->add_option("--train-fraction", a.train_fraction)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--train-locs", a.train_locs, "training locations")->delimiter(',');
    cmd->add_option("--test-locs", a.test_locs, "test locations (default: all)")->delimiter(',');
    add_seed(cmd, a.seed);
}

int run(int argc, char** argv) {
    CLI::App app{"VFDT radio fingerprinting: simulate, extract, train, evaluate, export"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--jobs,-j", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--spec", common.spec_path, "JSON spec file, echoed into every output")->check(CLI::ExistingFile);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "synthesize a device x location corpus of .iq recordings");
    simulate->add_option("--devices", sim.devices)->check(CLI::PositiveNumber);
    simulate->add_option("--locations", sim.locations)->check(CLI::PositiveNumber);
    simulate->add_option("--out", sim.out, "output directory")->required();
    simulate->add_option("--samples", sim.samples, "samples per recording")->check(CLI::PositiveNumber);
    simulate->add_option("--fs", sim.sample_rate, "sample rate in Hz")->check(CLI::PositiveNumber);
    simulate->add_option("--sps", sim.sps, "samples per symbol")->check(CLI::PositiveNumber);
    simulate->add_option("--shape", sim.shape)->check(CLI::IsMember({"rect", "rrc"}));
    simulate->add_option("--drive-db", sim.drive_db, "gain ahead of the PA");
    simulate->add_flag("--independent-payloads", sim.independent_payloads, "draw a payload per recording");
    add_seed(simulate, sim.seed);

    ExtractArgs ext;
    auto* extract = app.add_subcommand("extract", "turn a corpus into an example file");
    extract->add_option("--manifest", ext.manifest, "manifest.json or corpus directory")->required();
    extract->add_option("--rep", ext.rep)->check(CLI::IsMember({"vfdt", "rawiq"}));
    extract->add_option("--window", ext.window)->check(CLI::PositiveNumber);
    extract->add_option("--offset", ext.offset)->check(CLI::PositiveNumber);
    extract->add_option("--mode", ext.mode)->check(CLI::IsMember(mode_names));
    extract->add_option("--max-per-recording", ext.max_per_recording, "cap on examples per recording (0: none)");
    extract->add_option("--out", ext.out, "example file")->required();

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train a classifier on the train split");
    train_cmd->add_option("--examples", tr.examples)->required();
    train_cmd->add_option("--out", tr.model_out, "model checkpoint")->required();
    add_training_flags(train_cmd, tr);

    TrainArgs ev;
    auto* eval = app.add_subcommand("eval", "score a trained model on the held-out split");
    eval->add_option("--model", ev.model_in, "model checkpoint")->required();
    eval->add_option("--examples", ev.examples, "default: the file used for training");
    eval->add_option("--test-locs", ev.test_locs)->delimiter(',');
    eval->add_option("--out", ev.out_dir, "report directory")->required();

    TrainArgs te;
    auto* train_eval = app.add_subcommand("train-eval", "train and evaluate in one step");
    train_eval->add_option("--examples", te.examples)->required();
    train_eval->add_option("--out", te.out_dir, "report directory")->required();
    train_eval->add_option("--subsets", te.subsets, "device-subset sweep, e.g. 10,15,20,25,30")->delimiter(',');
    add_training_flags(train_eval, te);

    ExportArgs exp;
    auto* export_plot = app.add_subcommand("export-plot", "write tidy CSV for plotting");
    export_plot->add_option("--kind", exp.kind)->required()->check(CLI::IsMember({"trajectory", "sweep", "accuracy"}));
    export_plot->add_option("--in", exp.inputs, "input JSON (accuracy also takes report directories)")->required();
    export_plot->add_option("--out", exp.out, "CSV path (default: stdout)");

    VfdtArgs vf;
    auto* vfdt = app.add_subcommand("vfdt", "dump the I and Q VFDT trajectories of one recording");
    vfdt->add_option("--in", vf.in, ".iq recording")->required();
    vfdt->add_option("--window", vf.window)->check(CLI::PositiveNumber);
    vfdt->add_option("--offset", vf.offset)->check(CLI::PositiveNumber);
    vfdt->add_option("--mode", vf.mode)->check(CLI::IsMember(mode_names));
    vfdt->add_option("--start", vf.start, "first sample");
    vfdt->add_option("--count", vf.count, "samples to analyse (0: rest of file)");
    vfdt->add_option("--out", vf.out, "JSON output");
    vfdt->add_option("--csv", vf.csv, "CSV output");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "mean VFDT against one impairment setting");
    sweep->add_option("--impairment", sw.impairment)->check(CLI::IsMember({"pa", "iq", "pn"}));
    sweep->add_option("--settings", sw.settings, "default: the published grid")->delimiter(',');
    sweep->add_option("--trials", sw.trials)->check(CLI::PositiveNumber);
    sweep->add_option("--fs", sw.sample_rate)->check(CLI::PositiveNumber);
    sweep->add_option("--sps", sw.sps)->check(CLI::PositiveNumber);
    sweep->add_option("--bits", sw.bits)->check(CLI::PositiveNumber);
    sweep->add_option("--shape", sw.shape)->check(CLI::IsMember({"rect", "rrc"}));
    sweep->add_option("--mode", sw.mode)->check(CLI::IsMember(mode_names));
    sweep->add_option("--window", sw.window)->check(CLI::PositiveNumber);
    sweep->add_option("--offset", sw.offset)->check(CLI::PositiveNumber);
    sweep->add_option("--drive-db", sw.drive_db);
    sweep->add_option("--out", sw.out, "JSON output");
    add_seed(sweep, sw.seed);

    GradArgs gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the analytic gradients");
    gradcheck->add_option("--model", gc.model)->check(CLI::IsMember({"softmax", "mlp1"}));
    gradcheck->add_option("--examples", gc.examples, "take the batch from an example file");
    gradcheck->add_option("--batch", gc.batch)->check(CLI::PositiveNumber);
    gradcheck->add_option("--classes", gc.classes)->check(CLI::Range(2, 1 << 16));
    gradcheck->add_option("--hidden", gc.hidden)->check(CLI::PositiveNumber);
    gradcheck->add_option("--tol", gc.tolerance)->check(CLI::PositiveNumber);
    add_seed(gradcheck, gc.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (!common.spec_path.empty()) common.spec_content = load_json_file(common.spec_path, "spec file");

    if (simulate->parsed()) return cmd_simulate(simulate, sim, common);
    if (extract->parsed()) return cmd_extract(ext, common);
    if (train_cmd->parsed()) return cmd_train(train_cmd, tr, common);
    if (eval->parsed()) return cmd_eval(eval, ev, common);
    if (train_eval->parsed()) return cmd_train_eval(train_eval, te, common);
    if (export_plot->parsed()) return cmd_export(exp);
    if (vfdt->parsed()) return cmd_vfdt(vf, common);
    if (sweep->parsed()) return cmd_sweep(sweep, sw, common);
    return cmd_gradcheck(gradcheck, gc, common);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        // the library wraps its own JSON failures, so this is a malformed input file
        std::cerr << "usage error: unexpected input JSON: " << e.what() << "\n";
        return 2;
    } catch (const vfdt_rf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
