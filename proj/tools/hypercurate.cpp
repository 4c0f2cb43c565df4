// hypercurate command-line driver.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hypercurate/benchmark.hpp"
#include "hypercurate/curation.hpp"
#include "hypercurate/errors.hpp"
#include "hypercurate/ingest.hpp"
#include "hypercurate/metrics.hpp"
#include "hypercurate/oracle.hpp"
#include "hypercurate/raster_io.hpp"
#include "hypercurate/stats.hpp"

namespace fs = std::filesystem;
using namespace hypercurate;
using ojson = nlohmann::ordered_json;

namespace {

struct Globals {
    std::string config_path;
    std::uint64_t seed = 0;
    int workers = 0;  // 0: take from config
    std::string out = ".";
    KeyValueConfig kv;
};

void log(const std::string& msg) { std::cerr << msg << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path out_dir(const Globals& g) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw IoError("cannot create output directory '" + g.out + "': " + ec.message());
    return g.out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::set<int> parse_months(const std::string& text) {
    std::set<int> months;
    if (text == "all") return months;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        int m = 0;
        try {
            m = std::stoi(item);
        } catch (const std::logic_error&) {
            throw ValidationError("bad month '" + item + "' in season list");
        }
        if (m < 1 || m > 12) throw ValidationError("season months must lie in 1..12, got " + item);
        months.insert(m);
    }
    return months;
}

SplitRatios parse_ratios(const std::vector<double>& v) {
    if (v.size() != 3) throw ValidationError("split ratios need three values: train,val,test");
    return SplitRatios{v[0], v[1], v[2]};
}

void write_stats(const fs::path& dir, const DatasetStats& s) {
    s.check();
    write_text(dir / "stats.json", s.to_json());
    write_text(dir / "timestamps_histogram.csv", timestamps_csv(s));
    write_text(dir / "monthly.csv", monthly_csv(s));
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string manifest;
    std::optional<double> cloud_max;
    bool require_rasters = false;
};

int cmd_ingest(Globals& g, const IngestArgs& a) {
    IngestOptions opts;
    opts.cloud_max = a.cloud_max.value_or(g.kv.get_double("cloud_max", opts.cloud_max));
    opts.require_rasters = a.require_rasters || g.kv.get_bool("require_rasters", false);
    const IngestReport rep = ingest_file(a.manifest, opts);
    const fs::path dir = out_dir(g);
    write_tile_manifest((dir / "catalog.jsonl").string(), rep.accepted);
    write_text(dir / "ingest_report.json", rep.to_json());
    log("ingest: " + std::to_string(rep.accepted.size()) + " accepted, " + std::to_string(rep.rejected.size()) +
        " rejected, " + std::to_string(rep.warnings.size()) + " warnings");
    for (const auto& r : rep.rejected) log("  line " + std::to_string(r.line) + " " + r.tile_id + ": " + r.reason);
    return 0;
}

// ---------------------------------------------------------------------------

struct CurateArgs {
    std::string catalog;
    std::string beam;
    std::optional<int> max_order;
    std::optional<long long> min_dt;
    std::optional<int> patch_px;
    bool export_patches = false;
    std::string mask;
};

int cmd_curate(Globals& g, const CurateArgs& a) {
    if (!a.beam.empty()) g.kv.set("beam", a.beam);
    if (a.max_order) g.kv.set("max_order", std::to_string(*a.max_order));
    if (a.min_dt) g.kv.set("min_dt_seconds", std::to_string(*a.min_dt));
    if (a.patch_px) g.kv.set("patch_px", std::to_string(*a.patch_px));
    if (!a.mask.empty()) g.kv.set("band_mask_ref", a.mask == "none" ? "" : a.mask);
    if (g.workers > 0) g.kv.set("worker_count", std::to_string(g.workers));
    const CurationConfig cfg = CurationConfig::from(g.kv);

    const auto all = read_tile_manifest(a.catalog);
    const auto tiles = filter_by_cloud(all, cfg.cloud_max);
    if (tiles.size() != all.size()) {
        log("curate: " + std::to_string(all.size() - tiles.size()) + " tiles above cloud_max dropped");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const PatchManifest m = curate(tiles, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path dir = out_dir(g);
    write_manifest_file((dir / "manifest.tsv").string(), m.records);
    const DatasetStats s = compute_stats(m.records);
    write_stats(dir, s);
    log("curate: " + std::to_string(tiles.size()) + " tiles, " + std::to_string(m.components) + " components, " +
        std::to_string(m.combinations) + " combinations, " + std::to_string(s.n_locations) + " locations, " +
        std::to_string(s.n_patches) + " patches, " + std::to_string(s.n_multitemporal) + " multi-temporal (" +
        format_double(std::round(1000 * s.multitemporal_fraction()) / 10) + "%) in " +
        format_double(std::round(secs * 100) / 100) + " s");

    if (a.export_patches) {
        std::map<std::string, const TileRecord*> by_id;
        for (const auto& t : tiles) by_id[t.tile_id] = &t;
        std::optional<BandMask> mask;
        if (!cfg.band_mask_ref.empty()) mask = BandMask::load(cfg.band_mask_ref);
        std::size_t written = 0, nodata = 0;
        for (const auto& r : m.records) {
            const fs::path loc = dir / "patches" / r.location_id;
            fs::create_directories(loc);
            for (const auto& mem : r.members) {
                const TileRecord& t = *by_id.at(mem.tile_id);
                const BandMask use = mask ? *mask : BandMask::all(static_cast<std::size_t>(t.band_count));
                try {
                    write_patch(read_window(t, r.window, use), (loc / (mem.tile_id + ".hsrc")).string());
                    ++written;
                } catch (const NoDataError& e) {
                    ++nodata;
                }
            }
        }
        log("curate: exported " + std::to_string(written) + " patch cubes, " + std::to_string(nodata) +
            " rejected for no-data");
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct PairArgs {
    std::string manifest;
    std::string labels;
    std::string aggregation;
    std::string task = "multilabel";
    std::optional<double> min_fraction;
    std::string resampling = "nearest";
    std::optional<std::size_t> rebalance_to;
    std::optional<double> cap;
    std::string season;
    std::string split;
};

int cmd_pair(Globals& g, const PairArgs& a) {
    if (a.task != "multilabel" && a.task != "segmentation") {
        throw ValidationError("task must be 'multilabel' or 'segmentation'");
    }
    const bool seg = a.task == "segmentation";
    if (a.resampling != "nearest" && a.resampling != "majority") {
        throw ValidationError("resampling must be 'nearest' or 'majority'");
    }
    const double min_fraction = a.min_fraction.value_or(g.kv.get_double("min_fraction", 0.0));
    const double cap = a.cap.value_or(g.kv.get_double("rebalance_cap", 0.25));
    const std::size_t rebalance_to =
        a.rebalance_to.value_or(static_cast<std::size_t>(g.kv.get_int("rebalance_count", 0)));
    const std::string season_text =
        !a.season.empty() ? a.season : g.kv.get_string("season_months", seg ? "6,7,8" : "all");
    const std::set<int> months = parse_months(season_text);
    std::vector<double> ratio_values = g.kv.get_doubles("split_ratios", {0.7, 0.15, 0.15});
    if (!a.split.empty()) {
        KeyValueConfig tmp;
        tmp.set("split", a.split);
        ratio_values = tmp.get_doubles("split", {});
    }
    const SplitRatios ratios = parse_ratios(ratio_values);
    const auto mode = a.resampling == "majority" ? Resampling::majority : Resampling::nearest;

    const auto records = read_manifest_file(a.manifest);
    const LabelRaster labels = LabelRaster::load(a.labels);
    const AggregationMap agg = AggregationMap::load(a.aggregation);
    const std::size_t k = agg.class_count();

    struct Item {
        PatchRecord record;  // members reduced to the chosen acquisition
        std::optional<MultiLabelTarget> target;
        std::optional<SegmentationPair> pair;
    };
    std::vector<Item> items;
    std::size_t off_season = 0, uncovered = 0, empty = 0;
    for (const auto& r : records) {
        const auto member = months.empty() ? std::optional<PatchMember>(r.members.front()) : member_in_season(r, months);
        if (!member) {
            ++off_season;
            continue;
        }
        Item it{PatchRecord{r.location_id, r.window, {*member}}, std::nullopt, std::nullopt};
        try {
            if (seg) {
                it.pair = segmentation_mask(r.window, labels, agg, mode);
                if (std::all_of(it.pair->mask.begin(), it.pair->mask.end(), [](auto v) { return v == kIgnoreIndex; })) {
                    ++empty;
                    continue;
                }
            } else {
                it.target = multilabel_from_raster(r.window, labels, agg, min_fraction);
                if (!it.target) {
                    ++empty;
                    continue;
                }
            }
        } catch (const CoverageError&) {
            ++uncovered;
            continue;
        }
        items.push_back(std::move(it));
    }

    ojson report;
    report["task"] = a.task;
    report["aggregation"] = agg.name;
    report["records_in"] = records.size();
    report["skipped"] = {{"off_season", off_season}, {"outside_labels", uncovered}, {"no_valid_labels", empty}};

    if (seg && rebalance_to > 0) {
        std::vector<SegmentationPair> pool;
        for (const auto& it : items) pool.push_back(*it.pair);
        const auto rb = rebalance(pool, rebalance_to, cap, g.seed, k);
        if (!rb.cap_satisfied) {
            log("pair: warning: cap " + format_double(cap) + " not reachable with this pool; max class share " +
                format_double(rb.max_share));
        }
        std::vector<Item> kept;
        for (std::size_t idx : rb.selected) kept.push_back(std::move(items[idx]));
        std::sort(kept.begin(), kept.end(),
                  [](const Item& x, const Item& y) { return x.record.location_id < y.record.location_id; });
        items = std::move(kept);
        report["rebalance"] = {{"target_count", rebalance_to},
                               {"cap_fraction", cap},
                               {"cap_satisfied", rb.cap_satisfied},
                               {"max_share", rb.max_share}};
    }

    std::vector<PatchRecord> chosen;
    for (const auto& it : items) chosen.push_back(it.record);
    const auto splits = make_split(chosen, ratios, g.seed);

    const fs::path dir = out_dir(g);
    ClassHistogram hist{agg.name, agg.class_names, std::vector<std::uint64_t>(k, 0)};
    std::map<std::string, std::size_t> split_counts;
    std::string lines;
    if (seg) fs::create_directories(dir / "masks");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        const auto& mem = it.record.members.front();
        ojson j;
        j["location_id"] = it.record.location_id;
        j["tile_id"] = mem.tile_id;
        j["timestamp"] = format_iso8601(mem.timestamp);
        if (seg) {
            const auto h = class_histogram(*it.pair, k);
            for (std::size_t c = 0; c < k; ++c) hist.counts[c] += h[c];
            RasterHeader mh;
            mh.width = mh.height = static_cast<std::uint32_t>(it.pair->size);
            mh.bands = 1;
            mh.dtype = SampleType::uint8;
            mh.nodata = kIgnoreIndex;
            mh.gsd = it.record.window.gsd;
            mh.crs = it.record.window.crs;
            mh.origin = {it.record.window.origin().x, it.record.window.origin().y + it.record.window.side()};
            const std::string rel = "masks/" + it.record.location_id + ".hsrc";
            write_raster((dir / rel).string(), mh, std::span<const std::uint8_t>(it.pair->mask));
            j["mask"] = rel;
        } else {
            for (int c : it.target->classes) ++hist.counts[static_cast<std::size_t>(c)];
            j["classes"] = it.target->classes;
        }
        j["split"] = std::string(split_name(splits[i]));
        ++split_counts[std::string(split_name(splits[i]))];
        lines += j.dump() + "\n";
    }
    write_text(dir / (seg ? "pairs.jsonl" : "targets.jsonl"), lines);
    write_text(dir / "class_histogram.csv", class_histogram_csv(hist, seg ? "pixels" : "samples"));
    report["records_out"] = items.size();
    report["splits"] = split_counts;
    report["class_histogram"] = {{"classes", hist.class_names}, {"counts", hist.counts}};
    write_text(dir / "pair_stats.json", report.dump(2) + "\n");
    log("pair: " + std::to_string(items.size()) + " " + a.task + " samples from " + std::to_string(records.size()) +
        " locations");
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string task;
    std::string pred;
    std::string target;
    std::optional<std::size_t> classes;
    bool per_image = false;
    std::string baseline_means;
};

/// JSON-lines keyed by `key_field`, with an array under `value_field`.
std::map<std::string, ojson> read_keyed_jsonl(const std::string& path, const std::string& key_field,
                                             const std::string& value_field) {
    std::map<std::string, ojson> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path + ":" + std::to_string(i + 1);
        ojson j;
        try {
            j = ojson::parse(lines[i]);
        } catch (const ojson::parse_error& e) {
            throw ValidationError(where + ": malformed JSON line");
        }
        if (!j.is_object() || !j.contains(key_field) || !j[key_field].is_string() || !j.contains(value_field) ||
            !j[value_field].is_array()) {
            throw ValidationError(where + ": expected an object with string '" + key_field + "' and array '" +
                                  value_field + "'");
        }
        const std::string key = j[key_field].get<std::string>();
        if (!out.emplace(key, j[value_field]).second) throw ValidationError(where + ": duplicate key '" + key + "'");
    }
    return out;
}

ojson eval_multilabel(const EvalArgs& a) {
    const auto pred = read_keyed_jsonl(a.pred, "location_id", "classes");
    const auto target = read_keyed_jsonl(a.target, "location_id", "classes");
    std::size_t k = a.classes.value_or(0);
    auto indices = [&](const ojson& arr, const std::string& file, const std::string& key) {
        std::vector<std::size_t> v;
        for (const auto& c : arr) {
            if (!c.is_number_integer() || c.get<long long>() < 0) {
                throw ValidationError(file + ": record '" + key + "' has a non-integer class");
            }
            v.push_back(c.get<std::size_t>());
        }
        return v;
    };
    if (!a.classes) {
        for (const auto* m : {&pred, &target}) {
            for (const auto& [key, arr] : *m) {
                for (auto c : indices(arr, "input", key)) k = std::max(k, c + 1);
            }
        }
    }
    MultiLabelBatch b;
    b.classes = std::max<std::size_t>(k, 1);
    for (const auto& [key, arr] : target) {
        auto p = pred.find(key);
        if (p == pred.end()) throw ValidationError(a.pred + ": no prediction for '" + key + "'");
        b.predictions.resize((b.samples + 1) * b.classes, 0);
        b.targets.resize((b.samples + 1) * b.classes, 0);
        for (auto c : indices(arr, a.target, key)) {
            if (c >= b.classes) throw ValidationError(a.target + ": class " + std::to_string(c) + " >= K");
            b.targets[b.samples * b.classes + c] = 1;
        }
        for (auto c : indices(p->second, a.pred, key)) {
            if (c >= b.classes) throw ValidationError(a.pred + ": class " + std::to_string(c) + " >= K");
            b.predictions[b.samples * b.classes + c] = 1;
        }
        ++b.samples;
    }
    if (pred.size() != target.size()) log("eval: warning: predictions without targets are ignored");
    const auto r = f1_multilabel(b);
    ojson j;
    j["headline"] = {{"metric", "f1_macro"}, {"value", r.macro}};
    j["f1_micro"] = r.micro;
    j["f1_macro"] = r.macro;
    j["samples"] = b.samples;
    j["classes"] = b.classes;
    j["per_class"] = ojson::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& pc = r.per_class[c];
        j["per_class"].push_back(
            {{"class", c}, {"tp", pc.tp}, {"fp", pc.fp}, {"fn", pc.fn}, {"f1", pc.f1}, {"counted", pc.counted}});
    }
    return j;
}

ojson eval_segmentation(const EvalArgs& a) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.target)) {
        if (e.path().extension() == ".hsrc") files.push_back(e.path().filename());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError(a.target + ": no .hsrc masks found");
    MaskBatch b;
    std::size_t k = a.classes.value_or(0);
    for (const auto& f : files) {
        const Raster t = read_raster((fs::path(a.target) / f).string());
        const fs::path pp = fs::path(a.pred) / f;
        if (!fs::exists(pp)) throw ValidationError(pp.string() + ": missing prediction mask");
        const Raster p = read_raster(pp.string());
        if (t.header.bands != 1 || p.header.bands != 1 || t.header.width != p.header.width ||
            t.header.height != p.header.height) {
            throw ValidationError(pp.string() + ": mask shape differs from target");
        }
        if (b.samples == 0) {
            b.height = t.header.height;
            b.width = t.header.width;
        } else if (b.height != t.header.height || b.width != t.header.width) {
            throw ValidationError(f.string() + ": all masks must share one size");
        }
        for (std::size_t i = 0; i < t.samples.size(); ++i) {
            const auto tv = static_cast<std::uint8_t>(t.samples[i]);
            const auto pv = static_cast<std::uint8_t>(p.samples[i]);
            if (!a.classes) {
                if (tv != MaskBatch::kIgnore) k = std::max<std::size_t>(k, tv + 1u);
                if (pv != MaskBatch::kIgnore) k = std::max<std::size_t>(k, pv + 1u);
            }
            b.targets.push_back(tv);
            b.predictions.push_back(pv);
        }
        ++b.samples;
    }
    b.classes = std::max<std::size_t>(k, 1);
    const auto r = miou(b, a.per_image);
    ojson j;
    j["headline"] = {{"metric", a.per_image ? "miou_per_image" : "miou"}, {"value", r.miou}};
    j["miou"] = r.miou;
    j["samples"] = b.samples;
    j["classes"] = b.classes;
    j["per_class"] = ojson::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& pc = r.per_class[c];
        j["per_class"].push_back({{"class", c},
                                  {"intersection", pc.intersection},
                                  {"union", pc.union_},
                                  {"iou", pc.iou},
                                  {"present", pc.present}});
    }
    return j;
}

ojson eval_regression(const EvalArgs& a, const KeyValueConfig& kv) {
    const auto pred = read_keyed_jsonl(a.pred, "id", "values");
    const auto target = read_keyed_jsonl(a.target, "id", "values");
    std::vector<double> means;
    if (!a.baseline_means.empty()) {
        KeyValueConfig tmp;
        tmp.set("m", a.baseline_means);
        means = tmp.get_doubles("m", {});
    } else {
        means = kv.get_doubles("baseline_means", {});
    }
    if (means.empty()) throw ValidationError("regression eval needs training-set --baseline-means");
    RegressionBatch b;
    b.params = means.size();
    b.baseline_means = means;
    auto values = [&](const ojson& arr, const std::string& file, const std::string& key) {
        if (arr.size() != b.params) {
            throw ValidationError(file + ": record '" + key + "' has " + std::to_string(arr.size()) +
                                  " values, expected " + std::to_string(b.params));
        }
        for (const auto& v : arr) {
            if (!v.is_number()) throw ValidationError(file + ": record '" + key + "' has a non-numeric value");
        }
        return arr.get<std::vector<double>>();
    };
    for (const auto& [key, arr] : target) {
        auto p = pred.find(key);
        if (p == pred.end()) throw ValidationError(a.pred + ": no prediction for '" + key + "'");
        const auto t = values(arr, a.target, key);
        const auto q = values(p->second, a.pred, key);
        b.targets.insert(b.targets.end(), t.begin(), t.end());
        b.predictions.insert(b.predictions.end(), q.begin(), q.end());
        ++b.samples;
    }
    const auto r = normalized_mse(b);
    ojson j;
    j["headline"] = {{"metric", "normalized_mse_percent"}, {"value", r.percent_form}};
    j["normalized_mse_sum"] = r.sum_form;
    j["normalized_mse_percent"] = r.percent_form;
    j["samples"] = b.samples;
    j["per_parameter"] = ojson::array();
    for (std::size_t p = 0; p < b.params; ++p) {
        j["per_parameter"].push_back({{"index", p},
                                      {"mse", r.mse[p]},
                                      {"baseline_mse", r.baseline_mse[p]},
                                      {"ratio", r.ratios[p]},
                                      {"baseline_mean", means[p]}});
    }
    return j;
}

int cmd_eval(Globals& g, const EvalArgs& a) {
    ojson j;
    if (a.task == "multilabel") {
        j = eval_multilabel(a);
    } else if (a.task == "segmentation") {
        j = eval_segmentation(a);
    } else if (a.task == "regression") {
        j = eval_regression(a, g.kv);
    } else {
        throw ValidationError("task must be multilabel, segmentation or regression");
    }
    j["config"] = {{"task", a.task}, {"predictions", a.pred}, {"targets", a.target}, {"per_image", a.per_image}};
    write_text(out_dir(g) / "metrics.json", j.dump(2) + "\n");
    std::cout << j["headline"]["metric"].get<std::string>() << " " << format_double(j["headline"]["value"].get<double>())
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_stats(Globals& g, const std::string& manifest) {
    const DatasetStats s = compute_stats(read_manifest_file(manifest));
    write_stats(out_dir(g), s);
    std::cout << s.to_json();
    return 0;
}

int cmd_verify(Globals& g, const std::string& manifest, const std::string& catalog) {
    const auto records = read_manifest_file(manifest);
    std::vector<oracle::OracleReport> reports{oracle::naive_overlap_check(records), oracle::record_check(records)};
    if (!catalog.empty()) reports.push_back(oracle::containment_check(records, read_tile_manifest(catalog)));
    ojson j = ojson::array();
    bool ok = true;
    for (const auto& r : reports) {
        ojson v = ojson::array();
        for (const auto& x : r.violations) v.push_back({{"refs", x.refs}, {"detail", x.detail}});
        j.push_back({{"checked_property", r.checked_property}, {"pass", r.pass()}, {"violations", v}});
        std::cout << (r.pass() ? "PASS " : "FAIL ") << r.checked_property << " (" << r.violations.size()
                  << " violations)\n";
        ok = ok && r.pass();
    }
    write_text(out_dir(g) / "verify.json", j.dump(2) + "\n");
    return ok ? 0 : static_cast<int>(ExitCode::validation);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curate georeferenced hyperspectral tiles into multi-temporal patch datasets and benchmarks"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "key = value configuration file; flags override it");
    app.add_option("--seed", g.seed, "seed for rebalancing and splits");
    app.add_option("--workers", g.workers, "worker threads for curation")->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out, "output directory");

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "validate a JSON-lines tile manifest into a catalog");
    ingest->add_option("manifest", ia.manifest, "tile manifest (.jsonl)")->required();
    ingest->add_option("--cloud-max", ia.cloud_max, "reject tiles above this cloud fraction");
    ingest->add_flag("--require-rasters", ia.require_rasters, "reject tiles whose raster is missing");

    CurateArgs ca;
    auto* cur = app.add_subcommand("curate", "extract non-overlapping multi-temporal patch locations");
    cur->add_option("catalog", ca.catalog, "tile catalog (.jsonl)")->required();
    cur->add_option("--beam", ca.beam, "tuples kept per level, or 'inf'");
    cur->add_option("--max-order", ca.max_order);
    cur->add_option("--min-dt", ca.min_dt, "temporal gate in seconds");
    cur->add_option("--patch-px", ca.patch_px);
    cur->add_option("--mask", ca.mask, "band mask file for exported patches, or 'none'");
    cur->add_flag("--export-patches", ca.export_patches, "write HSRC patch cubes under <out>/patches");

    PairArgs pa;
    auto* pair = app.add_subcommand("pair", "derive benchmark targets from a land-cover raster");
    pair->add_option("manifest", pa.manifest, "patch manifest (.tsv)")->required();
    pair->add_option("--labels", pa.labels, "label raster (HSRC, one band)")->required();
    pair->add_option("--aggregation", pa.aggregation, "class aggregation table (.json)")->required();
    pair->add_option("--task", pa.task, "multilabel or segmentation");
    pair->add_option("--min-fraction", pa.min_fraction);
    pair->add_option("--resampling", pa.resampling, "nearest or majority");
    pair->add_option("--rebalance", pa.rebalance_to, "number of segmentation patches to keep");
    pair->add_option("--cap", pa.cap, "maximum class pixel share when rebalancing");
    pair->add_option("--season", pa.season, "acquisition months, e.g. 6,7,8, or 'all'");
    pair->add_option("--split", pa.split, "train,val,test ratios");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "score predictions against targets");
    ev->add_option("--task", ea.task, "multilabel, segmentation or regression")->required();
    ev->add_option("--pred", ea.pred, "predictions file or mask directory")->required();
    ev->add_option("--target", ea.target, "targets file or mask directory")->required();
    ev->add_option("--classes", ea.classes, "class count K");
    ev->add_flag("--per-image", ea.per_image, "average mIoU per image");
    ev->add_option("--baseline-means", ea.baseline_means, "training-set means, comma separated");

    std::string stats_manifest;
    auto* st = app.add_subcommand("stats", "dataset statistics for a patch manifest");
    st->add_option("manifest", stats_manifest)->required();

    std::string verify_manifest, verify_catalog;
    auto* ver = app.add_subcommand("verify", "certify a manifest with brute-force checks");
    ver->add_option("manifest", verify_manifest)->required();
    ver->add_option("--catalog", verify_catalog, "tile catalog for containment checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::validation);
    }

    try {
        if (!g.config_path.empty()) {
            g.kv = KeyValueConfig::load(g.config_path);
            // Paths inside a config file are relative to that file.
            if (auto ref = g.kv.get("band_mask_ref"); ref && !ref->empty() && fs::path(*ref).is_relative()) {
                g.kv.set("band_mask_ref", (fs::path(g.config_path).parent_path() / *ref).string());
            }
        }
        if (ingest->parsed()) return cmd_ingest(g, ia);
        if (cur->parsed()) return cmd_curate(g, ca);
        if (pair->parsed()) return cmd_pair(g, pa);
        if (ev->parsed()) return cmd_eval(g, ea);
        if (st->parsed()) return cmd_stats(g, stats_manifest);
        if (ver->parsed()) return cmd_verify(g, verify_manifest, verify_catalog);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::io);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::internal);
    }
    return static_cast<int>(ExitCode::internal);
}
