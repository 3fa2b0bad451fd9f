#include "commands.hpp"

#include "gazekit/corpus.hpp"
#include "gazekit/diagnostics.hpp"
#include "gazekit/error.hpp"
#include "gazekit/geometry.hpp"
#include "gazekit/image_io.hpp"
#include "gazekit/macro_pool.hpp"
#include "gazekit/random.hpp"
#include "gazekit/records.hpp"
#include "gazekit/report.hpp"
#include "gazekit/selection.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace gazekit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int& command_status() {
    static int status = 0;
    return status;
}

namespace {

std::string default_data(const char* name) { return std::string(GAZEKIT_DEFAULT_DATA_DIR) + "/" + name; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Collects inputs and outputs of one run and writes replay.json. The
/// timestamp lives only here so every other artifact is byte-stable.
class Run {
public:
    Run(std::string command, const CommonOptions& common) : command_(std::move(command)), common_(common) {
        if (common_.out.empty()) throw Error(ErrorCode::SchemaViolation, "--out is required");
        fs::create_directories(common_.out);
    }

    void input(const std::string& path) {
        const std::string bytes = read_file(path);
        inputs_.push_back({{"path", path}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}});
    }

    std::string path(const std::string& name) {
        outputs_.push_back(name);
        return (fs::path(common_.out) / name).string();
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(path(name), std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + name);
        out << content;
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void finish(json extra = json::object()) {
        json manifest = {{"command", command_},
                         {"argv", common_.argv},
                         {"version", GAZEKIT_VERSION},
                         {"seed", common_.seed},
                         {"inputs", inputs_},
                         {"outputs", outputs_},
                         {"created_utc", utc_now()}};
        for (auto& [k, v] : extra.items()) manifest[k] = v;
        std::ofstream out(fs::path(common_.out) / "replay.json");
        out << manifest.dump(2) << "\n";
    }

private:
    std::string command_;
    const CommonOptions& common_;
    json inputs_ = json::array();
    json outputs_ = json::array();
};

void add_common(CLI::App* sub, const std::shared_ptr<CommonOptions>& common) {
    sub->add_option("--seed", common->seed, "random seed recorded for replay")->capture_default_str();
    sub->add_option("--out", common->out, "output directory")->required();
}

MacroPool load_pool_tracked(Run& run, const std::string& path) {
    run.input(path);
    return load_pool_file(path);
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::string& path, Parse&& parse) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::vector<T> out;
    try {
        for_each_json_line(in, [&](const json& j, std::size_t line) {
            try {
                out.push_back(parse(j));
            } catch (const SchemaError&) {
                throw;
            } catch (const Error& e) {
                throw SchemaError(line, e.what());
            }
        });
    } catch (const SchemaError& e) {
        throw SchemaError(path, e.line(), e.detail());
    }
    return out;
}

// Parse modes: a bare mode is the default, "model=mode" overrides one model.
struct ParseModes {
    ParseMode fallback = ParseMode::StrictPrefix;
    std::map<std::string, ParseMode> per_model;

    ParseMode of(const std::string& model) const {
        const auto it = per_model.find(model);
        return it == per_model.end() ? fallback : it->second;
    }
};

ParseModes parse_modes(const std::vector<std::string>& specs) {
    ParseModes m;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        const std::string mode_name = eq == std::string::npos ? s : s.substr(eq + 1);
        const auto mode = parse_mode_from_string(mode_name);
        if (!mode) throw Error(ErrorCode::SchemaViolation, "unknown parse mode " + mode_name);
        if (eq == std::string::npos)
            m.fallback = *mode;
        else
            m.per_model[s.substr(0, eq)] = *mode;
    }
    return m;
}

struct Views {
    std::optional<View> fallback;
    std::map<std::string, View> per_benchmark;

    std::optional<View> of(const std::string& benchmark) const {
        const auto it = per_benchmark.find(benchmark);
        return it == per_benchmark.end() ? fallback : std::optional<View>(it->second);
    }
};

View view_from_string(const std::string& s) {
    if (s == "paired") return View::Paired;
    if (s == "fake_only") return View::FakeOnly;
    throw Error(ErrorCode::SchemaViolation, "unknown view " + s + " (paired | fake_only)");
}

Views parse_views(const std::vector<std::string>& specs) {
    Views v;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            v.fallback = view_from_string(s);
        else
            v.per_benchmark[s.substr(0, eq)] = view_from_string(s.substr(eq + 1));
    }
    return v;
}

// Model id: the record's model field, else the log's file stem.
using Grouped = std::map<std::string, std::map<std::string, std::vector<PredictionRecord>>>;

Grouped load_logs(Run& run, const std::vector<std::string>& logs, const ParseModes& modes) {
    Grouped g;
    for (const auto& path : logs) {
        run.input(path);
        auto records = read_prediction_log_file(path);
        const std::string stem = fs::path(path).stem().string();
        for (auto& r : records) {
            if (!r.model) r.model = stem;
            g[*r.model][r.benchmark].push_back(std::move(r));
        }
    }
    // Bounded parallel parsing; each worker owns a disjoint slice.
    const unsigned workers = std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
    for (auto& [model, benches] : g) {
        const ParseMode mode = modes.of(model);
        for (auto& [bench, recs] : benches) {
            std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
            const std::size_t chunk = (recs.size() + workers - 1) / workers;
            std::vector<std::jthread> pool;
            for (std::size_t start = 0; start < recs.size(); start += chunk) {
                pool.emplace_back([&recs, start, chunk, mode] {
                    const std::size_t end = std::min(recs.size(), start + chunk);
                    for (std::size_t i = start; i < end; ++i) recs[i].verdict = parse_verdict(recs[i].raw_output, mode);
                });
            }
        }
    }
    return g;
}

Rounding rounding_from_string(const std::string& s) {
    if (s == "truncate") return Rounding::Truncate;
    if (s == "half_up") return Rounding::HalfUp;
    throw Error(ErrorCode::SchemaViolation, "unknown rounding " + s + " (truncate | half_up)");
}

std::string safe_name(std::string s) {
    for (auto& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    return s;
}

std::string find_image(const std::string& dir, const std::string& stem) {
    for (const char* ext : {"", ".png", ".jpg", ".jpeg", ".PNG", ".JPG"}) {
        const fs::path p = fs::path(dir) / (stem + ext);
        if (fs::is_regular_file(p)) return p.string();
    }
    throw Error(ErrorCode::IoError, "no image for " + stem + " in " + dir);
}

json rect_json(const MaskRect& r) {
    return {{"row_lo", r.row_lo}, {"row_hi", r.row_hi}, {"col_lo", r.col_lo}, {"col_hi", r.col_hi}};
}

json integrity_json(const IntegrityReport& r) {
    return {{"pass", r.pass}, {"max_outside_diff", r.max_outside_diff}, {"violating_pixel_count", r.violating_pixel_count}};
}

FaceBBox bbox_from_flag(const std::string& s) {
    std::vector<int> v;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) v.push_back(std::stoi(part));
    if (v.size() != 4) throw Error(ErrorCode::SchemaViolation, "--bbox expects x_min,y_min,x_max,y_max");
    return {v[0], v[1], v[2], v[3]};
}

} // namespace

void add_compose(CLI::App& app, std::shared_ptr<CommonOptions> common) {
    auto* sub = app.add_subcommand("compose", "assign pool captions to samples");
    add_common(sub, common);
    auto pool_path = std::make_shared<std::string>(default_data("default_pool.json"));
    auto per_label = std::make_shared<std::size_t>(0);
    sub->add_option("--pool", *pool_path, "caption pool file")->capture_default_str();
    sub->add_option("--per-label", *per_label, "samples per label")->required();
    sub->callback([=] {
        Run run("compose", *common);
        const MacroPool pool = load_pool_tracked(run, *pool_path);
        const auto assignments = assign_captions(pool, *per_label, common->seed);

        std::ostringstream os;
        os << json{{"type", "header"},
                   {"per_label", *per_label},
                   {"seed", common->seed},
                   {"caption_space", caption_space_size(pool)},
                   {"pool_fnv1a64", hex64(fnv1a(pool.to_json().dump()))}}
                  .dump()
           << "\n";
        std::array<std::size_t, 2> counter{};
        char id[32];
        for (const auto& a : assignments) {
            const auto label = to_string(a.id.label);
            std::snprintf(id, sizeof id, "%s_%07zu", std::string(label).c_str(), counter[static_cast<int>(a.id.label)]++);
            os << json{{"sample_id", id},
                       {"label", label},
                       {"template", {a.id.scene, a.id.method, a.id.evidence, a.id.conclusion}},
                       {"ordinal", a.id.ordinal()},
                       {"caption", compose(pool, a.id).text}}
                      .dump()
               << "\n";
        }
        run.write("captions.jsonl", os.str());
        run.finish();
        std::cout << "wrote " << assignments.size() << " captions to " << common->out << "/captions.jsonl\n";
    });
}

void add_eval(CLI::App& app, std::shared_ptr<CommonOptions> common) {
    auto* sub = app.add_subcommand("eval", "score prediction logs under the balanced protocol");
    add_common(sub, common);
    struct Opts {
        std::vector<std::string> logs;
        std::string pool = default_data("default_pool.json");
        std::string keywords = default_data("keyword_families.json");
        std::vector<std::string> modes;
        std::vector<std::string> views;
        std::string rounding = "truncate";
        std::string base;
        std::optional<int> token_cap;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("logs", o->logs, "prediction logs (JSONL)")->required()->check(CLI::ExistingFile);
    sub->add_option("--pool", o->pool, "caption pool file")->capture_default_str();
    sub->add_option("--keywords", o->keywords, "keyword family file")->capture_default_str();
    sub->add_option("--parse-mode", o->modes, "strict | first_keyword | three_class, or model=mode");
    sub->add_option("--view", o->views, "paired | fake_only, or benchmark=view");
    sub->add_option("--rounding", o->rounding, "truncate | half_up")->capture_default_str();
    sub->add_option("--base", o->base, "model used as dissection baseline");
    sub->add_option("--token-cap", o->token_cap, "generation cap for truncation rate");
    sub->callback([=] {
        Run run("eval", *common);
        const MacroPool pool = load_pool_tracked(run, o->pool);
        run.input(o->keywords);
        const KeywordFamilies families = load_keyword_families_file(o->keywords);
        const ParseModes modes = parse_modes(o->modes);
        const Views views = parse_views(o->views);
        const Rounding rounding = rounding_from_string(o->rounding);
        const Grouped grouped = load_logs(run, o->logs, modes);
        const TemplateMatcher matcher(pool);

        std::vector<ModelScores> models;
        std::map<std::string, std::vector<std::pair<std::string, ConfusionMatrix>>> by_benchmark;
        json diagnostics = json::object();
        json verdicts;
        std::ostringstream verdict_lines;
        std::ostringstream text;
        for (const auto& [model, benches] : grouped) {
            std::vector<BenchmarkScore> scores;
            json model_diag = json::object();
            for (const auto& [bench, recs] : benches) {
                BenchmarkScore s = score_benchmark(recs, views.of(bench));
                scores.push_back(s);
                by_benchmark[bench].emplace_back(model, s.cm);
                for (const auto& r : recs) verdict_lines << to_json(r, true).dump() << "\n";

                std::vector<std::string> outputs;
                for (const auto& r : recs) outputs.push_back(r.raw_output);
                json d = {{"n0", s.n0}, {"n_eff", s.n_eff}, {"failure_rate", effective_count(s.n0, s.n_eff).failure_rate},
                          {"parse_mode", to_string(modes.of(model))}};
                d["unique_output_ratio"] = unique_output_ratio(outputs);
                try {
                    const auto t = top1_template_ratio(outputs, matcher);
                    d["top1_template_ratio"] = {{"ratio", t.ratio}, {"matched", t.matched}, {"excluded", t.excluded},
                                                {"modal_ordinal", t.modal.ordinal()}};
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NoMatchedOutputs) throw;
                    d["top1_template_ratio"] = nullptr;
                }
                const bool have_len = std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.gen_len.has_value(); });
                const auto ws = output_word_stats(recs, o->token_cap && have_len ? o->token_cap : std::nullopt);
                d["word_stats"] = {{"mean_words", ws.mean_words},
                                   {"median_words", ws.median_words},
                                   {"bare_decision_rate", ws.bare_decision_rate},
                                   {"truncation_rate", ws.truncation_rate ? json(*ws.truncation_rate) : json(nullptr)}};
                if (auto g = average_gen_len(recs)) d["avg_gen_len"] = *g;
                const auto cards = card_accuracy(recs, pool);
                json cj = json::array();
                for (const auto& c : cards)
                    cj.push_back({{"card", c.card}, {"invocations", c.invocations}, {"invocation_rate", c.invocation_rate},
                                  {"accuracy", c.accuracy ? json(*c.accuracy) : json(nullptr)}});
                d["cards"] = cj;
                const auto wrong = wrong_pool_report(recs, pool);
                d["wrong_pool"] = to_json(wrong);
                const auto kw = keyword_family_stats(outputs, families);
                d["keyword_families"] = kw.frequency;
                model_diag[bench] = d;

                text << "== " << model << " / " << bench << " (" << to_string(s.view) << ", n0 " << s.n0 << ", n_eff "
                     << s.n_eff << ")\n"
                     << render_card_table(cards) << render_wrong_pool(wrong) << render_keyword_table(kw) << "\n";
            }
            diagnostics[model] = model_diag;
            models.push_back(score_model(model, scores));
        }

        std::ostringstream report;
        report << render_score_table(models, rounding) << "\n";
        for (const auto& [bench, cms] : by_benchmark) report << render_dissection(bench, cms, o->base) << "\n";
        report << text.str();

        run.write_json("scores.json", {{"rounding", o->rounding}, {"records", score_records(models, rounding)}});
        run.write_json("diagnostics.json", diagnostics);
        run.write("verdicts.jsonl", verdict_lines.str());
        run.write("report.txt", report.str());
        run.finish();
        std::cout << render_score_table(models, rounding);
    });
}

void add_split(CLI::App& app, std::shared_ptr<CommonOptions> common) {
    auto* sub = app.add_subcommand("split", "filter, unpack and split the pair manifest");
    add_common(sub, common);
    struct Opts {
        std::string annotations;
        std::string pairs;
        std::vector<std::uint32_t> ratios{8, 1, 1};
    };
    auto o = std::make_shared<Opts>();
    auto* ann = sub->add_option("--annotations", o->annotations, "mutual-gaze annotations (JSONL)")->check(CLI::ExistingFile);
    auto* pr = sub->add_option("--pairs", o->pairs, "existing pair manifest (JSONL)")->check(CLI::ExistingFile);
    ann->excludes(pr);
    sub->add_option("--ratios", o->ratios, "train val test ratios")->expected(3)->capture_default_str();
    sub->callback([=] {
        if (o->annotations.empty() == o->pairs.empty())
            throw Error(ErrorCode::SchemaViolation, "give exactly one of --annotations or --pairs");
        Run run("split", *common);
        std::vector<PairRecord> pairs;
        json counts = json::object();
        if (!o->annotations.empty()) {
            run.input(o->annotations);
            const auto anns = read_jsonl<GazeAnnotation>(o->annotations, annotation_from_json);
            const auto kept = filter_mutual_gaze(anns);
            pairs = unpack_pairs(kept);
            counts = {{"annotations", anns.size()}, {"retained_images", kept.size()}, {"pairs", pairs.size()}};
        } else {
            run.input(o->pairs);
            pairs = read_jsonl<PairRecord>(o->pairs, pair_from_json);
            counts = {{"pairs", pairs.size()}};
        }
        SplitRatios ratios;
        std::copy(o->ratios.begin(), o->ratios.end(), ratios.parts.begin());
        pairs = grouped_stratified_split(std::move(pairs), ratios, common->seed);
        const auto leaks = leakage_check(pairs);
        if (!leaks.empty()) throw Error(ErrorCode::SchemaViolation, "base id leakage across splits: " + leaks.front());

        std::ostringstream os;
        for (const auto& p : pairs) os << to_json(p).dump() << "\n";
        run.write("pairs.jsonl", os.str());
        const Datasheet sheet = build_datasheet(pairs, common->seed);
        run.write_json("datasheet.json", to_json(sheet));
        run.finish({{"counts", counts}});
        for (const auto& r : sheet.rows)
            std::cout << r.split << ": " << r.pairs << " pairs (" << r.real << " real / " << r.fake << " fake)\n";
    });
}

void add_mask(CLI::App& app, std::shared_ptr<CommonOptions> common) {
    auto* sub = app.add_subcommand("mask", "eye-region inpainting masks for the perturbed participant");
    add_common(sub, common);
    struct Opts {
        std::string pairs;
        std::string image_dir;
        double blur = kDefaultBlurRadius;
        bool png = false;
        int max_size = 1024;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--pairs", o->pairs, "pair manifest (JSONL); width/height fields optional")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--image-dir", o->image_dir, "source images, used for sizes and absent width/height");
    sub->add_option("--blur-radius", o->blur, "Gaussian sigma in pixels")->capture_default_str();
    sub->add_option("--max-size", o->max_size, "long side of the inpainting resize")->capture_default_str();
    sub->add_flag("--png", o->png, "also write soft masks as PNG");
    sub->callback([=] {
        Run run("mask", *common);
        run.input(o->pairs);
        struct Sized {
            PairRecord pair;
            std::optional<std::pair<int, int>> dims;
        };
        const auto items = read_jsonl<Sized>(o->pairs, [](const json& j) {
            Sized s{pair_from_json(j), std::nullopt};
            if (j.contains("width") && j.contains("height")) s.dims = {j["width"].get<int>(), j["height"].get<int>()};
            return s;
        });
        if (o->png) fs::create_directories(fs::path(common->out) / "masks");
        std::ostringstream os;
        for (const auto& [pair, dims] : items) {
            auto wh = dims;
            if (!wh) {
                if (o->image_dir.empty())
                    throw Error(ErrorCode::SchemaViolation, pair.base_id + " has no width/height and no --image-dir");
                const auto img = read_image(find_image(o->image_dir, pair.image_id));
                wh = std::pair{img.width, img.height};
            }
            const MaskRect band = eye_region_band(pair.perturbed_bbox(), wh->first, wh->second);
            const auto [rw, rh] = flux_resize_dims(wh->first, wh->second, o->max_size);
            json rec = {{"base_id", pair.base_id},
                        {"image_id", pair.image_id},
                        {"participant", pair.perturbed_participant == Participant::A ? "A" : "B"},
                        {"width", wh->first},
                        {"height", wh->second},
                        {"band", rect_json(band)},
                        {"resize", {rw, rh}},
                        {"blur_radius", o->blur},
                        {"prompt", std::string(kInpaintPrompt)}};
            if (o->png) {
                const std::string name = "masks/" + safe_name(pair.base_id) + ".png";
                write_png(run.path(name), rasterize_soft_mask(band, wh->first, wh->second, o->blur));
                rec["mask_png"] = name;
            }
            os << rec.dump() << "\n";
        }
        run.write("masks.jsonl", os.str());
        run.finish();
        std::cout << "wrote " << items.size() << " mask records\n";
    });
}

void add_verify_pairs(CLI::App& app, std::shared_ptr<CommonOptions> common) {
    auto* sub = app.add_subcommand("verify-pairs", "check that fakes differ from reals only inside the eye band");
    add_common(sub, common);
    struct Opts {
        std::string pairs, real_dir, fake_dir;
        std::string real, fake, bbox;
        int dilation = kDefaultIntegrityDilation;
        int tolerance = kDefaultIntegrityTolerance;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--pairs", o->pairs, "pair manifest (JSONL)")->check(CLI::ExistingFile);
    sub->add_option("--real-dir", o->real_dir, "real images named by image_id");
    sub->add_option("--fake-dir", o->fake_dir, "fake images named by base_id");
    sub->add_option("--real", o->real, "single real image")->check(CLI::ExistingFile);
    sub->add_option("--fake", o->fake, "single fake image")->check(CLI::ExistingFile);
    sub->add_option("--bbox", o->bbox, "perturbed face box x_min,y_min,x_max,y_max (single mode)");
    sub->add_option("--dilation", o->dilation, "band growth in pixels")->capture_default_str();
    sub->add_option("--tolerance", o->tolerance, "per-channel tolerance")->capture_default_str();
    sub->callback([=] {
        Run run("verify-pairs", *common);
        struct Job {
            std::string id, real, fake;
            FaceBBox bbox;
        };
        std::vector<Job> jobs;
        if (!o->pairs.empty()) {
            if (o->real_dir.empty() || o->fake_dir.empty())
                throw Error(ErrorCode::SchemaViolation, "--pairs needs --real-dir and --fake-dir");
            run.input(o->pairs);
            for (const auto& p : read_jsonl<PairRecord>(o->pairs, pair_from_json))
                jobs.push_back({p.base_id, find_image(o->real_dir, p.image_id), find_image(o->fake_dir, safe_name(p.base_id)),
                                p.perturbed_bbox()});
        } else {
            if (o->real.empty() || o->fake.empty() || o->bbox.empty())
                throw Error(ErrorCode::SchemaViolation, "give --pairs, or --real, --fake and --bbox");
            jobs.push_back({fs::path(o->fake).stem().string(), o->real, o->fake, bbox_from_flag(o->bbox)});
        }
        std::ostringstream os;
        std::size_t failed = 0;
        for (const auto& job : jobs) {
            run.input(job.real);
            run.input(job.fake);
            const auto real = read_image(job.real);
            const auto fake = read_image(job.fake);
            const MaskRect band = eye_region_band(job.bbox, real.width, real.height);
            const auto rep = pair_integrity(real, fake, band, o->dilation, o->tolerance);
            if (!rep.pass) ++failed;
            json rec = integrity_json(rep);
            rec["id"] = job.id;
            rec["band"] = rect_json(band);
            os << rec.dump() << "\n";
        }
        run.write("integrity.jsonl", os.str());
        run.finish({{"checked", jobs.size()}, {"failed", failed}});
        std::cout << jobs.size() - failed << "/" << jobs.size() << " pairs pass\n";
        if (failed) command_status() = 1;
    });
}

void add_select(CLI::App& app, std::shared_ptr<CommonOptions> common) {
    auto* sub = app.add_subcommand("select", "balanced-accuracy checkpoint selection");
    add_common(sub, common);
    auto snapshots = std::make_shared<std::string>();
    sub->add_option("snapshots", *snapshots, "snapshot JSONL or trainer-state JSON")->required()->check(CLI::ExistingFile);
    sub->callback([=] {
        Run run("select", *common);
        run.input(*snapshots);
        const auto run_snapshots = read_snapshot_file(*snapshots);
        const auto rep = decoupling_report(run_snapshots);
        json out = to_json(rep);
        out["snapshots"] = run_snapshots.size();
        for (const auto& s : run_snapshots)
            if (s.step == rep.ba_best_step) out["selected"] = to_json(s);
        run.write_json("selection.json", out);
        run.finish();
        char line[200];
        std::snprintf(line, sizeof line,
                      "selected step %lld (BA %.4f); loss minimum at step %lld (loss %.4f); gap %lld steps\n",
                      static_cast<long long>(rep.ba_best_step), rep.ba_best, static_cast<long long>(rep.loss_min_step),
                      rep.loss_min, static_cast<long long>(rep.step_gap));
        std::cout << line;
    });
}

void add_gate(CLI::App& app, std::shared_ptr<CommonOptions> common) {
    auto* sub = app.add_subcommand("gate", "apply card-gating rules and report the metric change");
    add_common(sub, common);
    struct Opts {
        std::vector<std::string> logs;
        std::string pool = default_data("default_pool.json");
        std::string rules;
        std::vector<std::string> modes;
        std::string rounding = "truncate";
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("logs", o->logs, "prediction logs (JSONL)")->required()->check(CLI::ExistingFile);
    sub->add_option("--pool", o->pool, "caption pool file")->capture_default_str();
    sub->add_option("--gate", o->rules, "gate rule file (JSON array)")->required()->check(CLI::ExistingFile);
    sub->add_option("--parse-mode", o->modes, "strict | first_keyword | three_class, or model=mode");
    sub->add_option("--rounding", o->rounding, "truncate | half_up")->capture_default_str();
    sub->callback([=] {
        Run run("gate", *common);
        const MacroPool pool = load_pool_tracked(run, o->pool);
        run.input(o->rules);
        const auto rules = load_gate_rules_file(o->rules);
        const Rounding rounding = rounding_from_string(o->rounding);
        const Grouped grouped = load_logs(run, o->logs, parse_modes(o->modes));
        json outcomes = json::array();
        std::ostringstream gated;
        for (const auto& [model, benches] : grouped)
            for (const auto& [bench, recs] : benches) {
                const auto g = apply_card_gate(recs, rules, pool);
                auto opt = [&](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
                outcomes.push_back({{"model", model},
                                    {"benchmark", bench},
                                    {"flipped", g.flipped},
                                    {"ba_before", opt(g.ba_before)},
                                    {"ba_after", opt(g.ba_after)},
                                    {"delta_ba", opt(g.delta_ba)},
                                    {"delta_ba_display", format1(g.delta_ba, rounding)},
                                    {"before", to_json(g.before)},
                                    {"after", to_json(g.after)},
                                    {"delta_confusion", to_json(g.delta_confusion)}});
                for (const auto& r : g.records) gated << to_json(r, true).dump() << "\n";
                std::cout << model << " / " << bench << ": flipped " << g.flipped << ", delta BA "
                          << format1(g.delta_ba, rounding) << " pp\n";
            }
        json rules_json = json::array();
        for (const auto& r : rules) rules_json.push_back(to_json(r));
        run.write_json("gate.json", {{"rules", rules_json}, {"outcomes", outcomes}});
        run.write("gated.jsonl", gated.str());
        run.finish();
    });
}

} // namespace gazekit::cli
