#include "qusapp/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qus/checkpoint.hpp"
#include "qus/checksum.hpp"
#include "qus/cohort.hpp"
#include "qus/error.hpp"
#include "qus/image_io.hpp"
#include "qus/kernel_score.hpp"
#include "qus/metrics.hpp"
#include "qus/nakagami.hpp"
#include "qus/parallel.hpp"
#include "qus/phantom.hpp"
#include "qus/rng.hpp"
#include "qus/version.hpp"

namespace qusapp {
namespace {

using qus::ConfigError;
using qus::DataError;
using qus::EnvelopeImage;
using qus::Grid;
using qus::Metadata;
using qus::ParamMap;
using json = nlohmann::json;

constexpr const char* kProducer = "qusnak";
const std::vector<std::string> kStageOrder{"simulate", "train", "estimate", "evaluate"};

// Independent named streams derived from the run seed.
enum Stream : std::uint64_t { kPhantomStream = 1, kTrainPhantomStream = 2, kTrainStream = 3 };
constexpr std::uint64_t kEnvelopeStream = 1u << 20;
constexpr std::uint64_t kTrainEnvelopeStream = 2u << 20;

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) { return qus::Rng(seed).split(stream).next_u64(); }

std::string image_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "img%03zu", i);
    return buf;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Metadata stamp(const ExperimentConfig& cfg, Metadata meta = {}) {
    meta["producer"] = std::string(kProducer) + " " + qus::kVersion;
    meta["config_hash"] = cfg.hash();
    return meta;
}

std::string csv_header(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : stamp(cfg)) out += "# " + k + ": " + v + "\n";
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw qus::IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw qus::IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw qus::IoError("cannot create directory " + dir.string());
}

// Sorted stems of the files with `ext` directly inside `dir`.
std::vector<std::string> stems_in(const fs::path& dir, const std::string& ext) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Grid<double> builtin_gray(const std::string& pattern, std::size_t w, std::size_t h, std::size_t cell,
                          std::size_t glyph_size, qus::Rng& rng) {
    if (pattern == "glyph") {
        const auto g = qus::imaging::glyph_pattern(rng);
        return (w == glyph_size && h == glyph_size) ? g : qus::imaging::resize_bilinear(g, w, h);
    }
    if (pattern == "checkerboard") return qus::imaging::checkerboard_pattern(w, h, cell);
    return qus::imaging::builtin_pattern(pattern, w, h, rng);
}

qus::score::HeadKind head_kind(const std::string& s) {
    if (s == "basis") return qus::score::HeadKind::Basis;
    if (s == "linear") return qus::score::HeadKind::Linear;
    return qus::score::HeadKind::Nakagami;
}

std::string wmc_id(const EstimateSection& e) {
    std::string id = "wmc_w";
    for (std::size_t i = 0; i < e.wmc_windows.size(); ++i) id += (i ? "-" : "") + std::to_string(e.wmc_windows[i]);
    return id;
}

fs::path checkpoint_path(const ExperimentConfig& cfg) {
    return cfg.estimate.checkpoint.empty() ? cfg.output / cfg.train.checkpoint : cfg.estimate.checkpoint;
}

bool wants(const ExperimentConfig& cfg, const std::string& est) {
    const auto& v = cfg.estimate.estimators;
    return std::find(v.begin(), v.end(), est) != v.end();
}

std::vector<std::string> all_files(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), root).generic_string();
        if (rel == "manifest.json" || rel == "timings.json") continue;
        out.push_back(rel);
    }
    std::sort(out.begin(), out.end());
    return out;
}

json read_json(const fs::path& path) {
    if (!fs::exists(path)) return json::object();
    std::ifstream in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw qus::FormatError(path.string() + ": " + e.what());
    }
}

std::vector<qus::stats::CohortRecord> read_cohort(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read cohort file " + path.string());
    std::vector<qus::stats::CohortRecord> out;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header) {
            if (cells.size() != 3 || cells[0] != "id" || cells[1] != "feature" || cells[2] != "reference") {
                throw DataError(path.string() + ": expected header 'id,feature,reference'");
            }
            header = true;
            continue;
        }
        if (cells.size() != 3) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
        try {
            out.emplace_back(cells[0], std::stod(cells[1]), std::stod(cells[2]));
        } catch (const std::exception&) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad number");
        }
    }
    if (out.empty()) throw DataError(path.string() + ": no cohort records");
    return out;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
    if (dynamic_cast<const qus::NumericError*>(&e)) return kNumericFailure;
    if (dynamic_cast<const qus::Error*>(&e)) return kDataError;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return kDataError;
    return kInternal;
}

std::vector<std::string> method_ids(const ExperimentConfig& cfg) {
    const auto& e = cfg.estimate;
    const std::string w = "_w" + std::to_string(e.window);
    std::vector<std::string> out;
    for (const auto& est : e.estimators) {
        if (est == "wmc") out.push_back(wmc_id(e));
        else if (est == "unicorn") out.push_back("unicorn_" + e.score);
        else out.push_back(est + w);
    }
    return out;
}

StageResult cmd_simulate(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.output / "phantoms");
    ensure_dir(cfg.output / "envelopes");
    const auto& p = cfg.phantom;

    std::vector<std::pair<std::string, Grid<double>>> grays;
    if (p.source == "builtin") {
        qus::Rng rng(derive(cfg.seed, kPhantomStream));
        for (std::size_t i = 0; i < p.count; ++i) {
            grays.emplace_back(image_name(i), builtin_gray(p.pattern, p.width, p.height, p.cell, 28, rng));
        }
    } else {
        if (!fs::is_directory(p.directory)) throw ConfigError("phantom.directory does not exist: " + p.directory.string());
        for (const auto& stem : stems_in(p.directory, ".pgm")) {
            grays.emplace_back(stem, qus::io::read_pgm(p.directory / (stem + ".pgm")));
        }
        if (grays.empty()) throw DataError("no .pgm files in " + p.directory.string());
    }

    StageResult res;
    for (std::size_t i = 0; i < grays.size(); ++i) {
        const auto& [name, gray] = grays[i];
        ParamMap truth = qus::imaging::phantom_from_gray(gray);
        const std::uint64_t env_seed = derive(cfg.seed, kEnvelopeStream + i);
        EnvelopeImage env = qus::imaging::synthesize_envelope(truth, p.omega, env_seed);

        double lo = INFINITY, hi = -INFINITY;
        for (double v : truth.m.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        truth.meta = stamp(cfg, truth.meta);
        truth.meta["kind"] = "truth";
        truth.meta["source"] = p.source == "builtin" ? p.pattern : name + ".pgm";
        truth.meta["m_min"] = fmt(lo);
        truth.meta["m_max"] = fmt(hi);
        truth.meta["omega"] = fmt(p.omega);
        const std::string truth_rel = "phantoms/" + name + ".pfm";
        qus::io::save_param_map(cfg.output / truth_rel, truth);

        Metadata meta = stamp(cfg);
        meta["kind"] = "envelope";
        meta["omega"] = fmt(p.omega);
        meta["seed"] = std::to_string(env_seed);
        const std::string env_rel = "envelopes/" + name + ".pfm";
        qus::io::save_envelope(cfg.output / env_rel, env, meta);
        res.written.push_back(truth_rel);
        res.written.push_back(env_rel);
    }
    return res;
}

StageResult cmd_train(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.output);
    const auto& t = cfg.train;

    std::vector<EnvelopeImage> dataset;
    if (t.source == "builtin") {
        qus::Rng rng(derive(cfg.seed, kTrainPhantomStream));
        for (std::size_t i = 0; i < t.images; ++i) {
            const auto gray = builtin_gray(t.pattern, t.size, t.size, std::max<std::size_t>(1, t.size / 8),
                                           t.glyph_size, rng);
            dataset.push_back(qus::imaging::synthesize_envelope(qus::imaging::phantom_from_gray(gray), cfg.phantom.omega,
                                                                derive(cfg.seed, kTrainEnvelopeStream + i)));
        }
    } else {
        const fs::path dir = cfg.output / "envelopes";
        for (const auto& stem : stems_in(dir, ".pfm")) dataset.push_back(qus::io::load_envelope(dir / (stem + ".pfm")));
        if (dataset.empty()) throw DataError("train.source = simulated but " + dir.string() + " has no envelopes");
    }

    auto arch = qus::score::Architecture::compact(t.channels, t.depth, head_kind(t.head));
    arch.basis_floor = t.basis_floor;
    auto tcfg = t.cfg;
    tcfg.seed = derive(cfg.seed, kTrainStream);

    std::optional<qus::score::Checkpoint> prior;
    if (!t.resume.empty()) {
        prior = qus::score::load(t.resume);
        const auto it = prior->meta.find("train_hash");
        if (it == prior->meta.end() || it->second != cfg.train_hash()) {
            throw ConfigError("train.resume: checkpoint " + t.resume.string() +
                              " was produced by a different training configuration");
        }
        if (!(prior->model.arch == arch)) throw ConfigError("train.resume: architecture differs from the configuration");
    }

    const std::size_t start_epoch = prior ? prior->epoch : 0;
    qus::score::TrainResult result;
    if (prior && start_epoch >= tcfg.epochs) {
        result.model = prior->model;
        result.epochs_completed = start_epoch;
    } else {
        result = qus::score::train(dataset, tcfg, arch, {}, prior ? &prior->model : nullptr, start_epoch);
    }

    qus::score::Checkpoint ckpt;
    ckpt.model = result.model;
    ckpt.epoch = static_cast<std::uint32_t>(result.epochs_completed);
    ckpt.seed = cfg.seed;
    if (prior) ckpt.loss_history = prior->loss_history;
    for (const auto& h : result.history) ckpt.loss_history.push_back(h.loss);
    ckpt.meta = stamp(cfg);
    ckpt.meta["train_hash"] = cfg.train_hash();
    ckpt.meta["images"] = std::to_string(dataset.size());
    ckpt.meta["source"] = t.source == "builtin" ? t.pattern : "simulated";
    qus::score::save(ckpt, cfg.output / t.checkpoint);

    std::string csv = csv_header(cfg) + "step,epoch,delta,learning_rate,loss,excess\n";
    const std::size_t resumed = prior ? prior->loss_history.size() : 0;
    for (std::size_t i = 0; i < resumed; ++i) {
        csv += std::to_string(i) + ",nan,nan,nan," + fmt(prior->loss_history[i]) + ",nan\n";
    }
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const auto& h = result.history[i];
        csv += std::to_string(resumed + i) + "," + std::to_string(h.epoch) + "," + fmt(h.delta) + "," +
               fmt(h.learning_rate) + "," + fmt(h.loss) + "," + fmt(h.excess) + "\n";
    }
    write_text(cfg.output / "loss.csv", csv);
    return {{t.checkpoint, "loss.csv"}};
}

StageResult cmd_estimate(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& e = cfg.estimate;
    const fs::path env_dir = cfg.output / "envelopes";
    const auto names = stems_in(env_dir, ".pfm");
    if (names.empty()) throw DataError("no envelopes in " + env_dir.string() + " (run simulate first)");
    ensure_dir(cfg.output / "maps");

    std::optional<qus::score::ScoreModel> model;
    if (wants(cfg, "unicorn") && e.score == "checkpoint") {
        const fs::path ck = checkpoint_path(cfg);
        if (!fs::exists(ck)) throw ConfigError("score source 'checkpoint' but no checkpoint at " + ck.string());
        model = qus::score::load(ck).model;
    }

    const qus::WindowSpec win{e.window, e.stride, e.border};
    const qus::WindowSpec mle_win{e.window, e.mle_stride ? e.mle_stride : (e.window + 1) / 2, e.border};
    const auto ids = method_ids(cfg);
    StageResult res;
    for (const auto& name : names) {
        const EnvelopeImage img = qus::io::load_envelope(env_dir / (name + ".pfm"));
        for (std::size_t k = 0; k < e.estimators.size(); ++k) {
            const std::string& est = e.estimators[k];
            ParamMap map;
            if (est == "moment") {
                map = qus::sliding_map(img, win, qus::Estimator::Moment);
            } else if (est == "mle") {
                map = qus::sliding_map(img, mle_win, qus::Estimator::MleTaylor);
            } else if (est == "mle_exact") {
                map = qus::sliding_map(img, mle_win, qus::Estimator::MleExact);
            } else if (est == "wmc") {
                std::vector<qus::WindowSpec> specs;
                for (auto side : e.wmc_windows) specs.push_back({side, e.stride, e.border});
                map = qus::wmc_map(img, specs);
            } else {
                qus::ScoreField score;
                if (e.score == "analytic") {
                    const fs::path truth_path = cfg.output / "phantoms" / (name + ".pfm");
                    if (!fs::exists(truth_path)) {
                        throw DataError("analytic score needs the ground truth " + truth_path.string());
                    }
                    const ParamMap truth = qus::io::load_param_map(truth_path);
                    if (!truth.m.same_shape(img.width(), img.height())) {
                        throw DataError("ground truth and envelope shapes differ for " + name);
                    }
                    score = qus::ScoreField(img.width(), img.height());
                    const auto& a = img.amplitudes();
                    for (std::size_t i = 0; i < a.size(); ++i) {
                        score[i] = a[i] > 0.0
                                       ? qus::analytic_score(a[i], qus::NakagamiParams(truth.m[i], cfg.phantom.omega))
                                       : NAN;
                    }
                } else if (e.score == "kernel") {
                    qus::score::KernelOptions ko;
                    ko.reflect_at_zero = e.kernel_reflect;
                    score = qus::score::kernel_score_local(img, e.kernel_window, ko);
                } else {
                    score = qus::score::forward(*model, img);
                }
                qus::imaging::OmegaField omega =
                    e.omega_mode == "known"   ? qus::imaging::OmegaField::global(cfg.phantom.omega)
                    : e.omega_mode == "local" ? qus::imaging::estimate_omega(img, qus::imaging::OmegaMode::Local,
                                                                             e.omega_window)
                                              : qus::imaging::estimate_omega(img, qus::imaging::OmegaMode::Global);
                map = qus::imaging::unicorn_map(img, score, omega);
                if (e.filter != "none") {
                    Metadata raw_meta = map.meta;
                    map = qus::imaging::low_pass(map, qus::imaging::filter_kind_from_string(e.filter), e.filter_side);
                    for (const auto& [key, v] : raw_meta) map.meta.emplace(key, v);
                }
                map.meta["score"] = e.score;
                map.meta["filter"] = e.filter == "none" ? "none" : e.filter + ":" + std::to_string(e.filter_side);
            }
            map.meta = stamp(cfg, map.meta);
            map.meta["image"] = name;
            map.meta["method"] = ids[k];
            const std::string rel = "maps/" + name + "__" + ids[k] + ".pfm";
            qus::io::save_param_map(cfg.output / rel, map);
            res.written.push_back(rel);
        }
    }
    return res;
}

StageResult cmd_evaluate(const ExperimentConfig& cfg) {
    cfg.validate();
    const fs::path truth_dir = cfg.output / "phantoms";
    const auto names = stems_in(truth_dir, ".pfm");
    if (names.empty()) throw DataError("no ground-truth maps in " + truth_dir.string());
    const auto ids = method_ids(cfg);

    std::vector<std::string> missing;
    for (const auto& name : names) {
        for (const auto& id : ids) {
            const std::string rel = "maps/" + name + "__" + id + ".pfm";
            if (!fs::exists(cfg.output / rel)) missing.push_back(rel);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing estimate maps (" + std::to_string(missing.size()) + "):";
        for (const auto& m : missing) msg += "\n  " + m;
        throw DataError(msg);
    }

    std::string metrics = csv_header(cfg) + "image,method,psnr,rmse,valid_fraction\n";
    std::vector<double> psnr_sum(ids.size(), 0.0), rmse_sum(ids.size(), 0.0);
    for (const auto& name : names) {
        const ParamMap truth = qus::io::load_param_map(truth_dir / (name + ".pfm"));
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const ParamMap est = qus::io::load_param_map(cfg.output / "maps" / (name + "__" + ids[k] + ".pfm"));
            if (!est.m.same_shape(truth.m)) throw DataError("map " + ids[k] + " for " + name + " has the wrong shape");
            const double mse = qus::stats::mse(est, truth);
            const double psnr = qus::stats::psnr_from_mse(mse, cfg.evaluate.psnr_max);
            const double rmse = std::sqrt(mse);
            psnr_sum[k] += psnr;
            rmse_sum[k] += rmse;
            metrics += name + "," + ids[k] + "," + fmt(psnr) + "," + fmt(rmse) + "," +
                       fmt(1.0 - est.masked_fraction()) + "\n";
        }
    }
    write_text(cfg.output / "metrics.csv", metrics);

    const double n = static_cast<double>(names.size());
    std::string table = csv_header(cfg) + "# psnr_max: " + fmt(cfg.evaluate.psnr_max) + "\nmethod,images,psnr,rmse\n";
    for (std::size_t k = 0; k < ids.size(); ++k) {
        table += ids[k] + "," + std::to_string(names.size()) + "," + fmt(psnr_sum[k] / n) + "," +
                 fmt(rmse_sum[k] / n) + "\n";
    }
    write_text(cfg.output / "table.csv", table);
    StageResult res{{"metrics.csv", "table.csv"}};

    if (!cfg.evaluate.cohort.empty()) {
        const auto report = qus::stats::cohort_report(read_cohort(cfg.evaluate.cohort));
        write_text(cfg.output / "cohort_roc.csv", csv_header(cfg) + qus::stats::roc_csv(report));
        write_text(cfg.output / "cohort_box.csv", csv_header(cfg) + qus::stats::boxplot_csv(report));
        write_text(cfg.output / "cohort_summary.txt", qus::stats::summary_text(report));
        res.written.insert(res.written.end(), {"cohort_roc.csv", "cohort_box.csv", "cohort_summary.txt"});
    }
    return res;
}

StageResult cmd_compare(const ExperimentConfig& cfg) {
    StageResult all;
    auto add = [&](StageResult r) { all.written.insert(all.written.end(), r.written.begin(), r.written.end()); };
    add(cmd_simulate(cfg));
    if (wants(cfg, "unicorn") && cfg.estimate.score == "checkpoint" && cfg.estimate.checkpoint.empty()) {
        add(cmd_train(cfg));
    }
    add(cmd_estimate(cfg));
    add(cmd_evaluate(cfg));
    return all;
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& stages) {
    json files = json::object();
    for (const auto& rel : all_files(cfg.output)) files[rel] = qus::sha256_file(cfg.output / rel);
    json m;
    m["toolkit"] = kProducer;
    m["version"] = qus::kVersion;
    m["config_hash"] = cfg.hash();
    m["seed"] = cfg.seed;
    m["stages"] = stages;
    m["files"] = std::move(files);
    write_text(cfg.output / "manifest.json", m.dump(2) + "\n");
}

void run_command(const std::string& name, const ExperimentConfig& cfg) {
    static const std::set<std::string> known{"simulate", "train", "estimate", "evaluate", "compare"};
    if (!known.count(name)) throw ConfigError("unknown subcommand '" + name + "'");
    cfg.validate();
    if (cfg.threads > 0) qus::set_default_threads(cfg.threads);
    ensure_dir(cfg.output);

    const auto t0 = std::chrono::steady_clock::now();
    if (name == "simulate") cmd_simulate(cfg);
    else if (name == "train") cmd_train(cfg);
    else if (name == "estimate") cmd_estimate(cfg);
    else if (name == "evaluate") cmd_evaluate(cfg);
    else cmd_compare(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Stages accumulate across invocations on the same run directory, unless
    // the configuration changed, in which case the record starts over.
    json old = read_json(cfg.output / "manifest.json");
    std::set<std::string> done;
    if (old.contains("config_hash") && old["config_hash"] == cfg.hash() && old.contains("stages")) {
        for (const auto& s : old["stages"]) done.insert(s.get<std::string>());
    }
    if (name == "compare") {
        done.insert({"simulate", "estimate", "evaluate"});
        if (fs::exists(cfg.output / cfg.train.checkpoint) && cfg.estimate.checkpoint.empty() &&
            cfg.estimate.score == "checkpoint" && wants(cfg, "unicorn")) {
            done.insert("train");
        }
    } else {
        done.insert(name);
    }
    std::vector<std::string> stages;
    for (const auto& s : kStageOrder) {
        if (done.count(s)) stages.push_back(s);
    }
    write_manifest(cfg, stages);

    json timings = read_json(cfg.output / "timings.json");
    timings[name] = seconds;
    write_text(cfg.output / "timings.json", timings.dump(2) + "\n");
}

}  // namespace qusapp
