#include "qusapp/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qus/checksum.hpp"
#include "qus/error.hpp"

namespace qusapp {
namespace {

using qus::ConfigError;
namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

double parse_real(const std::string& key, const std::string& text) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(trim(text), &pos);
        if (pos != trim(text).size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + text + "'");
}

// Reads one section, rejecting keys that no handler claims.
class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    template <class F>
    void on(const std::string& key, F&& handle) {
        known_.insert(key);
        if (!tree_) return;
        if (auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) {
            try {
                handle(name_ + "." + key, trim(*v));
            } catch (const qus::InvalidArgument& e) {
                throw ConfigError(name_ + "." + key + ": " + e.what());
            }
        }
    }

    void finish() const {
        if (!tree_) return;
        for (const auto& [k, v] : *tree_) {
            if (!v.empty()) throw ConfigError("[" + name_ + "] " + k + ": nested keys are not supported");
            if (!known_.count(k)) throw ConfigError("unknown key '" + k + "' in section [" + name_ + "]");
        }
    }

private:
    const pt::ptree* tree_;
    std::string name_;
    std::set<std::string> known_;
};

auto set_size(std::size_t& dst) {
    return [&dst](const std::string& k, const std::string& v) { dst = parse_number<std::size_t>(k, v); };
}
auto set_real(double& dst) {
    return [&dst](const std::string& k, const std::string& v) { dst = parse_real(k, v); };
}
auto set_string(std::string& dst) {
    return [&dst](const std::string&, const std::string& v) { dst = v; };
}
auto set_path(fs::path& dst) {
    return [&dst](const std::string&, const std::string& v) { dst = v; };
}
auto set_bool(bool& dst) {
    return [&dst](const std::string& k, const std::string& v) { dst = parse_bool(k, v); };
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string train_lines(const TrainSection& t, bool with_epochs) {
    std::map<std::string, std::string> kv;
    const auto& c = t.cfg;
    kv["train.source"] = t.source;
    kv["train.pattern"] = t.pattern;
    kv["train.images"] = std::to_string(t.images);
    kv["train.size"] = std::to_string(t.size);
    kv["train.glyph_size"] = std::to_string(t.glyph_size);
    kv["train.channels"] = std::to_string(t.channels);
    kv["train.depth"] = std::to_string(t.depth);
    kv["train.head"] = t.head;
    kv["train.basis_floor"] = fmt_double(t.basis_floor);
    if (with_epochs) kv["train.epochs"] = std::to_string(c.epochs);
    kv["train.learning_rate"] = fmt_double(c.learning_rate);
    kv["train.lr_halve_epoch"] = std::to_string(c.lr_halve_epoch);
    kv["train.weight_decay"] = fmt_double(c.weight_decay);
    kv["train.beta1"] = fmt_double(c.beta1);
    kv["train.beta2"] = fmt_double(c.beta2);
    kv["train.adam_eps"] = fmt_double(c.adam_eps);
    kv["train.batch_size"] = std::to_string(c.batch_size);
    kv["train.crop"] = std::to_string(c.crop);
    kv["train.delta_max"] = fmt_double(c.delta_max_rel);
    kv["train.delta_min"] = fmt_double(c.delta_min_rel);
    kv["train.sigma_mode"] = qus::score::to_string(c.sigma_mode);
    kv["train.antithetic"] = c.antithetic ? "true" : "false";
    kv["train.weighting"] = qus::score::to_string(c.weighting);
    kv["train.flip"] = c.augment_flip ? "true" : "false";
    kv["train.rotate"] = c.augment_rotate ? "true" : "false";
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    const auto& p = phantom;
    if (p.source != "builtin" && p.source != "directory") {
        throw ConfigError("phantom.source must be 'builtin' or 'directory'");
    }
    if (p.source == "builtin") {
        static const std::set<std::string> patterns{"two-region", "checkerboard", "gradient", "glyph"};
        if (!patterns.count(p.pattern)) throw ConfigError("phantom.pattern: unknown pattern '" + p.pattern + "'");
        if (p.count < 1) throw ConfigError("phantom.count must be >= 1");
        if (p.width < 3 || p.height < 3) throw ConfigError("phantom.width/height must be >= 3");
        if (p.pattern == "checkerboard" && p.cell < 1) throw ConfigError("phantom.cell must be >= 1");
    } else if (p.directory.empty()) {
        throw ConfigError("phantom.directory is required when phantom.source = directory");
    }
    if (!(p.omega > 0.0)) throw ConfigError("phantom.omega must be > 0");

    const auto& t = train;
    if (t.source != "builtin" && t.source != "simulated") {
        throw ConfigError("train.source must be 'builtin' or 'simulated'");
    }
    if (t.head != "nakagami" && t.head != "basis" && t.head != "linear") {
        throw ConfigError("train.head must be nakagami, basis or linear");
    }
    if (t.images < 1 || t.size < 3) throw ConfigError("train.images must be >= 1 and train.size >= 3");
    if (t.depth < 2 || t.channels < 1) throw ConfigError("train.depth must be >= 2 and train.channels >= 1");
    if (t.checkpoint.empty()) throw ConfigError("train.checkpoint must not be empty");
    try {
        t.cfg.validate();
    } catch (const qus::InvalidArgument& e) {
        throw ConfigError(e.what());
    }

    const auto& e = estimate;
    if (e.estimators.empty()) throw ConfigError("estimate.estimators must list at least one estimator");
    static const std::set<std::string> known{"moment", "mle", "mle_exact", "wmc", "unicorn"};
    for (const auto& name : e.estimators) {
        if (!known.count(name)) throw ConfigError("estimate.estimators: unknown estimator '" + name + "'");
    }
    auto check_window = [](std::size_t side, const std::string& key) {
        if (side < 3 || side % 2 == 0) throw ConfigError(key + ": window side must be odd and >= 3");
    };
    check_window(e.window, "estimate.window");
    if (e.stride < 1 || e.stride > e.window) throw ConfigError("estimate.stride must be in [1, window]");
    if (e.mle_stride > e.window) throw ConfigError("estimate.mle_stride must not exceed the window");
    const bool wants_wmc = std::find(e.estimators.begin(), e.estimators.end(), "wmc") != e.estimators.end();
    if (wants_wmc && e.wmc_windows.size() < 2) throw ConfigError("estimate.wmc_windows needs at least two windows");
    for (auto side : e.wmc_windows) check_window(side, "estimate.wmc_windows");
    if (e.score != "analytic" && e.score != "kernel" && e.score != "checkpoint") {
        throw ConfigError("estimate.score must be analytic, kernel or checkpoint");
    }
    if (e.kernel_window < 3 || e.kernel_window % 2 == 0) throw ConfigError("estimate.kernel_window must be odd >= 3");
    if (e.omega_mode != "global" && e.omega_mode != "local" && e.omega_mode != "known") {
        throw ConfigError("estimate.omega_mode must be global, local or known");
    }
    check_window(e.omega_window, "estimate.omega_window");
    if (e.filter != "median" && e.filter != "average" && e.filter != "none") {
        throw ConfigError("estimate.filter must be median, average or none");
    }
    if (e.filter != "none") check_window(e.filter_side, "estimate.filter_side");

    if (!(evaluate.psnr_max > 0.0)) throw ConfigError("evaluate.psnr_max must be > 0");
}

std::string ExperimentConfig::canonical() const {
    std::map<std::string, std::string> kv;
    kv["run.seed"] = std::to_string(seed);
    kv["phantom.source"] = phantom.source;
    if (phantom.source == "builtin") {
        kv["phantom.pattern"] = phantom.pattern;
        kv["phantom.count"] = std::to_string(phantom.count);
        kv["phantom.width"] = std::to_string(phantom.width);
        kv["phantom.height"] = std::to_string(phantom.height);
        kv["phantom.cell"] = std::to_string(phantom.cell);
    } else {
        kv["phantom.directory"] = phantom.directory.generic_string();
    }
    kv["phantom.omega"] = fmt_double(phantom.omega);
    kv["estimate.estimators"] = join(estimate.estimators);
    kv["estimate.window"] = std::to_string(estimate.window);
    kv["estimate.stride"] = std::to_string(estimate.stride);
    kv["estimate.mle_stride"] = std::to_string(estimate.mle_stride);
    kv["estimate.border"] = qus::to_string(estimate.border);
    kv["estimate.wmc_windows"] = join(estimate.wmc_windows);
    kv["estimate.score"] = estimate.score;
    kv["estimate.checkpoint"] = estimate.checkpoint.generic_string();
    kv["estimate.kernel_window"] = std::to_string(estimate.kernel_window);
    kv["estimate.kernel_reflect"] = estimate.kernel_reflect ? "true" : "false";
    kv["estimate.omega_mode"] = estimate.omega_mode;
    kv["estimate.omega_window"] = std::to_string(estimate.omega_window);
    kv["estimate.filter"] = estimate.filter;
    kv["estimate.filter_side"] = std::to_string(estimate.filter_side);
    kv["evaluate.psnr_max"] = fmt_double(evaluate.psnr_max);
    kv["evaluate.cohort"] = evaluate.cohort.generic_string();
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    out += train_lines(train, true);
    out += "train.checkpoint = " + train.checkpoint + "\n";
    out += "train.resume = " + train.resume.generic_string() + "\n";
    return out;
}

std::string ExperimentConfig::hash() const { return qus::sha256_hex(canonical()); }

std::string ExperimentConfig::train_hash() const {
    return qus::sha256_hex("seed = " + std::to_string(seed) + "\n" + train_lines(train, false));
}

ExperimentConfig parse_config(const std::string& text) {
    // Whole-line comments may start with '#' or ';'.
    std::string cleaned;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const std::string t = trim(line);
            if (!t.empty() && (t[0] == '#' || t[0] == ';')) continue;
            cleaned += line + "\n";
        }
    }
    pt::ptree tree;
    try {
        std::istringstream in(cleaned);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    static const std::set<std::string> sections{"run", "phantom", "train", "estimate", "evaluate"};
    for (const auto& [name, sub] : tree) {
        if (sub.empty()) throw ConfigError("config: key '" + name + "' outside of a section");
        if (!sections.count(name)) throw ConfigError("config: unknown section [" + name + "]");
    }
    auto child = [&](const std::string& name) -> const pt::ptree* {
        auto it = tree.find(name);
        return it == tree.not_found() ? nullptr : &it->second;
    };

    ExperimentConfig cfg;
    {
        Section s(child("run"), "run");
        s.on("output", set_path(cfg.output));
        s.on("seed", [&](const std::string& k, const std::string& v) { cfg.seed = parse_number<std::uint64_t>(k, v); });
        s.on("threads", [&](const std::string& k, const std::string& v) { cfg.threads = parse_number<unsigned>(k, v); });
        s.finish();
    }
    {
        auto& p = cfg.phantom;
        Section s(child("phantom"), "phantom");
        s.on("source", set_string(p.source));
        s.on("pattern", set_string(p.pattern));
        s.on("count", set_size(p.count));
        s.on("width", set_size(p.width));
        s.on("height", set_size(p.height));
        s.on("cell", set_size(p.cell));
        s.on("directory", set_path(p.directory));
        s.on("omega", set_real(p.omega));
        s.finish();
    }
    {
        auto& t = cfg.train;
        auto& c = t.cfg;
        Section s(child("train"), "train");
        s.on("source", set_string(t.source));
        s.on("pattern", set_string(t.pattern));
        s.on("images", set_size(t.images));
        s.on("size", set_size(t.size));
        s.on("glyph_size", set_size(t.glyph_size));
        s.on("channels", set_size(t.channels));
        s.on("depth", set_size(t.depth));
        s.on("head", set_string(t.head));
        s.on("basis_floor", set_real(t.basis_floor));
        s.on("checkpoint", set_string(t.checkpoint));
        s.on("resume", set_path(t.resume));
        s.on("epochs", set_size(c.epochs));
        s.on("learning_rate", set_real(c.learning_rate));
        s.on("lr_halve_epoch", set_size(c.lr_halve_epoch));
        s.on("weight_decay", set_real(c.weight_decay));
        s.on("beta1", set_real(c.beta1));
        s.on("beta2", set_real(c.beta2));
        s.on("adam_eps", set_real(c.adam_eps));
        s.on("batch_size", set_size(c.batch_size));
        s.on("crop", set_size(c.crop));
        s.on("delta_max", set_real(c.delta_max_rel));
        s.on("delta_min", set_real(c.delta_min_rel));
        s.on("sigma_mode", [&](const std::string&, const std::string& v) {
            c.sigma_mode = qus::score::sigma_mode_from_string(v);
        });
        s.on("antithetic", set_bool(c.antithetic));
        s.on("weighting", [&](const std::string&, const std::string& v) {
            c.weighting = qus::score::loss_weighting_from_string(v);
        });
        s.on("flip", set_bool(c.augment_flip));
        s.on("rotate", set_bool(c.augment_rotate));
        s.finish();
    }
    {
        auto& e = cfg.estimate;
        Section s(child("estimate"), "estimate");
        s.on("estimators", [&](const std::string&, const std::string& v) { e.estimators = split_list(v); });
        s.on("window", set_size(e.window));
        s.on("stride", set_size(e.stride));
        s.on("mle_stride", [&](const std::string& k, const std::string& v) {
            e.mle_stride = v == "half" ? 0 : parse_number<std::size_t>(k, v);
        });
        s.on("border", [&](const std::string&, const std::string& v) { e.border = qus::border_policy_from_string(v); });
        s.on("wmc_windows", [&](const std::string& k, const std::string& v) {
            e.wmc_windows.clear();
            for (const auto& item : split_list(v)) e.wmc_windows.push_back(parse_number<std::size_t>(k, item));
        });
        s.on("score", set_string(e.score));
        s.on("checkpoint", set_path(e.checkpoint));
        s.on("kernel_window", set_size(e.kernel_window));
        s.on("kernel_reflect", set_bool(e.kernel_reflect));
        s.on("omega_mode", set_string(e.omega_mode));
        s.on("omega_window", set_size(e.omega_window));
        s.on("filter", set_string(e.filter));
        s.on("filter_side", set_size(e.filter_side));
        s.finish();
    }
    {
        Section s(child("evaluate"), "evaluate");
        s.on("psnr_max", set_real(cfg.evaluate.psnr_max));
        s.on("cohort", set_path(cfg.evaluate.cohort));
        s.finish();
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str());
    // Relative input paths are taken relative to the config file.
    const fs::path base = path.parent_path();
    auto rebase = [&](fs::path& p) {
        if (!p.empty() && p.is_relative()) p = base / p;
    };
    rebase(cfg.phantom.directory);
    rebase(cfg.estimate.checkpoint);
    rebase(cfg.evaluate.cohort);
    rebase(cfg.train.resume);
    return cfg;
}

void apply(ExperimentConfig& cfg, const Overrides& o) {
    if (!o.output.empty()) cfg.output = o.output;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    if (o.threads >= 0) cfg.threads = static_cast<unsigned>(o.threads);
}

}  // namespace qusapp
