// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "qus/ardae.hpp"
#include "qus/checksum.hpp"
#include "qus/cohort.hpp"
#include "qus/imaging.hpp"
#include "qus/kernel_score.hpp"
#include "qus/metrics.hpp"
#include "qus/nakagami.hpp"
#include "qus/phantom.hpp"
#include "qus/roc.hpp"
#include "qus/special.hpp"
#include "qus/train.hpp"
#include "qus/window_estimators.hpp"
#include "qusapp/app.hpp"
#include "qusapp/config.hpp"

namespace {

using namespace qus;
namespace fs = std::filesystem;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Runtime limits in seconds.
constexpr double kLimit[10] = {0, 1, 10, 10, 15 * 60, 30 * 60, 60, 60, 60, 10 * 60};

// 1. Closed-form identity with the analytic score and the true Omega.
Outcome identity() {
    constexpr double kTol = 1e-9;
    Rng rng(20240101);
    imaging::UnicornOptions wide;
    wide.clamp_lo = 1e-12;
    wide.clamp_hi = 1e12;
    double worst = 0.0;
    int done = 0, skipped = 0;
    while (done < 1000) {
        const NakagamiParams p(0.3 + 7.7 * rng.uniform(), 0.2 + 4.8 * rng.uniform());
        const double r = sample_one(p, rng);
        const auto e = imaging::unicorn_pixel(r, analytic_score(r, p), p.omega(), wide);
        if (e.status == imaging::PixelStatus::Singular) {
            ++skipped;
            continue;
        }
        worst = std::max(worst, std::abs(e.m - p.m()));
        ++done;
    }
    return {worst < kTol, fmt("max |m_hat - m| = %.2e over 1000 triples (%d guarded)", worst, skipped)};
}

// 2. Estimator consistency on 1e5 draws; exact-MLE residual on every window.
Outcome consistency() {
    constexpr double kTol = 0.03, kResidual = 1e-10;
    double worst = 0.0, worst_res = 0.0;
    std::string per;
    for (double m : {0.6, 1.0, 2.0}) {
        const auto r = sample({m, 1.0}, 100'000, 777 + static_cast<std::uint64_t>(10 * m));
        const double mo = moment_estimate(r).m_inv, mt = mle_taylor(r), me = mle_exact(r);
        worst = std::max({worst, std::abs(mo - m), std::abs(mt - m), std::abs(me - m)});
        worst_res = std::max(worst_res, std::abs(std::log(me) - digamma(me) - mle_delta(r)));
        per += fmt(" m=%.1f: moment %.3f, taylor %.3f (limit %.3f), exact %.3f;", m, mo, mt,
                   1.0 / (2.0 * (std::log(m) - digamma(m))), me);
    }
    Rng rng(31);
    for (int k = 0; k < 1000; ++k) {
        const auto w = sample({0.3 + 7.7 * rng.uniform(), 1.0}, 81, rng);
        const double me = mle_exact(w);
        worst_res = std::max(worst_res, std::abs(std::log(me) - digamma(me) - mle_delta(w)));
    }
    return {worst < kTol && worst_res < kResidual,
            fmt("max |m_hat - m| = %.4f, max residual %.1e;", worst, worst_res) + per};
}

// 3. Loss gradient against central differences on a two-layer model.
Outcome gradient_check() {
    constexpr double kRel = 1e-4, kStep = 1e-6, kFloor = 1e-6;
    double worst = 0.0;
    std::size_t checked = 0;
    for (auto head : {score::HeadKind::Linear, score::HeadKind::Basis, score::HeadKind::Nakagami}) {
        score::ScoreModel model(score::Architecture::toy(4, head));
        Rng rng(static_cast<std::uint64_t>(head) + 5);
        for (double& p : model.params) p = 0.3 * rng.normal();
        Grid<double> clean(8, 7), noise(8, 7);
        for (double& v : clean.values()) v = sample_one({1.2, 1.0}, rng);
        for (double& v : noise.values()) v = rng.normal();
        const double rms = score::image_rms(clean);
        for (double& v : clean.values()) v /= rms;
        const score::DenoisingSample batch[] = {{&clean, &noise, 0.15}};
        const score::LossOptions opts{true, score::LossWeighting::Amplitude};
        const auto base = score::ardae_loss(model, batch, opts);
        for (std::size_t i = 0; i < model.params.size(); ++i) {
            auto plus = model, minus = model;
            plus.params[i] += kStep;
            minus.params[i] -= kStep;
            const double fd =
                (score::ardae_loss(plus, batch, opts).loss - score::ardae_loss(minus, batch, opts).loss) / (2 * kStep);
            worst = std::max(worst, std::abs(base.grad[i] - fd) / std::max(std::abs(fd), kFloor));
            ++checked;
        }
    }
    return {worst < kRel, fmt("max relative error %.2e over %zu parameters (3 heads)", worst, checked)};
}

std::vector<EnvelopeImage> homogeneous(std::size_t n, double m, std::uint64_t seed) {
    std::vector<EnvelopeImage> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(64, 64, sample({m, 1.0}, 64 * 64, seed + i));
    return out;
}

// 4. Learned score on homogeneous data against the analytic and kernel scores.
Outcome score_learning() {
    constexpr double kPearson = 0.95, kKernelRmse = 0.5;
    constexpr double m = 1.2;
    const auto data = homogeneous(500, m, 100'000);
    score::TrainConfig cfg;
    cfg.epochs = 4;
    cfg.learning_rate = 2e-3;
    cfg.lr_halve_epoch = 2;
    cfg.crop = 32;
    cfg.seed = 11;
    const auto model = score::train(data, cfg, score::Architecture::compact()).model;

    const auto held = homogeneous(16, m, 900'000);
    std::vector<double> amps;
    for (const auto& img : held) amps.insert(amps.end(), img.amplitudes().values().begin(), img.amplitudes().values().end());
    const double lo = stats::quantile(amps, 0.05), hi = stats::quantile(amps, 0.95);
    const auto kernel = score::kernel_score(amps, amps);

    std::vector<double> learned, analytic, ker;
    std::size_t offset = 0;
    for (const auto& img : held) {
        const auto s = score::forward(model, img);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double r = img.amplitudes()[i];
            if (r >= lo && r <= hi) {
                learned.push_back(s[i]);
                analytic.push_back(analytic_score(r, {m, 1.0}));
                ker.push_back(kernel[offset + i]);
            }
        }
        offset += s.size();
    }
    const double pcc = stats::pearson(learned, analytic).r;
    const double k_rmse = stats::rmse(ker, analytic);
    const double model_vs_kernel = stats::rmse(learned, ker);
    return {pcc > kPearson && k_rmse < kKernelRmse && model_vs_kernel < kKernelRmse,
            fmt("Pearson(model, analytic) = %.4f; RMSE(kernel, analytic) = %.3f; RMSE(model, kernel) = %.3f "
                "over %zu central-90%% pixels",
                pcc, k_rmse, model_vs_kernel, learned.size())};
}

// 5. Glyph suite: trained UNICORN against the windowed estimators.
Outcome glyph_ordering() {
    constexpr double kMarginDb = 2.0;
    const auto train_gray = imaging::glyph_suite(64, 64, 1001);
    std::vector<EnvelopeImage> train_set;
    for (std::size_t i = 0; i < train_gray.size(); ++i)
        train_set.push_back(imaging::synthesize_envelope(imaging::phantom_from_gray(train_gray[i]), 1.0, 5000 + i));
    score::TrainConfig cfg;
    cfg.epochs = 150;
    cfg.learning_rate = 2e-3;
    cfg.lr_halve_epoch = 75;
    cfg.crop = 32;
    cfg.seed = 7;
    const auto model = score::train(train_set, cfg, score::Architecture::compact()).model;

    const auto test = imaging::glyph_suite(32, 64, 42);
    const std::vector<std::size_t> sides{5, 7, 9, 11, 13};
    std::vector<double> moment_psnr(sides.size(), 0.0);
    double u_psnr = 0, u_rmse = 0, m9_rmse = 0, mle_psnr = 0, mle_rmse = 0, mlex_psnr = 0, mlex_rmse = 0, wmc_psnr = 0,
           wmc_rmse = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto truth = imaging::phantom_from_gray(test[i]);
        const auto img = imaging::synthesize_envelope(truth, 1.0, 9000 + i);
        const auto u = imaging::low_pass(
            imaging::unicorn_map(img, score::forward(model, img), imaging::estimate_omega(img, imaging::OmegaMode::Global)),
            imaging::FilterKind::Median, 7);
        u_psnr += stats::psnr(u, truth);
        u_rmse += stats::rmse(u, truth);
        for (std::size_t k = 0; k < sides.size(); ++k) {
            const auto mo = sliding_map(img, {sides[k], 1}, Estimator::Moment);
            moment_psnr[k] += stats::psnr(mo, truth);
            if (sides[k] == 9) m9_rmse += stats::rmse(mo, truth);
        }
        const auto mle = sliding_map(img, WindowSpec::half_step(9), Estimator::MleTaylor);
        mle_psnr += stats::psnr(mle, truth);
        mle_rmse += stats::rmse(mle, truth);
        const auto mlex = sliding_map(img, {9, 1}, Estimator::MleExact);
        mlex_psnr += stats::psnr(mlex, truth);
        mlex_rmse += stats::rmse(mlex, truth);
        const auto w = wmc_map(img, {{9, 1}, {11, 1}, {13, 1}});
        wmc_psnr += stats::psnr(w, truth);
        wmc_rmse += stats::rmse(w, truth);
    }
    const double n = static_cast<double>(test.size());
    std::size_t best = 0;
    for (std::size_t k = 1; k < sides.size(); ++k)
        if (moment_psnr[k] > moment_psnr[best]) best = k;
    const double best_moment = moment_psnr[best] / n;
    u_psnr /= n;
    u_rmse /= n;
    const bool lower_rmse = u_rmse < m9_rmse / n && u_rmse < mle_rmse / n && u_rmse < mlex_rmse / n && u_rmse < wmc_rmse / n;
    return {u_psnr >= best_moment + kMarginDb && lower_rmse,
            fmt("UNICORN %.2f dB / %.4f; best moment (w%zu) %.2f dB; moment w9 %.2f / %.4f; MLE w9 %.2f / %.4f; "
                "MLE exact w9 %.2f / %.4f; WMC 9,11,13 %.2f / %.4f",
                u_psnr, u_rmse, sides[best], best_moment, moment_psnr[2] / n, m9_rmse / n, mle_psnr / n, mle_rmse / n,
                mlex_psnr / n, mlex_rmse / n, wmc_psnr / n, wmc_rmse / n)};
}

// 6. Window-modulated compounding is the mean of its constituents.
Outcome wmc_definition() {
    constexpr double kTol = 1e-12;
    const auto truth = imaging::phantom_from_gray(imaging::glyph_suite(1, 64, 5)[0]);
    const auto img = imaging::synthesize_envelope(truth, 1.0, 6);
    const auto single = sliding_map(img, {9, 1}, Estimator::Moment);
    const auto same = wmc_map(img, {{9, 1}, {9, 1}, {9, 1}});
    bool exact = single.valid == same.valid;
    for (std::size_t i = 0; i < single.m.size(); ++i)
        if (single.valid[i] && single.m[i] != same.m[i]) exact = false;
    const auto w = wmc_map(img, {{9, 1}, {11, 1}, {13, 1}});
    const auto a = sliding_map(img, {9, 1}, Estimator::Moment), b = sliding_map(img, {11, 1}, Estimator::Moment),
               c = sliding_map(img, {13, 1}, Estimator::Moment);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.m.size(); ++i) worst = std::max(worst, std::abs(w.m[i] - (a.m[i] + b.m[i] + c.m[i]) / 3));
    return {exact && worst < kTol, fmt("identical windows bit-exact: %s; max |wmc - mean| = %.1e", exact ? "yes" : "no", worst)};
}

// 7. Metric identities.
Outcome metrics_exactness() {
    constexpr double kLogTol = 1e-12;
    Rng rng(70);
    int auroc_mismatch = 0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 2 + rng.below(11);
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(6));
            l[i] = static_cast<int>(rng.below(2));
        }
        l[0] = 0;
        l[1] = 1;
        double c = 0;
        int pairs = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (l[i] == 1 && l[j] == 0) {
                    ++pairs;
                    c += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
                }
        if (stats::auroc(s, l) != c / pairs) ++auroc_mismatch;
    }
    double worst_log = 0.0;
    for (int k = 0; k < 100; ++k) {
        ParamMap a(16, 16), b(16, 16);
        for (std::size_t i = 0; i < a.m.size(); ++i) {
            a.m[i] = 0.5 + 1.5 * rng.uniform();
            b.m[i] = a.m[i] + 0.2 * rng.normal();
            a.valid[i] = b.valid[i] = 1;
        }
        const double id = 10 * std::log10(4.0) - 20 * std::log10(stats::rmse(b, a));
        worst_log = std::max(worst_log, std::abs(stats::psnr(b, a, 2.0) - id));
    }
    const std::vector<double> x{0.3, 1.7, 2.2, 4.1, 5.0}, y{-2.1, 2.1, 3.6, 9.3, 12.0};
    std::vector<double> neg;
    for (double v : x) neg.push_back(-4.0 * v + 1.0);
    const double r_neg = stats::pearson(x, neg).r;
    std::vector<double> affine;
    for (double v : x) affine.push_back(3.0 * v - 2.0);
    const double r_aff = stats::pearson(x, affine).r;
    const double p_same = stats::welch_test(y, y).p_value;
    const bool ok = auroc_mismatch == 0 && worst_log < kLogTol && std::abs(r_aff - 1.0) < 1e-14 &&
                    std::abs(r_neg + 1.0) < 1e-14 && p_same == 1.0;
    return {ok, fmt("AUROC mismatches %d/200; max PSNR identity error %.1e; pearson(+affine) = %.15f, "
                    "pearson(-affine) = %.15f; Welch p(identical) = %g",
                    auroc_mismatch, worst_log, r_aff, r_neg, p_same)};
}

// 8. Median removes an isolated outlier; constant maps are fixed points.
Outcome filter_behavior() {
    ParamMap c(21, 21);
    for (std::size_t i = 0; i < c.m.size(); ++i) {
        c.m[i] = 1.0;
        c.valid[i] = 1;
    }
    auto spike = c;
    spike.m(10, 10) = 10.0;
    const auto cleaned = imaging::low_pass(spike, imaging::FilterKind::Median, 7);
    bool removed = true;
    for (double v : cleaned.m.values()) removed = removed && v == 1.0;
    bool fixed = true;
    for (auto kind : {imaging::FilterKind::Median, imaging::FilterKind::Average})
        for (std::size_t side : {3, 5, 7}) {
            const auto out = imaging::low_pass(c, kind, side);
            for (double v : out.m.values()) fixed = fixed && v == 1.0;
        }
    return {removed && fixed, fmt("outlier removed: %s; constant fixed point (median/average, sides 3-7): %s",
                                  removed ? "yes" : "no", fixed ? "yes" : "no")};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// 9. Two full runs with the same configuration are byte-identical.
Outcome reproducibility() {
    const char* text = R"(
[run]
seed = 13
[phantom]
pattern = glyph
count = 3
[train]
images = 8
epochs = 2
crop = 32
channels = 8
depth = 4
learning_rate = 0.002
[estimate]
estimators = moment, mle, mle_exact, wmc, unicorn
score = checkpoint
)";
    const fs::path root = fs::temp_directory_path() / "qus_acceptance_repro";
    fs::remove_all(root);
    std::vector<fs::path> runs{root / "a", root / "b"};
    for (const auto& out : runs) {
        auto cfg = qusapp::parse_config(text);
        cfg.output = out;
        qusapp::run_command("compare", cfg);
    }
    std::set<std::string> files_a, files_b;
    for (int k = 0; k < 2; ++k)
        for (const auto& e : fs::recursive_directory_iterator(runs[k]))
            if (e.is_regular_file()) (k ? files_b : files_a).insert(fs::relative(e.path(), runs[k]).string());
    std::size_t differing = 0, compared = 0;
    for (const auto& f : files_a) {
        if (f == "timings.json") continue;
        ++compared;
        if (!files_b.count(f) || read_file(runs[0] / f) != read_file(runs[1] / f)) ++differing;
    }
    const bool same_set = files_a == files_b;
    const bool manifest = read_file(runs[0] / "manifest.json") == read_file(runs[1] / "manifest.json");
    fs::remove_all(root);
    return {same_set && manifest && differing == 0 && compared > 10,
            fmt("%zu files compared, %zu differ; manifests identical: %s", compared, differing, manifest ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, identity},         {2, consistency},       {3, gradient_check},  {4, score_learning}, {5, glyph_ordering},
        {6, wmc_definition},   {7, metrics_exactness}, {8, filter_behavior}, {9, reproducibility}};
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    int failures = 0;
    for (const auto& [id, run] : criteria) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < kLimit[id];
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("criterion %d: %s  %s  [%.2f s, limit %.0f s%s]\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                    kLimit[id], in_time ? "" : ", exceeded");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
