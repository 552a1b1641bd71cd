#include "qus/ardae.hpp"

#include <cmath>
#include <sstream>

#include "qus/error.hpp"

namespace qus::score {

std::string to_string(LossWeighting w) { return w == LossWeighting::Uniform ? "uniform" : "amplitude"; }

LossWeighting loss_weighting_from_string(const std::string& s) {
    if (s == "uniform") return LossWeighting::Uniform;
    if (s == "amplitude") return LossWeighting::Amplitude;
    throw InvalidArgument("unknown loss weighting '" + s + "'");
}

LossResult ardae_loss(const ScoreModel& model, std::span<const DenoisingSample> batch, const LossOptions& opts) {
    Workspace ws;
    return ardae_loss(model, batch, opts, ws);
}

LossResult ardae_loss(const ScoreModel& model, std::span<const DenoisingSample> batch, const LossOptions& opts,
                      Workspace& ws) {
    if (batch.empty()) throw InvalidArgument("ardae_loss: empty batch");
    std::size_t terms = 0;
    for (const auto& s : batch) {
        if (!s.clean || !s.noise) throw InvalidArgument("ardae_loss: null image");
        if (!s.clean->same_shape(*s.noise)) throw InvalidArgument("ardae_loss: noise shape differs from image");
        if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) throw InvalidArgument("ardae_loss: sigma must be > 0");
        terms += s.clean->size() * (opts.antithetic ? 2 : 1);
    }
    const double inv_n = 1.0 / static_cast<double>(terms);

    LossResult res;
    res.grad.assign(model.params.size(), 0.0);
    const bool amplitude_weight = opts.weighting == LossWeighting::Amplitude;
    std::vector<double> s_out, d_s;
    Grid<double> perturbed;
    for (const auto& sample : batch) {
        const auto& x = *sample.clean;
        const auto& u = *sample.noise;
        const double sigma = sample.sigma;
        for (int sign : {1, -1}) {
            if (sign < 0 && !opts.antithetic) break;
            perturbed = x;
            for (std::size_t p = 0; p < x.size(); ++p) perturbed[p] += sign * sigma * u[p];
            forward_normalized(model, perturbed, ws, s_out);
            d_s.resize(s_out.size());
            for (std::size_t p = 0; p < s_out.size(); ++p) {
                const double up = sign * u[p];
                const double resid = up + sigma * s_out[p];
                const double w = amplitude_weight ? perturbed[p] * perturbed[p] * inv_n : inv_n;
                res.loss += resid * resid * w;
                res.noise_energy += up * up * w;
                d_s[p] = 2.0 * sigma * resid * w;
            }
            backward(model, ws, d_s, res.grad);
        }
    }
    if (!std::isfinite(res.loss)) {
        std::ostringstream os;
        os << "ardae_loss: non-finite loss (batch " << batch.size() << ", first sigma " << batch.front().sigma << ")";
        throw NumericError(os.str());
    }
    return res;
}

}  // namespace qus::score
