#include "qus/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qus {

EnvelopeImage::EnvelopeImage(Grid<double> amplitudes, std::optional<Mask> roi)
    : amp_(std::move(amplitudes)), roi_(std::move(roi)) {
    for (double v : amp_.values()) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidArgument("EnvelopeImage: amplitudes must be finite and non-negative");
        }
    }
    if (roi_ && !roi_->same_shape(amp_)) throw InvalidArgument("EnvelopeImage: ROI shape mismatch");
}

EnvelopeImage::EnvelopeImage(std::size_t width, std::size_t height, std::vector<double> amplitudes)
    : EnvelopeImage(Grid<double>(width, height, std::move(amplitudes))) {}

double EnvelopeImage::max_value() const {
    double mx = 0.0;
    for (double v : amp_.values()) mx = std::max(mx, v);
    return mx;
}

EnvelopeImage EnvelopeImage::scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("EnvelopeImage::scaled: c must be > 0");
    Grid<double> g = amp_;
    for (double& v : g.values()) v *= c;
    return EnvelopeImage(std::move(g), roi_);
}

ParamMap::ParamMap(std::size_t width, std::size_t height)
    : m(width, height, std::numeric_limits<double>::quiet_NaN()), valid(width, height, 0) {}

std::size_t ParamMap::valid_count() const {
    return static_cast<std::size_t>(std::count_if(valid.values().begin(), valid.values().end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

double ParamMap::masked_fraction() const {
    if (valid.empty()) return 0.0;
    return 1.0 - static_cast<double>(valid_count()) / static_cast<double>(valid.size());
}

double ParamMap::valid_mean() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (valid[i]) {
            sum += m[i];
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

void ParamMap::set_invalid(std::size_t i) {
    m[i] = std::numeric_limits<double>::quiet_NaN();
    valid[i] = 0;
}

}  // namespace qus
