#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qus/image.hpp"

namespace qus::imaging {

/// Per-pixel Nakagami draws with shape m(x) from a valid ground-truth map.
EnvelopeImage synthesize_envelope(const ParamMap& truth, double omega, std::uint64_t seed);

enum class OmegaMode { Global, Local };

/// Omega-hat = E[R^2], either one scalar over the ROI or a windowed mean.
class OmegaField {
public:
    static OmegaField global(double value);
    static OmegaField local(Grid<double> values, std::size_t side);

    OmegaMode mode() const noexcept { return mode_; }
    std::size_t side() const noexcept { return side_; }
    double at(std::size_t i) const { return mode_ == OmegaMode::Global ? scalar_ : local_[i]; }
    double scalar() const noexcept { return scalar_; }
    const Grid<double>& local_values() const noexcept { return local_; }
    std::string describe() const;  // "global" or "local:<side>"

private:
    OmegaMode mode_ = OmegaMode::Global;
    double scalar_ = 1.0;
    std::size_t side_ = 0;
    Grid<double> local_;
};

/// Global mode averages r^2 over the ROI; local mode averages over a
/// side x side window clipped to the image (and to the ROI when present).
OmegaField estimate_omega(const EnvelopeImage& img, OmegaMode mode, std::size_t side = 9);

enum class PixelStatus { Ok, Clamped, Singular };

struct PixelEstimate {
    double m;    // clamped value (NaN when singular)
    double raw;  // unclamped closed form (NaN when singular)
    PixelStatus status;
};

struct UnicornOptions {
    double clamp_lo = 0.01;
    double clamp_hi = 10.0;
    /// Denominator guard as a fraction of 2 / sqrt(omega_hat).
    double denominator_rel_eps = 1e-3;
    /// Amplitude floor as a fraction of the image maximum.
    double amplitude_rel_floor = 1e-6;
};

/// m-hat = (1/r + score) / (2/r - 2r/omega_hat). Singular when the
/// denominator magnitude falls below eps_d = rel_eps * 2 / sqrt(omega_hat).
PixelEstimate unicorn_pixel(double r, double score, double omega_hat, const UnicornOptions& opts = {});

/// Closed-form estimate at every pixel. Singular and clamped pixels are
/// masked; meta records the masked fraction and the omega mode.
ParamMap unicorn_map(const EnvelopeImage& img, const ScoreField& score, const OmegaField& omega,
                     const UnicornOptions& opts = {});

enum class FilterKind { Median, Average };
std::string to_string(FilterKind k);
FilterKind filter_kind_from_string(const std::string& s);

/// Median or mean over the valid pixels of each side x side neighbourhood
/// (clipped at the image border). Masked pixels are filled by their
/// neighbourhood statistic; a pixel stays invalid only if its neighbourhood
/// has no valid member.
ParamMap low_pass(const ParamMap& map, FilterKind kind, std::size_t side);

}  // namespace qus::imaging
