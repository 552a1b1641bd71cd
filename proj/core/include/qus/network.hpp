#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qus/image.hpp"

namespace qus::score {

enum class Activation { None, Relu, Tanh, Softplus, Silu };
std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Per-pixel input channels: x, x^2 and log(max(x^2, 1e-6)).
enum class InputFeature { Amplitude, Squared, LogSquared };

/// Same-padded 2-D convolution followed by an activation. A residual layer
/// adds its input to the activated output (requires in == out channels).
struct ConvLayer {
    std::size_t in_channels;
    std::size_t out_channels;
    std::size_t kernel = 3;
    std::size_t dilation = 1;
    Activation act = Activation::Softplus;
    bool residual = false;

    std::size_t weight_count() const { return out_channels * in_channels * kernel * kernel; }
    std::size_t parameter_count() const { return weight_count() + out_channels; }
    bool operator==(const ConvLayer&) const = default;
};

/// How the last layer's channels become a score.
///   Linear: one output channel, used as the score directly.
///   Basis:  three channels (g0, g1, g2) combined with the input amplitude x as
///           s = g0 / max(x, floor) + g1 * x + g2.
///   Nakagami: one channel a, s = (2a - 1) / max(x, floor) - 2a * x, the score
///           of a Nakagami law with shape a and unit second moment (inputs are
///           normalized to unit RMS).
enum class HeadKind { Linear, Basis, Nakagami };

struct Architecture {
    std::vector<InputFeature> inputs{InputFeature::Amplitude, InputFeature::Squared, InputFeature::LogSquared};
    std::vector<ConvLayer> layers;
    HeadKind head = HeadKind::Nakagami;
    double basis_floor = 0.05;

    std::size_t parameter_count() const;
    std::size_t head_channels() const { return head == HeadKind::Basis ? 3 : 1; }
    bool uses_floor() const { return head != HeadKind::Linear; }
    /// Throws InvalidArgument when channel counts do not chain, kernels are
    /// even, or a residual layer changes width.
    void validate() const;

    /// Canonical single-line descriptor; parse(describe()) reproduces *this.
    std::string describe() const;
    static Architecture parse(const std::string& descriptor);

    /// Residual dilated CNN: a lifting layer, `depth - 2` residual layers with
    /// dilations cycling 1, 2, 4, 8, and a linear output layer.
    static Architecture compact(std::size_t channels = 16, std::size_t depth = 6, HeadKind head = HeadKind::Nakagami);
    /// Two convolutions, for gradient checks.
    static Architecture toy(std::size_t hidden = 4, HeadKind head = HeadKind::Basis);

    bool operator==(const Architecture&) const = default;
};

/// Input amplitudes are divided by the root-mean-square of the image they came
/// from, so the network always sees unit second moment; scores are divided by
/// the same factor on the way out (score scales as 1/amplitude).
struct Normalization {
    /// RMS of the training corpus, kept for reference.
    double training_rms = 1.0;
};

struct ScoreModel {
    Architecture arch;
    std::vector<double> params;
    Normalization norm;

    ScoreModel() = default;
    /// Zero-initialized parameters.
    explicit ScoreModel(Architecture a);

    /// Scaled-normal initialization from `seed`. The output layer starts at
    /// zero: a zero score for the linear and basis heads, the Rayleigh score
    /// (a = 1) for the Nakagami head.
    static ScoreModel initialized(Architecture a, std::uint64_t seed);
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Activations cached by forward() for backward(). Reusable across calls of
/// the same spatial size.
struct Workspace {
    std::size_t width = 0, height = 0;
    std::vector<double> input;   // normalized amplitude x
    std::vector<RowMat> acts;    // acts[0] = lifted input, acts[l+1] = output of layer l
    std::vector<RowMat> preact;  // pre-activation of each layer
    std::vector<RowMat> cols;    // im2col buffer per layer
    RowMat grad_buf, grad_next, dcols;
};

/// Score of a normalized input field (unit-RMS amplitudes), in normalized units.
void forward_normalized(const ScoreModel& model, const Grid<double>& x, Workspace& ws, std::vector<double>& score);

/// Accumulates d(loss)/d(params) into `grad`, given d(loss)/d(score) for the
/// most recent forward_normalized call on `ws`.
void backward(const ScoreModel& model, Workspace& ws, std::span<const double> d_score, std::span<double> grad);

/// Score field of an envelope image in 1/amplitude units. Deterministic.
ScoreField forward(const ScoreModel& model, const EnvelopeImage& img);

/// RMS of an image's amplitudes; throws InvalidArgument for an all-zero image.
double image_rms(const Grid<double>& amp);

}  // namespace qus::score
