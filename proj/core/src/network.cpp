#include "qus/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qus/error.hpp"
#include "qus/rng.hpp"

namespace qus::score {
namespace {

using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const unsigned long v = std::stoul(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("architecture: bad " + what + " '" + s + "'");
    }
}

double activate(Activation a, double z) {
    switch (a) {
        case Activation::None: return z;
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Softplus: return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
        case Activation::Silu: return z / (1.0 + std::exp(-z));
    }
    return z;
}

double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::None: return 1.0;
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Softplus: return 1.0 / (1.0 + std::exp(-z));
        case Activation::Silu: {
            const double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 + z * (1.0 - s));
        }
    }
    return 1.0;
}

// Row (ci, ky, kx) of `cols` holds channel ci shifted by the kernel offset,
// zero outside the image.
void im2col(const RowMat& x, std::size_t w, std::size_t h, std::size_t k, std::size_t dil, RowMat& cols) {
    const std::size_t cin = static_cast<std::size_t>(x.rows());
    const long half = static_cast<long>(k / 2);
    cols.resize(static_cast<long>(cin * k * k), static_cast<long>(w * h));
    const long W = static_cast<long>(w), H = static_cast<long>(h);
    for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* src = x.row(static_cast<long>(ci)).data();
        for (std::size_t ky = 0; ky < k; ++ky) {
            const long dy = (static_cast<long>(ky) - half) * static_cast<long>(dil);
            for (std::size_t kx = 0; kx < k; ++kx) {
                const long dx = (static_cast<long>(kx) - half) * static_cast<long>(dil);
                double* dst = cols.row(static_cast<long>((ci * k + ky) * k + kx)).data();
                const long x0 = std::clamp(-dx, 0L, W), x1 = std::clamp(W - dx, 0L, W);
                for (long y = 0; y < H; ++y) {
                    double* drow = dst + y * W;
                    const long sy = y + dy;
                    if (sy < 0 || sy >= H || x0 >= x1) {
                        std::fill(drow, drow + W, 0.0);
                        continue;
                    }
                    std::fill(drow, drow + x0, 0.0);
                    std::copy(src + sy * W + x0 + dx, src + sy * W + x1 + dx, drow + x0);
                    std::fill(drow + x1, drow + W, 0.0);
                }
            }
        }
    }
}

void col2im(const RowMat& cols, std::size_t cin, std::size_t w, std::size_t h, std::size_t k, std::size_t dil,
            RowMat& dx_out) {
    const long half = static_cast<long>(k / 2);
    dx_out.setZero(static_cast<long>(cin), static_cast<long>(w * h));
    const long W = static_cast<long>(w), H = static_cast<long>(h);
    for (std::size_t ci = 0; ci < cin; ++ci) {
        double* dst = dx_out.row(static_cast<long>(ci)).data();
        for (std::size_t ky = 0; ky < k; ++ky) {
            const long dy = (static_cast<long>(ky) - half) * static_cast<long>(dil);
            for (std::size_t kx = 0; kx < k; ++kx) {
                const long dx = (static_cast<long>(kx) - half) * static_cast<long>(dil);
                const double* src = cols.row(static_cast<long>((ci * k + ky) * k + kx)).data();
                const long x0 = std::clamp(-dx, 0L, W), x1 = std::clamp(W - dx, 0L, W);
                for (long y = 0; y < H; ++y) {
                    const long sy = y + dy;
                    if (sy < 0 || sy >= H) continue;
                    const double* srow = src + y * W;
                    double* drow = dst + sy * W + dx;
                    for (long xx = x0; xx < x1; ++xx) drow[xx] += srow[xx];
                }
            }
        }
    }
}

const char* feature_name(InputFeature f) {
    switch (f) {
        case InputFeature::Amplitude: return "x";
        case InputFeature::Squared: return "x2";
        case InputFeature::LogSquared: return "logx2";
    }
    return "?";
}

double feature_value(InputFeature f, double x) {
    switch (f) {
        case InputFeature::Amplitude: return x;
        case InputFeature::Squared: return x * x;
        case InputFeature::LogSquared: return std::log(std::max(x * x, 1e-6));
    }
    return x;
}

double basis_inverse(double x, double floor) { return 1.0 / std::max(x, floor); }

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::None: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Softplus: return "softplus";
        case Activation::Silu: return "silu";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear" || s == "none") return Activation::None;
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    if (s == "softplus") return Activation::Softplus;
    if (s == "silu") return Activation::Silu;
    throw InvalidArgument("unknown activation '" + s + "'");
}

std::size_t Architecture::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.parameter_count();
    return n;
}

void Architecture::validate() const {
    if (inputs.empty()) throw InvalidArgument("architecture: no input features");
    if (layers.empty()) throw InvalidArgument("architecture: no layers");
    std::size_t ch = inputs.size();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.in_channels != ch) {
            throw InvalidArgument("architecture: layer " + std::to_string(i) + " expects " +
                                  std::to_string(l.in_channels) + " channels, gets " + std::to_string(ch));
        }
        if (l.kernel == 0 || l.kernel % 2 == 0) throw InvalidArgument("architecture: kernel sizes must be odd");
        if (l.dilation == 0) throw InvalidArgument("architecture: dilation must be >= 1");
        if (l.out_channels == 0) throw InvalidArgument("architecture: zero output channels");
        if (l.residual && l.in_channels != l.out_channels) {
            throw InvalidArgument("architecture: residual layer must preserve channel count");
        }
        ch = l.out_channels;
    }
    if (ch != head_channels()) {
        throw InvalidArgument("architecture: last layer must produce " + std::to_string(head_channels()) +
                              " channels for this head");
    }
    if (uses_floor() && !(basis_floor > 0.0)) throw InvalidArgument("architecture: basis floor must be > 0");
}

std::string Architecture::describe() const {
    std::ostringstream os;
    os << "in=";
    for (std::size_t i = 0; i < inputs.size(); ++i) os << (i ? "," : "") << feature_name(inputs[i]);
    for (const auto& l : layers) {
        os << "|conv:" << l.in_channels << '>' << l.out_channels << ":k" << l.kernel << ":d" << l.dilation << ':'
           << to_string(l.act) << (l.residual ? ":res" : "");
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", basis_floor);
    os << "|head=";
    switch (head) {
        case HeadKind::Linear: os << "linear"; break;
        case HeadKind::Basis: os << "basis:" << buf; break;
        case HeadKind::Nakagami: os << "nakagami:" << buf; break;
    }
    return os.str();
}

Architecture Architecture::parse(const std::string& descriptor) {
    Architecture a;
    a.inputs.clear();
    bool saw_head = false;
    for (const auto& part : split(descriptor, '|')) {
        if (part.rfind("in=", 0) == 0) {
            for (const auto& f : split(part.substr(3), ',')) {
                if (f == "x") a.inputs.push_back(InputFeature::Amplitude);
                else if (f == "x2") a.inputs.push_back(InputFeature::Squared);
                else if (f == "logx2") a.inputs.push_back(InputFeature::LogSquared);
                else throw InvalidArgument("architecture: unknown input feature '" + f + "'");
            }
        } else if (part.rfind("conv:", 0) == 0) {
            const auto f = split(part.substr(5), ':');
            if (f.size() < 4) throw InvalidArgument("architecture: malformed layer '" + part + "'");
            const auto arrow = f[0].find('>');
            if (arrow == std::string::npos) throw InvalidArgument("architecture: malformed channels '" + f[0] + "'");
            ConvLayer l{parse_size(f[0].substr(0, arrow), "channels"), parse_size(f[0].substr(arrow + 1), "channels")};
            if (f[1].empty() || f[1][0] != 'k' || f[2].empty() || f[2][0] != 'd') {
                throw InvalidArgument("architecture: malformed layer '" + part + "'");
            }
            l.kernel = parse_size(f[1].substr(1), "kernel");
            l.dilation = parse_size(f[2].substr(1), "dilation");
            l.act = activation_from_string(f[3]);
            if (f.size() == 5) {
                if (f[4] != "res") throw InvalidArgument("architecture: unknown layer flag '" + f[4] + "'");
                l.residual = true;
            } else if (f.size() > 5) {
                throw InvalidArgument("architecture: malformed layer '" + part + "'");
            }
            a.layers.push_back(l);
        } else if (part.rfind("head=", 0) == 0) {
            const std::string h = part.substr(5);
            saw_head = true;
            if (h == "linear") {
                a.head = HeadKind::Linear;
            } else if (h.rfind("basis:", 0) == 0 || h.rfind("nakagami:", 0) == 0) {
                const auto colon = h.find(':');
                a.head = h[0] == 'b' ? HeadKind::Basis : HeadKind::Nakagami;
                try {
                    a.basis_floor = std::stod(h.substr(colon + 1));
                } catch (const std::exception&) {
                    throw InvalidArgument("architecture: bad basis floor '" + h + "'");
                }
            } else {
                throw InvalidArgument("architecture: unknown head '" + h + "'");
            }
        } else {
            throw InvalidArgument("architecture: unknown descriptor part '" + part + "'");
        }
    }
    if (!saw_head) throw InvalidArgument("architecture: missing head");
    a.validate();
    return a;
}

Architecture Architecture::compact(std::size_t channels, std::size_t depth, HeadKind head) {
    if (depth < 2) throw InvalidArgument("compact architecture needs depth >= 2");
    Architecture a;
    a.head = head;
    a.layers.push_back({a.inputs.size(), channels, 3, 1, Activation::Softplus, false});
    static constexpr std::size_t kDilations[] = {1, 2, 4, 8};
    for (std::size_t i = 0; i + 2 < depth; ++i) {
        a.layers.push_back({channels, channels, 3, kDilations[i % 4], Activation::Softplus, true});
    }
    a.layers.push_back({channels, a.head_channels(), 3, 1, Activation::None, false});
    a.validate();
    return a;
}

Architecture Architecture::toy(std::size_t hidden, HeadKind head) {
    Architecture a;
    a.head = head;
    a.layers.push_back({a.inputs.size(), hidden, 3, 1, Activation::Softplus, false});
    a.layers.push_back({hidden, a.head_channels(), 3, 1, Activation::None, false});
    a.validate();
    return a;
}

ScoreModel::ScoreModel(Architecture a) : arch(std::move(a)) {
    arch.validate();
    params.assign(arch.parameter_count(), 0.0);
}

ScoreModel ScoreModel::initialized(Architecture a, std::uint64_t seed) {
    ScoreModel m(std::move(a));
    Rng rng(seed);
    std::size_t off = 0;
    for (std::size_t li = 0; li < m.arch.layers.size(); ++li) {
        const auto& l = m.arch.layers[li];
        const bool last = li + 1 == m.arch.layers.size();
        const double fan_in = static_cast<double>(l.in_channels * l.kernel * l.kernel);
        // Residual branches start small so the stack begins close to identity.
        const double gain = l.residual ? 0.5 : 1.0;
        const double sd = last ? 0.0 : gain * std::sqrt(2.0 / fan_in);
        for (std::size_t i = 0; i < l.weight_count(); ++i) m.params[off + i] = sd * rng.normal();
        off += l.parameter_count();  // biases stay zero
    }
    // A Nakagami head starts at the Rayleigh case a = 1.
    if (m.arch.head == HeadKind::Nakagami) m.params.back() = 1.0;
    return m;
}

double image_rms(const Grid<double>& amp) {
    double s = 0.0;
    for (double v : amp.values()) s += v * v;
    if (amp.empty() || s == 0.0) throw InvalidArgument("image_rms: empty or all-zero image");
    return std::sqrt(s / static_cast<double>(amp.size()));
}

void forward_normalized(const ScoreModel& model, const Grid<double>& x, Workspace& ws, std::vector<double>& score) {
    const auto& arch = model.arch;
    if (model.params.size() != arch.parameter_count()) throw InvalidArgument("forward: parameter count mismatch");
    const std::size_t w = x.width(), h = x.height(), P = w * h;
    if (P == 0) throw InvalidArgument("forward: empty input");
    const std::size_t L = arch.layers.size();
    ws.width = w;
    ws.height = h;
    ws.input.assign(x.values().begin(), x.values().end());
    ws.acts.resize(L + 1);
    ws.preact.resize(L);
    ws.cols.resize(L);

    RowMat& lifted = ws.acts[0];
    lifted.resize(static_cast<long>(arch.inputs.size()), static_cast<long>(P));
    for (std::size_t f = 0; f < arch.inputs.size(); ++f) {
        double* row = lifted.row(static_cast<long>(f)).data();
        for (std::size_t p = 0; p < P; ++p) row[p] = feature_value(arch.inputs[f], x[p]);
    }

    std::size_t off = 0;
    for (std::size_t li = 0; li < L; ++li) {
        const auto& l = arch.layers[li];
        const long K = static_cast<long>(l.in_channels * l.kernel * l.kernel);
        ConstMap W(model.params.data() + off, static_cast<long>(l.out_channels), K);
        ConstVec b(model.params.data() + off + l.weight_count(), static_cast<long>(l.out_channels));
        im2col(ws.acts[li], w, h, l.kernel, l.dilation, ws.cols[li]);
        RowMat& z = ws.preact[li];
        z.noalias() = W * ws.cols[li];
        z.colwise() += b;
        RowMat& a = ws.acts[li + 1];
        if (l.act == Activation::None) {
            a = z;
        } else {
            a = z.unaryExpr([act = l.act](double v) { return activate(act, v); });
        }
        if (l.residual) a += ws.acts[li];
        off += l.parameter_count();
    }

    const RowMat& out = ws.acts[L];
    score.resize(P);
    if (arch.head == HeadKind::Linear) {
        std::copy(out.row(0).data(), out.row(0).data() + P, score.begin());
    } else if (arch.head == HeadKind::Nakagami) {
        const double* a = out.row(0).data();
        for (std::size_t p = 0; p < P; ++p) {
            score[p] = (2.0 * a[p] - 1.0) * basis_inverse(x[p], arch.basis_floor) - 2.0 * a[p] * x[p];
        }
    } else {
        const double* g0 = out.row(0).data();
        const double* g1 = out.row(1).data();
        const double* g2 = out.row(2).data();
        for (std::size_t p = 0; p < P; ++p) {
            score[p] = g0[p] * basis_inverse(x[p], arch.basis_floor) + g1[p] * x[p] + g2[p];
        }
    }
}

void backward(const ScoreModel& model, Workspace& ws, std::span<const double> d_score, std::span<double> grad) {
    const auto& arch = model.arch;
    const std::size_t P = ws.width * ws.height;
    if (d_score.size() != P) throw InvalidArgument("backward: gradient size does not match last forward");
    if (grad.size() != model.params.size()) throw InvalidArgument("backward: gradient buffer size mismatch");
    const std::size_t L = arch.layers.size();

    RowMat& dA = ws.grad_buf;
    dA.resize(static_cast<long>(arch.head_channels()), static_cast<long>(P));
    if (arch.head == HeadKind::Linear) {
        std::copy(d_score.begin(), d_score.end(), dA.row(0).data());
    } else if (arch.head == HeadKind::Nakagami) {
        double* d0 = dA.row(0).data();
        for (std::size_t p = 0; p < P; ++p) {
            const double x = ws.input[p];
            d0[p] = d_score[p] * (2.0 * basis_inverse(x, arch.basis_floor) - 2.0 * x);
        }
    } else {
        double* d0 = dA.row(0).data();
        double* d1 = dA.row(1).data();
        double* d2 = dA.row(2).data();
        for (std::size_t p = 0; p < P; ++p) {
            const double x = ws.input[p];
            d0[p] = d_score[p] * basis_inverse(x, arch.basis_floor);
            d1[p] = d_score[p] * x;
            d2[p] = d_score[p];
        }
    }

    std::vector<std::size_t> offsets(L);
    for (std::size_t li = 0, off = 0; li < L; ++li) {
        offsets[li] = off;
        off += arch.layers[li].parameter_count();
    }

    RowMat dZ;
    for (std::size_t li = L; li-- > 0;) {
        const auto& l = arch.layers[li];
        const long K = static_cast<long>(l.in_channels * l.kernel * l.kernel);
        const long cout = static_cast<long>(l.out_channels);
        if (l.act == Activation::None) {
            dZ = dA;
        } else {
            dZ = dA.cwiseProduct(ws.preact[li].unaryExpr([act = l.act](double v) { return activate_grad(act, v); }));
        }
        MutMap dW(grad.data() + offsets[li], cout, K);
        MutVec db(grad.data() + offsets[li] + l.weight_count(), cout);
        dW.noalias() += dZ * ws.cols[li].transpose();
        db += dZ.rowwise().sum();
        if (li == 0) break;
        ConstMap W(model.params.data() + offsets[li], cout, K);
        ws.dcols.noalias() = W.transpose() * dZ;
        col2im(ws.dcols, l.in_channels, ws.width, ws.height, l.kernel, l.dilation, ws.grad_next);
        if (l.residual) ws.grad_next += dA;
        std::swap(ws.grad_buf, ws.grad_next);
    }
}

ScoreField forward(const ScoreModel& model, const EnvelopeImage& img) {
    const auto& amp = img.amplitudes();
    const double rms = image_rms(amp);
    Grid<double> x(amp.width(), amp.height());
    for (std::size_t i = 0; i < amp.size(); ++i) x[i] = amp[i] / rms;
    Workspace ws;
    std::vector<double> s;
    forward_normalized(model, x, ws, s);
    ScoreField out(amp.width(), amp.height());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] / rms;
    return out;
}

}  // namespace qus::score
