#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gangan/error.hpp"
#include "gangan/matrix.hpp"
#include "gangan/prng.hpp"

namespace gangan {

enum class Activation { Tanh, Sigmoid };

inline constexpr double kLeakySlope = 0.2;
inline constexpr std::size_t kNumLayers = 3;

// Architecture descriptor: three affine layers, LeakyReLU(0.2) after the
// first two, `output_activation` after the last.
struct MlpSpec {
    std::array<std::uint32_t, kNumLayers + 1> layer_dims{};  // d0 (input) .. d3 (output)
    Activation output_activation = Activation::Tanh;

    std::uint32_t input_dim() const { return layer_dims.front(); }
    std::uint32_t output_dim() const { return layer_dims.back(); }

    bool operator==(const MlpSpec&) const = default;
};

inline void validate_spec(const MlpSpec& spec) {
    for (auto d : spec.layer_dims) {
        if (d < 1) throw std::invalid_argument("MlpSpec: all layer dims must be >= 1");
    }
}

// Number of parameters (weights plus biases) of one network.
inline std::uint64_t param_count(const MlpSpec& spec) {
    std::uint64_t n = 0;
    for (std::size_t i = 1; i < spec.layer_dims.size(); ++i) {
        n += std::uint64_t(spec.layer_dims[i]) * spec.layer_dims[i - 1] + spec.layer_dims[i];
    }
    return n;
}

// Combined count of a (generator, discriminator) pair; the dimensionality of
// one flattened snapshot.
inline std::uint64_t param_count(const MlpSpec& gen_spec, const MlpSpec& disc_spec) {
    return param_count(gen_spec) + param_count(disc_spec);
}

template <typename T>
struct DenseLayer {
    Matrix<T> weight;      // out_dim x in_dim
    std::vector<T> bias;   // out_dim

    bool operator==(const DenseLayer&) const = default;
};

template <typename T>
struct MlpT {
    MlpSpec spec;
    std::array<DenseLayer<T>, kNumLayers> layers;

    bool operator==(const MlpT&) const = default;
};

using Mlp = MlpT<float>;

// Weights and biases i.i.d. uniform on (-1/sqrt(fan_in), +1/sqrt(fan_in)).
// Draw order is fixed: layers in order, each weight matrix row-major, then
// its bias.
template <typename T = float>
MlpT<T> init_mlp(const MlpSpec& spec, Prng& prng) {
    validate_spec(spec);
    MlpT<T> net{spec, {}};
    for (std::size_t k = 0; k < kNumLayers; ++k) {
        const std::size_t in = spec.layer_dims[k];
        const std::size_t out = spec.layer_dims[k + 1];
        const double bound = 1.0 / std::sqrt(double(in));
        auto& layer = net.layers[k];
        layer.weight = Matrix<T>(out, in);
        layer.bias.assign(out, T(0));
        for (auto& w : layer.weight.data) w = T(prng.uniform(-bound, bound));
        for (auto& b : layer.bias) b = T(prng.uniform(-bound, bound));
    }
    return net;
}

template <typename T>
T leaky_relu(T x) {
    return x >= T(0) ? x : T(kLeakySlope) * x;
}

template <typename T>
T leaky_relu_grad(T pre) {
    return pre >= T(0) ? T(1) : T(kLeakySlope);
}

template <typename T>
T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// Cached intermediates of one forward pass, consumed by backward().
template <typename T>
struct Tape {
    Matrix<T> input;
    std::array<Matrix<T>, kNumLayers> pre;   // affine outputs z_k
    std::array<Matrix<T>, kNumLayers> post;  // act(z_k)

    const Matrix<T>& output() const { return post.back(); }
};

template <typename T>
struct Gradients {
    std::array<Matrix<T>, kNumLayers> dweight;
    std::array<std::vector<T>, kNumLayers> dbias;
    Matrix<T> dinput;  // empty unless requested from backward()
};

// z = x W^T + b for a batch of row vectors. Inner products accumulate in
// double with a fixed ascending-index order, so results are reproducible.
template <typename T>
Matrix<T> affine_forward(const Matrix<T>& w, std::span<const T> b, const Matrix<T>& x) {
    if (x.cols != w.cols || b.size() != w.rows) {
        throw std::invalid_argument("affine_forward: shape mismatch");
    }
    Matrix<T> z(x.rows, w.rows);
    for (std::size_t o = 0; o < w.rows; ++o) {
        const auto wrow = w.row(o);
        const double bias = double(b[o]);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const auto xrow = x.row(r);
            double acc = bias;
            for (std::size_t i = 0; i < wrow.size(); ++i) {
                acc += double(wrow[i]) * double(xrow[i]);
            }
            z(r, o) = T(acc);
        }
    }
    return z;
}

// Given dz = dL/dz for z = x W^T + b, accumulate dW = dz^T x and db (both
// summed over the batch) and, when dx is non-null, dX = dz W.
template <typename T>
void affine_backward(const Matrix<T>& w, const Matrix<T>& x, const Matrix<T>& dz,
                     Matrix<T>& dw, std::vector<T>& db, Matrix<T>* dx) {
    if (dz.rows != x.rows || dz.cols != w.rows || x.cols != w.cols) {
        throw std::invalid_argument("affine_backward: shape mismatch");
    }
    dw = Matrix<T>(w.rows, w.cols);
    db.assign(w.rows, T(0));
    if (dx) *dx = Matrix<T>(x.rows, x.cols);
    for (std::size_t o = 0; o < w.rows; ++o) {
        auto dwrow = dw.row(o);
        const auto wrow = w.row(o);
        double bias_acc = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            const T g = dz(r, o);
            bias_acc += double(g);
            const auto xrow = x.row(r);
            for (std::size_t i = 0; i < w.cols; ++i) dwrow[i] += g * xrow[i];
            if (dx) {
                auto dxrow = dx->row(r);
                for (std::size_t i = 0; i < w.cols; ++i) dxrow[i] += g * wrow[i];
            }
        }
        db[o] = T(bias_acc);
    }
}

// Full forward pass over a batch (rows are samples).
template <typename T>
Tape<T> forward(const MlpT<T>& net, const Matrix<T>& batch) {
    if (batch.cols != net.spec.input_dim()) {
        throw std::invalid_argument("forward: batch width " + std::to_string(batch.cols) +
                                    " does not match input dim " +
                                    std::to_string(net.spec.input_dim()));
    }
    for (T v : batch.data) {
        if (!std::isfinite(v)) throw NumericError("forward: non-finite input");
    }
    Tape<T> tape;
    tape.input = batch;
    const Matrix<T>* h = &tape.input;
    for (std::size_t k = 0; k < kNumLayers; ++k) {
        tape.pre[k] = affine_forward(net.layers[k].weight, std::span<const T>(net.layers[k].bias), *h);
        const Matrix<T>& z = tape.pre[k];
        Matrix<T>& out = tape.post[k];
        out = Matrix<T>(z.rows, z.cols);
        if (k + 1 < kNumLayers) {
            for (std::size_t i = 0; i < z.size(); ++i) out.data[i] = leaky_relu(z.data[i]);
        } else if (net.spec.output_activation == Activation::Tanh) {
            for (std::size_t i = 0; i < z.size(); ++i) out.data[i] = std::tanh(z.data[i]);
        } else {
            for (std::size_t i = 0; i < z.size(); ++i) out.data[i] = sigmoid(z.data[i]);
        }
        h = &out;
    }
    return tape;
}

// Reverse-mode gradients of the composed function recorded on `tape`, given
// upstream = dL/d(output). Weight and bias gradients sum over the batch; any
// mean factor belongs to the upstream gradient. Set with_input_grad to also
// get dL/d(input), needed to chain through a discriminator into a generator.
template <typename T>
Gradients<T> backward(const MlpT<T>& net, const Tape<T>& tape, const Matrix<T>& upstream,
                      bool with_input_grad = false) {
    const Matrix<T>& out = tape.output();
    if (upstream.rows != out.rows || upstream.cols != out.cols) {
        throw std::invalid_argument("backward: upstream gradient shape mismatch");
    }
    Gradients<T> grads;
    Matrix<T> g = upstream;  // dL/d(post_k)
    for (std::size_t ki = kNumLayers; ki-- > 0;) {
        const Matrix<T>& z = tape.pre[ki];
        const Matrix<T>& h = tape.post[ki];
        Matrix<T> dz(z.rows, z.cols);
        if (ki + 1 < kNumLayers) {
            for (std::size_t i = 0; i < z.size(); ++i) {
                dz.data[i] = g.data[i] * leaky_relu_grad(z.data[i]);
            }
        } else if (net.spec.output_activation == Activation::Tanh) {
            for (std::size_t i = 0; i < z.size(); ++i) {
                dz.data[i] = g.data[i] * (T(1) - h.data[i] * h.data[i]);
            }
        } else {
            for (std::size_t i = 0; i < z.size(); ++i) {
                dz.data[i] = g.data[i] * h.data[i] * (T(1) - h.data[i]);
            }
        }
        const Matrix<T>& xin = (ki == 0) ? tape.input : tape.post[ki - 1];
        const bool need_dx = ki > 0 || with_input_grad;
        Matrix<T> dx;
        affine_backward(net.layers[ki].weight, xin, dz, grads.dweight[ki], grads.dbias[ki],
                        need_dx ? &dx : nullptr);
        g = std::move(dx);
    }
    if (with_input_grad) grads.dinput = std::move(g);
    return grads;
}

// Elementwise sum of two gradient sets of identical shape.
template <typename T>
void add_gradients(Gradients<T>& into, const Gradients<T>& other) {
    for (std::size_t k = 0; k < kNumLayers; ++k) {
        for (std::size_t i = 0; i < into.dweight[k].size(); ++i) {
            into.dweight[k].data[i] += other.dweight[k].data[i];
        }
        for (std::size_t i = 0; i < into.dbias[k].size(); ++i) {
            into.dbias[k][i] += other.dbias[k][i];
        }
    }
}

inline constexpr double kBceClampLo = 1e-7;
inline constexpr double kBceClampHi = 1.0 - 1e-7;

template <typename T>
struct BceResult {
    T loss;
    Matrix<T> grad;  // dL/d(predictions), mean factor included
};

// Mean binary cross-entropy. Predictions are clamped to [1e-7, 1 - 1e-7]
// before the logs; the gradient is (p - y) / (p (1 - p) N) per element.
template <typename T>
BceResult<T> bce(const Matrix<T>& predictions, const Matrix<T>& targets) {
    if (predictions.size() == 0) throw std::invalid_argument("bce: empty batch");
    if (predictions.rows != targets.rows || predictions.cols != targets.cols) {
        throw std::invalid_argument("bce: predictions/targets shape mismatch");
    }
    const double n = double(predictions.size());
    double loss_acc = 0.0;
    BceResult<T> result{T(0), Matrix<T>(predictions.rows, predictions.cols)};
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = std::clamp(double(predictions.data[i]), kBceClampLo, kBceClampHi);
        const double y = double(targets.data[i]);
        loss_acc -= y * std::log(p) + (1.0 - y) * std::log1p(-p);
        result.grad.data[i] = T((p - y) / (p * (1.0 - p) * n));
    }
    result.loss = T(loss_acc / n);
    return result;
}

// Flattened float32 view of a full (generator, discriminator) pair.
using ParamVector = std::vector<float>;

namespace detail {

inline void flatten_net_into(const Mlp& net, float*& out) {
    for (const auto& layer : net.layers) {
        out = std::copy(layer.weight.data.begin(), layer.weight.data.end(), out);
        out = std::copy(layer.bias.begin(), layer.bias.end(), out);
    }
}

inline Mlp unflatten_net(const MlpSpec& spec, const float*& in) {
    Mlp net{spec, {}};
    for (std::size_t k = 0; k < kNumLayers; ++k) {
        const std::size_t rows = spec.layer_dims[k + 1];
        const std::size_t cols = spec.layer_dims[k];
        auto& layer = net.layers[k];
        layer.weight = Matrix<float>(rows, cols);
        std::copy(in, in + rows * cols, layer.weight.data.begin());
        in += rows * cols;
        layer.bias.assign(in, in + rows);
        in += rows;
    }
    return net;
}

}  // namespace detail

// Canonical flattening: generator layers then discriminator layers; within a
// layer, the weight matrix row-major (by output unit) then the bias.
inline ParamVector flatten(const Mlp& gen, const Mlp& disc) {
    ParamVector v(param_count(gen.spec, disc.spec));
    float* out = v.data();
    detail::flatten_net_into(gen, out);
    detail::flatten_net_into(disc, out);
    return v;
}

// Inverse of flatten. Rejects vectors whose length does not match the specs
// and non-finite payloads.
inline std::pair<Mlp, Mlp> unflatten(std::span<const float> v, const MlpSpec& gen_spec,
                                     const MlpSpec& disc_spec) {
    const std::uint64_t want = param_count(gen_spec, disc_spec);
    if (v.size() != want) {
        throw FormatError("unflatten: vector dim " + std::to_string(v.size()) +
                          " does not match spec param count " + std::to_string(want));
    }
    for (float x : v) {
        if (!std::isfinite(x)) throw NumericError("unflatten: non-finite parameter value");
    }
    const float* in = v.data();
    Mlp gen = detail::unflatten_net(gen_spec, in);
    Mlp disc = detail::unflatten_net(disc_spec, in);
    return {std::move(gen), std::move(disc)};
}

}  // namespace gangan
