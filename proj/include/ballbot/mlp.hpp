#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ballbot/errors.hpp"
#include "ballbot/rng.hpp"

namespace ballbot::ddpg {

inline constexpr double kLayerNormEps = 1e-5;

enum class Activation { kIdentity, kTanh };

// Fully connected network with optional per-layer normalization applied to
// the pre-activations. Parameters live in one flat vector so the optimizer,
// target-network blending and checkpointing can treat them uniformly.
//
// Per-layer parameter layout: W (out x in, row-major), b (out), and when the
// layer is normalized, gain (out) then offset (out).
class Mlp {
  public:
    struct Layer {
        int in = 0;
        int out = 0;
        bool layer_norm = false;
        Activation act = Activation::kIdentity;
        std::size_t w_off = 0;
        std::size_t b_off = 0;
        std::size_t gain_off = 0;
        std::size_t offset_off = 0;
    };

    // Cached intermediates of one forward pass, needed for backprop.
    struct Cache {
        std::vector<std::vector<double>> inputs;   // per layer
        std::vector<std::vector<double>> zhat;     // normalized pre-activation
        std::vector<double> inv_std;               // per layer
        std::vector<std::vector<double>> outputs;  // post-activation
    };

    Mlp() = default;

    // sizes = {input, hidden..., output}. Hidden layers get layer norm (when
    // requested) and hidden_act; the output layer is plain with out_act.
    Mlp(const std::vector<int>& sizes, bool hidden_layer_norm, Activation hidden_act,
        Activation out_act) {
        if (sizes.size() < 2) throw ShapeMismatch("Mlp needs at least input and output sizes");
        std::size_t off = 0;
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
            if (sizes[i] <= 0 || sizes[i + 1] <= 0) throw ShapeMismatch("layer sizes must be positive");
            Layer l;
            l.in = sizes[i];
            l.out = sizes[i + 1];
            const bool last = i + 2 == sizes.size();
            l.layer_norm = !last && hidden_layer_norm;
            l.act = last ? out_act : hidden_act;
            l.w_off = off;
            off += static_cast<std::size_t>(l.in) * l.out;
            l.b_off = off;
            off += l.out;
            if (l.layer_norm) {
                l.gain_off = off;
                off += l.out;
                l.offset_off = off;
                off += l.out;
            }
            layers_.push_back(l);
        }
        params_.assign(off, 0.0);
        // normalization starts as identity
        for (const Layer& l : layers_)
            if (l.layer_norm)
                for (int j = 0; j < l.out; ++j) params_[l.gain_off + j] = 1.0;
    }

    int input_dim() const { return layers_.front().in; }
    int output_dim() const { return layers_.back().out; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Uniform fan-in initialization for weights and biases; normalization
    // gains stay 1 and offsets 0.
    void init_uniform_fanin(Rng& rng) {
        for (const Layer& l : layers_) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
            for (int j = 0; j < l.out * l.in; ++j) params_[l.w_off + j] = rng.uniform(-bound, bound);
            for (int j = 0; j < l.out; ++j) params_[l.b_off + j] = rng.uniform(-bound, bound);
            if (l.layer_norm) {
                for (int j = 0; j < l.out; ++j) params_[l.gain_off + j] = 1.0;
                for (int j = 0; j < l.out; ++j) params_[l.offset_off + j] = 0.0;
            }
        }
    }

    // Shrinks the final layer so the initial output is near zero.
    void scale_output_layer(double factor) {
        const Layer& l = layers_.back();
        for (int j = 0; j < l.out * l.in; ++j) params_[l.w_off + j] *= factor;
        for (int j = 0; j < l.out; ++j) params_[l.b_off + j] *= factor;
    }

    std::vector<double> forward(const std::vector<double>& x) const {
        return forward_impl(x, nullptr);
    }

    std::vector<double> forward_cached(const std::vector<double>& x, Cache& cache) const {
        cache.inputs.assign(layers_.size(), {});
        cache.zhat.assign(layers_.size(), {});
        cache.inv_std.assign(layers_.size(), 0.0);
        cache.outputs.assign(layers_.size(), {});
        return forward_impl(x, &cache);
    }

    // Backpropagation from dL/d(output). Parameter gradients are accumulated
    // into `grad` (same layout as params) when non-null; the returned value
    // is dL/d(input) when `dx` is non-null, otherwise empty.
    void backward(const Cache& cache, const std::vector<double>& dout, std::vector<double>* grad,
                  std::vector<double>* dx) const {
        if (static_cast<int>(dout.size()) != output_dim())
            throw ShapeMismatch("backward: gradient size " + std::to_string(dout.size()));
        std::vector<double> da = dout;
        for (std::size_t li = layers_.size(); li-- > 0;) {
            const Layer& l = layers_[li];
            const std::vector<double>& x = cache.inputs[li];
            const std::vector<double>& a = cache.outputs[li];
            std::vector<double> dh(l.out);
            for (int j = 0; j < l.out; ++j)
                dh[j] = (l.act == Activation::kTanh) ? da[j] * (1.0 - a[j] * a[j]) : da[j];

            std::vector<double> dz;
            if (l.layer_norm) {
                const std::vector<double>& zh = cache.zhat[li];
                const double inv = cache.inv_std[li];
                double mean_dzh = 0.0;
                double mean_dzh_zh = 0.0;
                std::vector<double> dzh(l.out);
                for (int j = 0; j < l.out; ++j) {
                    if (grad) {
                        (*grad)[l.gain_off + j] += dh[j] * zh[j];
                        (*grad)[l.offset_off + j] += dh[j];
                    }
                    dzh[j] = dh[j] * params_[l.gain_off + j];
                    mean_dzh += dzh[j];
                    mean_dzh_zh += dzh[j] * zh[j];
                }
                mean_dzh /= l.out;
                mean_dzh_zh /= l.out;
                dz.resize(l.out);
                for (int j = 0; j < l.out; ++j)
                    dz[j] = inv * (dzh[j] - mean_dzh - zh[j] * mean_dzh_zh);
            } else {
                dz = std::move(dh);
            }

            std::vector<double> dxl(l.in, 0.0);
            for (int j = 0; j < l.out; ++j) {
                const double* wrow = &params_[l.w_off + static_cast<std::size_t>(j) * l.in];
                if (grad) {
                    double* gw = &(*grad)[l.w_off + static_cast<std::size_t>(j) * l.in];
                    for (int i = 0; i < l.in; ++i) gw[i] += dz[j] * x[i];
                    (*grad)[l.b_off + j] += dz[j];
                }
                for (int i = 0; i < l.in; ++i) dxl[i] += wrow[i] * dz[j];
            }
            da = std::move(dxl);
        }
        if (dx) *dx = std::move(da);
    }

  private:
    std::vector<double> forward_impl(const std::vector<double>& x, Cache* cache) const {
        if (static_cast<int>(x.size()) != input_dim())
            throw ShapeMismatch("forward: input size " + std::to_string(x.size()) + ", expected " +
                                std::to_string(input_dim()));
        std::vector<double> cur = x;
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const Layer& l = layers_[li];
            if (cache) cache->inputs[li] = cur;
            std::vector<double> z(l.out);
            for (int j = 0; j < l.out; ++j) {
                const double* wrow = &params_[l.w_off + static_cast<std::size_t>(j) * l.in];
                double acc = params_[l.b_off + j];
                for (int i = 0; i < l.in; ++i) acc += wrow[i] * cur[i];
                z[j] = acc;
            }
            if (l.layer_norm) {
                double mean = 0.0;
                for (double v : z) mean += v;
                mean /= l.out;
                double var = 0.0;
                for (double v : z) var += (v - mean) * (v - mean);
                var /= l.out;
                // A single-unit layer normalizes to exactly zero; the offset
                // then carries the signal.
                const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
                for (int j = 0; j < l.out; ++j) {
                    const double zh = (z[j] - mean) * inv;
                    if (cache) {
                        if (cache->zhat[li].empty()) cache->zhat[li].resize(l.out);
                        cache->zhat[li][j] = zh;
                    }
                    z[j] = params_[l.gain_off + j] * zh + params_[l.offset_off + j];
                }
                if (cache) cache->inv_std[li] = inv;
            }
            if (l.act == Activation::kTanh)
                for (double& v : z) v = std::tanh(v);
            if (cache) cache->outputs[li] = z;
            cur = std::move(z);
        }
        return cur;
    }

    std::vector<Layer> layers_;
    std::vector<double> params_;
};

}  // namespace ballbot::ddpg
