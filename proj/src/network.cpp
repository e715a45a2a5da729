#include "mixprune/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "mixprune/errors.hpp"

namespace mixprune {

namespace {

Shape infer_out_shape(const Layer& layer, const Shape& in, std::size_t position) {
    const auto fail = [&](const std::string& why) {
        return ShapeError(layer.id, fmt::format("layer {} ({}, position {}): {} (input {} , weight {})", layer.id,
                                                to_string(layer.role), position, why, shape_to_string(in),
                                                shape_to_string(layer.weight.shape())));
    };
    const Shape& w = layer.weight.shape();
    switch (layer.role) {
        case LayerRole::Dense:
        case LayerRole::ClassifierHead: {
            if (w.size() != 2) throw fail("dense weight must be [out, in]");
            if (shape_numel(in) != w[1]) throw fail("input features do not match weight columns");
            if (layer.bias && layer.bias->shape() != Shape{w[0]}) throw fail("bias must be [out]");
            return {w[0]};
        }
        case LayerRole::Conv2D: {
            if (w.size() != 4) throw fail("conv weight must be [out, in, kh, kw]");
            if (in.size() != 3 || in[0] != w[1]) throw fail("conv input must be [in, h, w]");
            const std::size_t h = in[1] + 2 * layer.padding;
            const std::size_t wd = in[2] + 2 * layer.padding;
            if (h < w[2] || wd < w[3]) throw fail("kernel larger than padded input");
            if (layer.bias && layer.bias->shape() != Shape{w[0]}) throw fail("bias must be [out]");
            return {w[0], h - w[2] + 1, wd - w[3] + 1};
        }
        case LayerRole::PatchEmbedding: {
            const std::size_t p = layer.patch_size;
            if (w.size() != 2) throw fail("patch embedding weight must be [embed, c*p*p]");
            if (in.size() != 3 || p == 0 || in[1] % p != 0 || in[2] % p != 0)
                throw fail("patch embedding input must be [c, h, w] divisible by the patch size");
            if (w[1] != in[0] * p * p) throw fail("weight columns must equal c*p*p");
            if (layer.bias && layer.bias->shape() != Shape{w[0]}) throw fail("bias must be [embed]");
            return {(in[1] / p) * (in[2] / p) * w[0]};
        }
        case LayerRole::Normalization: {
            const std::size_t features = in.size() == 3 ? in[0] : shape_numel(in);
            if (w != Shape{features}) throw fail("normalization weight must be [features]");
            if (!layer.bias || layer.bias->shape() != w) throw fail("normalization needs a shift of [features]");
            if (layer.running_mean.shape() != w || layer.running_var.shape() != w)
                throw fail("running statistics must be [features]");
            return in;
        }
    }
    throw fail("unknown role");
}

// Elements per feature for normalization: spatial size for [c,h,w], else 1.
std::size_t norm_inner(const Shape& in) { return in.size() == 3 ? in[1] * in[2] : 1; }

struct Dims {
    std::size_t batch;
    std::size_t in;
    std::size_t out;
};

void dense_forward(const Layer& l, const float* x, float* y, Dims d) {
    const float* w = l.weight.data();
    const float* b = l.bias ? l.bias->data() : nullptr;
    for (std::size_t n = 0; n < d.batch; ++n) {
        const float* xr = x + n * d.in;
        for (std::size_t o = 0; o < d.out; ++o) {
            const float* wr = w + o * d.in;
            double acc = b ? b[o] : 0.0;
            for (std::size_t i = 0; i < d.in; ++i) acc += static_cast<double>(wr[i]) * xr[i];
            y[n * d.out + o] = static_cast<float>(acc);
        }
    }
}

void conv_forward(const Layer& l, const Shape& in, const Shape& out, const float* x, float* y, std::size_t batch) {
    const std::size_t c_in = in[0], h_in = in[1], w_in = in[2];
    const std::size_t c_out = out[0], h_out = out[1], w_out = out[2];
    const std::size_t kh = l.weight.dim(2), kw = l.weight.dim(3);
    const auto pad = static_cast<std::ptrdiff_t>(l.padding);
    const float* w = l.weight.data();
    const float* b = l.bias ? l.bias->data() : nullptr;
    std::vector<double> acc(h_out * w_out);
    for (std::size_t n = 0; n < batch; ++n) {
        const float* xs = x + n * c_in * h_in * w_in;
        float* ys = y + n * c_out * h_out * w_out;
        for (std::size_t o = 0; o < c_out; ++o) {
            std::fill(acc.begin(), acc.end(), b ? b[o] : 0.0);
            for (std::size_t c = 0; c < c_in; ++c) {
                const float* plane = xs + c * h_in * w_in;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const double wv = w[((o * c_in + c) * kh + ky) * kw + kx];
                        for (std::size_t oy = 0; oy < h_out; ++oy) {
                            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - pad;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h_in)) continue;
                            const float* row = plane + iy * w_in;
                            double* arow = acc.data() + oy * w_out;
                            for (std::size_t ox = 0; ox < w_out; ++ox) {
                                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - pad;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w_in)) continue;
                                arow[ox] += wv * row[ix];
                            }
                        }
                    }
                }
            }
            for (std::size_t i = 0; i < h_out * w_out; ++i) ys[o * h_out * w_out + i] = static_cast<float>(acc[i]);
        }
    }
}

// Gathers the patch vectors of one sample: [tokens, c*p*p].
void extract_patches(const Shape& in, std::size_t p, const float* x, float* patches) {
    const std::size_t c_in = in[0], h = in[1], w = in[2];
    const std::size_t ty = h / p, tx = w / p, feat = c_in * p * p;
    for (std::size_t py = 0; py < ty; ++py)
        for (std::size_t px = 0; px < tx; ++px) {
            float* dst = patches + (py * tx + px) * feat;
            for (std::size_t c = 0; c < c_in; ++c)
                for (std::size_t ky = 0; ky < p; ++ky)
                    for (std::size_t kx = 0; kx < p; ++kx)
                        dst[(c * p + ky) * p + kx] = x[(c * h + py * p + ky) * w + px * p + kx];
        }
}

void scatter_patches(const Shape& in, std::size_t p, const float* patches, float* x) {
    const std::size_t c_in = in[0], h = in[1], w = in[2];
    const std::size_t ty = h / p, tx = w / p, feat = c_in * p * p;
    for (std::size_t py = 0; py < ty; ++py)
        for (std::size_t px = 0; px < tx; ++px) {
            const float* src = patches + (py * tx + px) * feat;
            for (std::size_t c = 0; c < c_in; ++c)
                for (std::size_t ky = 0; ky < p; ++ky)
                    for (std::size_t kx = 0; kx < p; ++kx)
                        x[(c * h + py * p + ky) * w + px * p + kx] = src[(c * p + ky) * p + kx];
        }
}

void norm_forward(const Layer& l, const Shape& in, const float* x, float* y, std::size_t batch) {
    const std::size_t features = l.weight.size();
    const std::size_t inner = norm_inner(in);
    for (std::size_t f = 0; f < features; ++f) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(l.running_var[f]) + l.norm_eps);
        const double scale = l.weight[f] * inv;
        const double shift = l.bias->values()[f] - l.running_mean[f] * scale;
        for (std::size_t n = 0; n < batch; ++n) {
            const std::size_t base = (n * features + f) * inner;
            for (std::size_t i = 0; i < inner; ++i) y[base + i] = static_cast<float>(x[base + i] * scale + shift);
        }
    }
}

void check_input(const Network& net, const Tensor& inputs) {
    if (net.layer_count() == 0) throw ShapeError(0, "network has no layers");
    if (inputs.rank() < 1 || inputs.dim(0) == 0) throw ShapeError(net.layer(0).id, "empty input batch");
    const std::size_t per_sample = inputs.size() / inputs.dim(0);
    if (per_sample != net.input_features()) {
        throw ShapeError(net.layer(0).id, fmt::format("layer {} ({}) expects {} input features per sample, batch {} has {}",
                                                      net.layer(0).id, to_string(net.layer(0).role),
                                                      net.input_features(), shape_to_string(inputs.shape()),
                                                      per_sample));
    }
}

// acts[0] is the input, acts[i + 1] the post-activation output of layer i.
std::vector<std::vector<float>> run_forward(const Network& net, const Tensor& inputs) {
    check_input(net, inputs);
    const std::size_t batch = inputs.dim(0);
    std::vector<std::vector<float>> acts;
    acts.reserve(net.layer_count() + 1);
    acts.emplace_back(inputs.values().begin(), inputs.values().end());
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& l = net.layer(i);
        const Shape& in = net.in_shape(i);
        const Shape& out = net.out_shape(i);
        const std::size_t out_n = shape_numel(out);
        std::vector<float> y(batch * out_n);
        const float* x = acts.back().data();
        switch (l.role) {
            case LayerRole::Dense:
            case LayerRole::ClassifierHead:
                dense_forward(l, x, y.data(), {batch, shape_numel(in), out_n});
                break;
            case LayerRole::Conv2D:
                conv_forward(l, in, out, x, y.data(), batch);
                break;
            case LayerRole::PatchEmbedding: {
                const std::size_t tokens = out_n / l.weight.dim(0);
                const std::size_t feat = l.weight.dim(1);
                std::vector<float> patches(batch * tokens * feat);
                for (std::size_t n = 0; n < batch; ++n)
                    extract_patches(in, l.patch_size, x + n * shape_numel(in), patches.data() + n * tokens * feat);
                dense_forward(l, patches.data(), y.data(), {batch * tokens, feat, l.weight.dim(0)});
                break;
            }
            case LayerRole::Normalization:
                norm_forward(l, in, x, y.data(), batch);
                break;
        }
        if (l.activation == Activation::ReLU) {
            for (float& v : y) v = v > 0.0f ? v : 0.0f;
        }
        acts.push_back(std::move(y));
    }
    return acts;
}

// Per-sample weight-gradient sums are accumulated in double and divided by
// the batch size once at the end.
struct LayerGrad {
    std::vector<double> w;
    std::vector<double> b;
};

void dense_backward(const Layer& l, const float* x, const float* dy, float* dx, LayerGrad& g, Dims d) {
    const float* w = l.weight.data();
    for (std::size_t n = 0; n < d.batch; ++n) {
        const float* xr = x + n * d.in;
        const float* dyr = dy + n * d.out;
        for (std::size_t o = 0; o < d.out; ++o) {
            const double go = dyr[o];
            if (go == 0.0) continue;
            double* gw = g.w.data() + o * d.in;
            for (std::size_t i = 0; i < d.in; ++i) gw[i] += go * xr[i];
            if (!g.b.empty()) g.b[o] += go;
        }
    }
    if (!dx) return;
    std::vector<double> acc(d.in);
    for (std::size_t n = 0; n < d.batch; ++n) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* dyr = dy + n * d.out;
        for (std::size_t o = 0; o < d.out; ++o) {
            const double go = dyr[o];
            if (go == 0.0) continue;
            const float* wr = w + o * d.in;
            for (std::size_t i = 0; i < d.in; ++i) acc[i] += go * wr[i];
        }
        for (std::size_t i = 0; i < d.in; ++i) dx[n * d.in + i] = static_cast<float>(acc[i]);
    }
}

void conv_backward(const Layer& l, const Shape& in, const Shape& out, const float* x, const float* dy, float* dx,
                   LayerGrad& g, std::size_t batch) {
    const std::size_t c_in = in[0], h_in = in[1], w_in = in[2];
    const std::size_t c_out = out[0], h_out = out[1], w_out = out[2];
    const std::size_t kh = l.weight.dim(2), kw = l.weight.dim(3);
    const auto pad = static_cast<std::ptrdiff_t>(l.padding);
    const float* w = l.weight.data();
    std::vector<double> dxacc(dx ? c_in * h_in * w_in : 0);
    for (std::size_t n = 0; n < batch; ++n) {
        const float* xs = x + n * c_in * h_in * w_in;
        const float* dys = dy + n * c_out * h_out * w_out;
        std::fill(dxacc.begin(), dxacc.end(), 0.0);
        for (std::size_t o = 0; o < c_out; ++o) {
            const float* dplane = dys + o * h_out * w_out;
            if (!g.b.empty()) {
                double s = 0.0;
                for (std::size_t i = 0; i < h_out * w_out; ++i) s += dplane[i];
                g.b[o] += s;
            }
            for (std::size_t c = 0; c < c_in; ++c) {
                const float* plane = xs + c * h_in * w_in;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::size_t widx = ((o * c_in + c) * kh + ky) * kw + kx;
                        const double wv = w[widx];
                        double gacc = 0.0;
                        for (std::size_t oy = 0; oy < h_out; ++oy) {
                            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - pad;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h_in)) continue;
                            const float* row = plane + iy * w_in;
                            const float* drow = dplane + oy * w_out;
                            double* dxrow = dx ? dxacc.data() + (c * h_in + iy) * w_in : nullptr;
                            for (std::size_t ox = 0; ox < w_out; ++ox) {
                                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) - pad;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w_in)) continue;
                                gacc += static_cast<double>(drow[ox]) * row[ix];
                                if (dxrow) dxrow[ix] += wv * drow[ox];
                            }
                        }
                        g.w[widx] += gacc;
                    }
                }
            }
        }
        if (dx) {
            float* dxs = dx + n * c_in * h_in * w_in;
            for (std::size_t i = 0; i < dxacc.size(); ++i) dxs[i] = static_cast<float>(dxacc[i]);
        }
    }
}

void norm_backward(const Layer& l, const Shape& in, const float* x, const float* dy, float* dx, LayerGrad& g,
                   std::size_t batch) {
    const std::size_t features = l.weight.size();
    const std::size_t inner = norm_inner(in);
    for (std::size_t f = 0; f < features; ++f) {
        const double mean = l.running_mean[f];
        const double inv = 1.0 / std::sqrt(static_cast<double>(l.running_var[f]) + l.norm_eps);
        const double gamma = l.weight[f];
        for (std::size_t n = 0; n < batch; ++n) {
            const std::size_t base = (n * features + f) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
                const double d = dy[base + i];
                g.w[f] += d * (x[base + i] - mean) * inv;
                g.b[f] += d;
                if (dx) dx[base + i] = static_cast<float>(d * gamma * inv);
            }
        }
    }
}

double softmax_xent(const float* logits, std::size_t classes, std::int32_t label, float* dlogits) {
    const float mx = *std::max_element(logits, logits + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(static_cast<double>(logits[c]) - mx);
    const double log_z = std::log(sum) + mx;
    if (dlogits) {
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(static_cast<double>(logits[c]) - log_z);
            dlogits[c] = static_cast<float>(p - (static_cast<std::int32_t>(c) == label ? 1.0 : 0.0));
        }
    }
    return log_z - logits[label];
}

void check_labels(std::span<const std::int32_t> labels, std::size_t batch, std::size_t classes) {
    if (labels.size() != batch) {
        throw InputError(fmt::format("{} labels for a batch of {}", labels.size(), batch));
    }
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= classes) {
            throw InputError(fmt::format("label {} at row {} outside [0, {})", labels[n], n, classes));
        }
    }
}

}  // namespace

Network::Network(Shape input_shape, std::size_t classes, std::vector<Layer> layers)
    : input_shape_(std::move(input_shape)), classes_(classes), layers_(std::move(layers)) {
    if (shape_numel(input_shape_) == 0 || input_shape_.empty()) throw ShapeError(0, "network input shape is empty");
    if (classes_ == 0) throw ShapeError(0, "network needs at least one class");
    std::size_t prunable = 0;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].id = static_cast<int>(i + 1);
        if (layers_[i].prunable()) ++prunable;
    }
    std::size_t seen = 0;
    double last_depth = 0.0;
    for (Layer& l : layers_) {
        if (l.prunable()) {
            last_depth = prunable > 1 ? static_cast<double>(seen) / static_cast<double>(prunable - 1) : 0.0;
            ++seen;
        }
        l.depth_fraction = last_depth;
    }
    Shape current = input_shape_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        in_shapes_.push_back(current);
        current = infer_out_shape(layers_[i], current, i);
        out_shapes_.push_back(current);
    }
    if (!layers_.empty() && shape_numel(current) != classes_) {
        throw ShapeError(layers_.back().id, fmt::format("last layer emits {} values, network declares {} classes",
                                                        shape_numel(current), classes_));
    }
}

std::size_t Network::prunable_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(layers_.begin(), layers_.end(), [](const Layer& l) { return l.prunable(); }));
}

Tensor forward(const Network& net, const Tensor& inputs) {
    auto acts = run_forward(net, inputs);
    return Tensor({inputs.dim(0), net.classes()}, std::move(acts.back()));
}

std::vector<Tensor> forward_trace(const Network& net, const Tensor& inputs) {
    auto acts = run_forward(net, inputs);
    const std::size_t batch = inputs.dim(0);
    std::vector<Tensor> out;
    out.reserve(acts.size());
    for (std::size_t i = 0; i < acts.size(); ++i) {
        Shape shape{batch};
        const Shape& per = i < net.layer_count() ? net.in_shape(i) : Shape{net.classes()};
        shape.insert(shape.end(), per.begin(), per.end());
        out.emplace_back(std::move(shape), std::move(acts[i]));
    }
    return out;
}

double cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels) {
    if (logits.rank() != 2) throw ShapeError(0, "logits must be [batch, classes]");
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    check_labels(labels, batch, classes);
    double total = 0.0;
    for (std::size_t n = 0; n < batch; ++n) total += softmax_xent(logits.data() + n * classes, classes, labels[n], nullptr);
    return total / static_cast<double>(batch);
}

LossAndGradients loss_and_gradients(const Network& net, const Tensor& inputs, std::span<const std::int32_t> labels) {
    check_input(net, inputs);
    const std::size_t batch = inputs.dim(0);
    check_labels(labels, batch, net.classes());
    auto acts = run_forward(net, inputs);

    LossAndGradients result;
    const std::size_t classes = net.classes();
    std::vector<float> delta(batch * classes);
    double total = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
        total += softmax_xent(acts.back().data() + n * classes, classes, labels[n], delta.data() + n * classes);
    }
    result.loss = total / static_cast<double>(batch);

    const std::size_t count = net.layer_count();
    result.grads.weight.resize(count);
    result.grads.bias.resize(count);
    for (std::size_t i = count; i-- > 0;) {
        const Layer& l = net.layer(i);
        const Shape& in = net.in_shape(i);
        const Shape& out = net.out_shape(i);
        const float* x = acts[i].data();
        if (l.activation == Activation::ReLU) {
            const auto& y = acts[i + 1];
            for (std::size_t k = 0; k < delta.size(); ++k)
                if (!(y[k] > 0.0f)) delta[k] = 0.0f;
        }
        LayerGrad g;
        g.w.assign(l.weight.size(), 0.0);
        if (l.bias) g.b.assign(l.bias->size(), 0.0);
        std::vector<float> dx(i > 0 ? batch * shape_numel(in) : 0);
        float* dxp = i > 0 ? dx.data() : nullptr;
        switch (l.role) {
            case LayerRole::Dense:
            case LayerRole::ClassifierHead:
                dense_backward(l, x, delta.data(), dxp, g, {batch, shape_numel(in), shape_numel(out)});
                break;
            case LayerRole::Conv2D:
                conv_backward(l, in, out, x, delta.data(), dxp, g, batch);
                break;
            case LayerRole::PatchEmbedding: {
                const std::size_t embed = l.weight.dim(0), feat = l.weight.dim(1);
                const std::size_t tokens = shape_numel(out) / embed;
                std::vector<float> patches(batch * tokens * feat);
                for (std::size_t n = 0; n < batch; ++n)
                    extract_patches(in, l.patch_size, x + n * shape_numel(in), patches.data() + n * tokens * feat);
                std::vector<float> dpatches(dxp ? patches.size() : 0);
                dense_backward(l, patches.data(), delta.data(), dxp ? dpatches.data() : nullptr, g,
                               {batch * tokens, feat, embed});
                if (dxp) {
                    for (std::size_t n = 0; n < batch; ++n)
                        scatter_patches(in, l.patch_size, dpatches.data() + n * tokens * feat, dxp + n * shape_numel(in));
                }
                break;
            }
            case LayerRole::Normalization:
                norm_backward(l, in, x, delta.data(), dxp, g, batch);
                break;
        }
        const double scale = 1.0 / static_cast<double>(batch);
        std::vector<float> gw(g.w.size());
        for (std::size_t k = 0; k < gw.size(); ++k) gw[k] = static_cast<float>(g.w[k] * scale);
        result.grads.weight[i] = Tensor(l.weight.shape(), std::move(gw));
        if (l.bias) {
            std::vector<float> gb(g.b.size());
            for (std::size_t k = 0; k < gb.size(); ++k) gb[k] = static_cast<float>(g.b[k] * scale);
            result.grads.bias[i] = Tensor(l.bias->shape(), std::move(gb));
        }
        delta = std::move(dx);
    }
    return result;
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
    if (t.rank() < 1 || begin > end || end > t.dim(0)) throw ShapeError(0, "row slice out of range");
    const std::size_t row = t.dim(0) ? t.size() / t.dim(0) : 0;
    Shape shape = t.shape();
    shape[0] = end - begin;
    std::vector<float> data(t.values().begin() + static_cast<std::ptrdiff_t>(begin * row),
                            t.values().begin() + static_cast<std::ptrdiff_t>(end * row));
    return Tensor(std::move(shape), std::move(data));
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows) {
    if (t.rank() < 1) throw ShapeError(0, "cannot gather rows of a scalar");
    const std::size_t row = t.dim(0) ? t.size() / t.dim(0) : 0;
    Shape shape = t.shape();
    shape[0] = rows.size();
    std::vector<float> data(rows.size() * row);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] >= t.dim(0)) throw ShapeError(0, "row index out of range");
        std::copy_n(t.data() + rows[k] * row, row, data.data() + k * row);
    }
    return Tensor(std::move(shape), std::move(data));
}

void init_weights(Network& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (Layer& l : net.layers()) {
        if (l.role == LayerRole::Normalization) {
            std::fill(l.weight.values().begin(), l.weight.values().end(), 1.0f);
            std::fill(l.bias->values().begin(), l.bias->values().end(), 0.0f);
            std::fill(l.running_mean.values().begin(), l.running_mean.values().end(), 0.0f);
            std::fill(l.running_var.values().begin(), l.running_var.values().end(), 1.0f);
            continue;
        }
        const Shape& s = l.weight.shape();
        const std::size_t receptive = s.size() == 4 ? s[2] * s[3] : 1;
        const double fan_in = static_cast<double>(s[1] * receptive);
        const double fan_out = static_cast<double>(s[0] * receptive);
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-a, a);
        for (float& w : l.weight.values()) w = static_cast<float>(dist(rng));
        if (l.bias) std::fill(l.bias->values().begin(), l.bias->values().end(), 0.0f);
    }
}

}  // namespace mixprune
