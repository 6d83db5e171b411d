#include "tarc/nn.hpp"

#include <cmath>

namespace tarc {

Vec linear_forward(const Linear& layer, const Vec& x) {
    const int out = layer.out_dim();
    const int in = layer.in_dim();
    Vec y(out);
    for (int r = 0; r < out; ++r) {
        double acc = layer.b[r];
        const double* wrow = &layer.w.data[static_cast<size_t>(r) * in];
        for (int c = 0; c < in; ++c) acc += wrow[c] * x[c];
        y[r] = acc;
    }
    return y;
}

Vec linear_backward(const Linear& layer, const Vec& x, const Vec& d_out, Linear& grad) {
    const int out = layer.out_dim();
    const int in = layer.in_dim();
    Vec d_x(in, 0.0);
    for (int r = 0; r < out; ++r) {
        const double g = d_out[r];
        grad.b[r] += g;
        const double* wrow = &layer.w.data[static_cast<size_t>(r) * in];
        double* gwrow = &grad.w.data[static_cast<size_t>(r) * in];
        for (int c = 0; c < in; ++c) {
            gwrow[c] += g * x[c];
            d_x[c] += g * wrow[c];
        }
    }
    return d_x;
}

Mlp make_mlp(const std::vector<int>& dims, bool tanh_output) {
    Mlp net;
    net.tanh_output = tanh_output;
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        net.layers.emplace_back(dims[k + 1], dims[k]);
    }
    return net;
}

Vec mlp_forward(const Mlp& net, const Vec& x, MlpCache* cache) {
    if (static_cast<int>(x.size()) != net.in_dim()) {
        throw std::invalid_argument("mlp_forward: input size mismatch");
    }
    if (cache) {
        cache->inputs.clear();
        cache->inputs.reserve(net.layers.size());
    }
    Vec h = x;
    const size_t n = net.layers.size();
    for (size_t k = 0; k < n; ++k) {
        if (cache) cache->inputs.push_back(h);
        h = linear_forward(net.layers[k], h);
        const bool activate = (k + 1 < n) || net.tanh_output;
        if (activate) {
            for (double& v : h) v = std::tanh(v);
        }
    }
    if (cache) cache->output = h;
    return h;
}

Vec mlp_backward(const Mlp& net, const MlpCache& cache, const Vec& d_out, Mlp& grad) {
    const size_t n = net.layers.size();
    Vec d = d_out;
    for (size_t k = n; k-- > 0;) {
        const bool activate = (k + 1 < n) || net.tanh_output;
        if (activate) {
            // Activation output for layer k: for the last layer it is
            // cache.output, otherwise the input stored for layer k+1.
            const Vec& act = (k + 1 == n) ? cache.output : cache.inputs[k + 1];
            for (size_t j = 0; j < d.size(); ++j) {
                d[j] *= 1.0 - act[j] * act[j];
            }
        }
        d = linear_backward(net.layers[k], cache.inputs[k], d, grad.layers[k]);
    }
    return d;
}

void for_each_param(Linear& layer, const std::function<void(double&)>& fn) {
    for (double& p : layer.w.data) fn(p);
    for (double& p : layer.b) fn(p);
}

void for_each_param(Mlp& net, const std::function<void(double&)>& fn) {
    for (Linear& layer : net.layers) for_each_param(layer, fn);
}

int param_count(const Mlp& net) {
    int n = 0;
    for (const Linear& layer : net.layers) {
        n += static_cast<int>(layer.w.data.size() + layer.b.size());
    }
    return n;
}

void init_linear(Linear& layer, Rng& rng, double scale) {
    const double limit = std::sqrt(6.0 / (layer.in_dim() + layer.out_dim()));
    for (double& w : layer.w.data) w = scale * rng.uniform(-limit, limit);
    for (double& b : layer.b) b = 0.0;
}

void init_mlp(Mlp& net, Rng& rng, double final_layer_scale) {
    for (size_t k = 0; k < net.layers.size(); ++k) {
        const bool last = (k + 1 == net.layers.size());
        init_linear(net.layers[k], rng, last ? final_layer_scale : 1.0);
    }
}

Adam::Adam(int n_params, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(n_params, 0.0),
      v_(n_params, 0.0) {}

void Adam::step(Vec& params, const Vec& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw std::invalid_argument("Adam::step: size mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t j = 0; j < params.size(); ++j) {
        m_[j] = beta1_ * m_[j] + (1.0 - beta1_) * grad[j];
        v_[j] = beta2_ * v_[j] + (1.0 - beta2_) * grad[j] * grad[j];
        const double mhat = m_[j] / bc1;
        const double vhat = v_[j] / bc2;
        params[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

}  // namespace tarc
