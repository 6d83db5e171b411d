#ifndef TARC_NN_HPP_
#define TARC_NN_HPP_

#include <functional>
#include <vector>

#include "tarc/common.hpp"
#include "tarc/rng.hpp"

namespace tarc {

// Dense row-major matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

struct Linear {
    Matrix w;  // out x in
    Vec b;     // out

    Linear() = default;
    Linear(int out, int in) : w(out, in), b(out, 0.0) {}

    int in_dim() const { return w.cols; }
    int out_dim() const { return w.rows; }
};

Vec linear_forward(const Linear& layer, const Vec& x);

// d_out = dL/dy for y = Wx + b. Accumulates into grad, returns dL/dx.
Vec linear_backward(const Linear& layer, const Vec& x, const Vec& d_out, Linear& grad);

// Multilayer perceptron: tanh after every layer except optionally the last.
struct Mlp {
    std::vector<Linear> layers;
    bool tanh_output = false;  // true for trunks that end in a hidden representation

    int in_dim() const { return layers.front().in_dim(); }
    int out_dim() const { return layers.back().out_dim(); }
};

Mlp make_mlp(const std::vector<int>& dims, bool tanh_output);

struct MlpCache {
    std::vector<Vec> inputs;  // inputs[k] = input to layer k; inputs.back() unused slot for output
    Vec output;
};

Vec mlp_forward(const Mlp& net, const Vec& x, MlpCache* cache = nullptr);

// Backpropagates d_out = dL/d(output); accumulates into grad (same shape as net).
// Returns dL/dx.
Vec mlp_backward(const Mlp& net, const MlpCache& cache, const Vec& d_out, Mlp& grad);

// Visits every parameter of a module in a fixed, deterministic order.
void for_each_param(Linear& layer, const std::function<void(double&)>& fn);
void for_each_param(Mlp& net, const std::function<void(double&)>& fn);
int param_count(const Mlp& net);

// Xavier-uniform init with an output scale on the final layer.
void init_mlp(Mlp& net, Rng& rng, double final_layer_scale = 1.0);
void init_linear(Linear& layer, Rng& rng, double scale = 1.0);

// Adam over a flat parameter view. The caller supplies matching flat
// parameter/gradient vectors (see flatten helpers on the policy side).
class Adam {
public:
    Adam(int n_params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(Vec& params, const Vec& grad);
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    Vec m_, v_;
};

}  // namespace tarc

#endif  // TARC_NN_HPP_
