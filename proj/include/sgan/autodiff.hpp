#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgan/tensor.hpp"

namespace sgan::ad {

// Closed op catalogue. Feature dims are validated at build time; batch
// (row) dims are dynamic and checked during evaluation.
enum class Op {
    input,
    param,
    matmul,
    add_bias,
    tanh_fn,
    leaky_relu,
    sigmoid,
    log_fn,
    mean,
    sum,
    scalar_affine,
    batchnorm,
};

struct Node {
    Op op = Op::input;
    int in0 = -1;
    int in1 = -1;
    double p0 = 0.0;  // leaky slope | batchnorm eps | affine scale | log lower clamp
    double p1 = 0.0;  // affine shift | log upper clamp
    std::string name;  // input/param leaves only
    int rows = -1;     // -1 = dynamic (batch dimension)
    int cols = 0;
};

class Graph {
public:
    int input(const std::string& name, int cols);
    int param(const std::string& name, int rows, int cols);

    int matmul(int a, int b);
    int add_bias(int x, int bias);
    int tanh(int x);
    int leaky_relu(int x, double slope);
    int sigmoid(int x);
    // y = log(clamp(x, lo, hi)); gradient is 1/x inside the clamp window, 0 outside.
    int log(int x, double lo = 1e-7, double hi = 1.0);
    // Unclamped log; evaluation fails on non-positive input.
    int log_raw(int x);
    int mean(int x);
    int sum(int x);
    int scalar_affine(int x, double scale, double shift);
    // Per-column normalization with current-batch statistics (biased variance),
    // no learnable affine. Used identically during training and sampling.
    int batchnorm(int x, double eps = 1e-5);

    void mark_output(const std::string& name, int node);
    int output(const std::string& name) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const std::vector<int>& param_nodes() const { return param_nodes_; }
    const std::vector<int>& input_nodes() const { return input_nodes_; }

private:
    int add(Node n);
    int unary(Op op, int x, double p0 = 0.0, double p1 = 0.0);
    void check_id(int id) const;

    std::vector<Node> nodes_;
    std::vector<int> param_nodes_;
    std::vector<int> input_nodes_;
    std::map<std::string, int> outputs_;
    std::map<std::string, int> leaf_names_;
};

using NamedTensors = std::map<std::string, Tensor>;

// Forward pass results: one value slot per node.
struct Values {
    std::vector<Tensor> node_vals;
    const Tensor& at(int id) const { return node_vals[static_cast<std::size_t>(id)]; }
};

void evaluate(const Graph& g, const NamedTensors& inputs, const NamedTensors& params,
              Values& out);
Values evaluate(const Graph& g, const NamedTensors& inputs, const NamedTensors& params);

struct Gradients {
    NamedTensors param_grads;  // same shapes as the param leaves
    NamedTensors input_grads;  // same shapes as the fed inputs
};

// Reverse-mode sweep from `output_node`, seeded with `seed` (shape must match
// the output). Accumulates into `out`, so multi-term objectives can sum
// gradients across several backward calls.
void backward(const Graph& g, const Values& vals, int output_node, const Tensor& seed,
              Gradients& out);
Gradients backward(const Graph& g, const Values& vals, int output_node, double seed = 1.0);

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    int worst_index = -1;
    bool pass = false;
};

// Central finite differences over every param entry against the reverse-mode
// gradient of a scalar output. Relative error |ad-fd| / max(1, |ad|, |fd|).
GradCheckReport grad_check(const Graph& g, const NamedTensors& inputs,
                           const NamedTensors& params, int output_node, double tol = 1e-5,
                           double step = 1e-5);

}  // namespace sgan::ad
