#pragma once

#include <string>
#include <vector>

#include "sgan/autodiff.hpp"
#include "sgan/rng.hpp"

namespace sgan::nets {

enum class Activation { none, tanh, leaky_relu, sigmoid };

struct LayerSpec {
    int in = 0;
    int out = 0;
    bool batchnorm = false;
    Activation act = Activation::none;
};

// Throws unless consecutive dims chain and all dims are positive.
void validate_specs(const std::vector<LayerSpec>& specs);

std::size_t param_count(const std::vector<LayerSpec>& specs);

// Appends linear -> optional batchnorm -> activation per layer, params named
// "L<i>.W" / "L<i>.b". Returns the output node.
int append_mlp(ad::Graph& g, const std::vector<LayerSpec>& specs, int input_node,
               double leaky_slope = 0.2);

// Graph with input "x" and output "y".
ad::Graph build_mlp(const std::vector<LayerSpec>& specs, double leaky_slope = 0.2);

// Weights ~ N(0, stddev), biases zero. Draws in layer order, row-major.
ad::NamedTensors init_params(const std::vector<LayerSpec>& specs, Rng& rng,
                             double weight_std = 0.01);

// Flat layout over a named tensor map, blocks ordered by name.
struct Block {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;
};

std::vector<Block> layout_of(const ad::NamedTensors& params);
std::size_t total_size(const std::vector<Block>& layout);
std::vector<double> flatten(const ad::NamedTensors& params);
ad::NamedTensors unflatten(const std::vector<Block>& layout, const std::vector<double>& flat);

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

AdamState make_adam(const AdamConfig& cfg, std::size_t n);

// One bias-corrected update in place; `grads` blocks missing from the map count
// as zero. Throws on non-finite gradient entries, naming the block.
void adam_step(ad::NamedTensors& params, const ad::NamedTensors& grads, AdamState& st);

}  // namespace sgan::nets
