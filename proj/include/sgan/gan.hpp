#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgan/nets.hpp"
#include "sgan/rng.hpp"
#include "sgan/tensor.hpp"

namespace sgan::gan {

// f(t) = log t (clamped) or f(t) = t. The two-sample payoff is
//   phi(gamma, theta) = mean f(D(x_real)) + mean f(1 - D(G(z))).
enum class Payoff { log_gan, identity };

struct ModelConfig {
    Payoff payoff = Payoff::log_gan;
    int n_generators = 1;
    int noise_dim = 2;
    int data_dim = 2;
    std::vector<nets::LayerSpec> generator;      // noise_dim -> data_dim
    std::vector<nets::LayerSpec> discriminator;  // data_dim -> 1
    double leaky_slope = 0.2;
    double init_std = 0.01;  // weight init N(0, init_std); biases zero
    // One composite generator that averages its branches instead of an ensemble.
    bool multibranch = false;
    // Generators ascend mean f(D(G(z))) instead of descending the payoff.
    bool non_saturating = false;

    void validate() const;
};

struct TrainConfig {
    ModelConfig model;
    nets::AdamConfig adam_d;
    nets::AdamConfig adam_g;
    int batch_real = 64;
    int batch_gen = 64;
    long steps = 0;
    int log_every = 100;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EnsembleState {
    ad::NamedTensors theta;
    std::vector<ad::NamedTensors> gammas;  // one per generator (or branch)
    nets::AdamState opt_theta;
    std::vector<nets::AdamState> opt_gammas;
    long step = 0;
    Rng::State rng{};
};

EnsembleState init_state(const TrainConfig& cfg);

// Draws real batches; dim must match the model's data_dim.
struct DataSource {
    int dim = 0;
    std::function<Tensor(int, Rng&)> sample;
};

// Two-sample payoff of one generator against the discriminator.
double payoff(const ModelConfig& m, const ad::NamedTensors& gamma,
              const ad::NamedTensors& theta, const Tensor& real, const Tensor& noise);

// (1/I) * sum_i phi(gamma_i, theta): the equal-weight ensemble objective.
// One noise batch per generator.
double ensemble_objective(const ModelConfig& m, const std::vector<ad::NamedTensors>& gammas,
                          const ad::NamedTensors& theta, const Tensor& real,
                          const std::vector<Tensor>& noises);

// Payoff of the composite generator (1/I) * sum_i G_i(z) sharing one noise batch.
double multibranch_objective(const ModelConfig& m,
                             const std::vector<ad::NamedTensors>& branches,
                             const ad::NamedTensors& theta, const Tensor& real,
                             const Tensor& noise);

struct StepLog {
    double objective = 0.0;    // ensemble objective on the generator-phase batches
    double d_loss = 0.0;       // negative discriminator ascent target, pre-update
    double g_loss_mean = 0.0;  // mean generator loss on the generator-phase batches
};

// One discriminator ascent phase followed by one descent phase for every
// generator, fresh batches per phase. A zero learning rate freezes that
// player entirely (parameters and optimizer moments).
StepLog train_step(EnsembleState& st, const TrainConfig& cfg, const DataSource& data);

struct MetricsRow {
    long step = 0;
    double objective = 0.0;
    double d_loss = 0.0;
    double g_loss_mean = 0.0;
};

struct TrainResult {
    EnsembleState state;
    std::vector<MetricsRow> metrics;
    bool aborted = false;
    std::string abort_reason;
};

TrainResult train(const TrainConfig& cfg, const DataSource& data,
                  const std::function<void(const MetricsRow&)>& on_log = {});

struct Samples {
    Tensor x;                 // n x data_dim
    std::vector<int> labels;  // generator index per row (all zero for multibranch)
};

// Mixes generators uniformly: labels first, then noise rows, then grouped
// forward passes so batch normalization sees each generator's own group.
Samples sample(const ModelConfig& m, const std::vector<ad::NamedTensors>& gammas, int n,
               Rng& rng);

struct GapReport {
    double w_hat = 0.0;
    double q_hat = 0.0;
    double gap = 0.0;
    int probe_steps = 0;
    double probe_lr = 0.0;
    bool valid = false;
};

// Local minimax-gap proxy: on frozen evaluation batches, ascend a copy of
// theta for K steps (w_hat) and descend copies of the gammas for K steps
// (q_hat); gap = w_hat - q_hat. K = 0 gives exactly zero gap.
GapReport empirical_gap(const TrainConfig& cfg, const EnsembleState& st,
                        const DataSource& data, int K, double probe_lr,
                        std::uint64_t seed);

}  // namespace sgan::gan
