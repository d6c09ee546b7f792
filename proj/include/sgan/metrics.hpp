#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgan/gan.hpp"
#include "sgan/synthdata.hpp"
#include "sgan/tensor.hpp"

namespace sgan::metrics {

// Nearest-center assignment against a mixture's modes. A sample is
// high-quality (HQ) when it lies within hq_radius_sigmas * stddev of its
// center; a mode counts as covered when at least 1% of all samples are HQ
// there. Counts are also broken down per generator label.
struct ModeReport {
    int n_modes = 0;
    int n_generators = 0;
    int n_samples = 0;
    double hq_radius = 0.0;
    std::vector<int> assigned_counts;  // all samples, per mode
    std::vector<int> hq_counts;        // high-quality samples, per mode
    std::vector<std::vector<int>> generator_mode_counts;  // [generator][mode]
    std::vector<std::vector<int>> generator_mode_hq;      // [generator][mode], HQ only
    int modes_covered = 0;
    double hq_fraction = 0.0;
};

ModeReport assign_and_score(const Tensor& x, const std::vector<int>& labels,
                            const synth::MixtureSpec& spec, int n_generators,
                            double hq_radius_sigmas = 4.0);

// Balance view of a ModeReport. Entropy is over each generator's share of
// all samples; a generator's dominant modes are the smallest set of modes
// holding at least `dominant_share` of its HQ samples.
struct BalanceReport {
    std::vector<int> generator_totals;  // all samples, per generator
    double entropy = 0.0;
    std::vector<std::vector<int>> dominant_modes;  // per generator, ascending
};

BalanceReport generator_balance(const ModeReport& report, double dominant_share = 0.6);

// One training run to score per seed.
struct CoverageRun {
    std::string name;
    gan::TrainConfig cfg;
    synth::MixtureSpec mixture;
    int eval_samples = 8000;
    double hq_radius_sigmas = 4.0;
};

struct CoverageCell {
    std::string config;
    std::uint64_t seed = 0;
    int modes_covered = 0;
    double hq_fraction = 0.0;
    double entropy = 0.0;
    bool failed = false;
    std::string reason;
    ModeReport mode_report;
    BalanceReport balance;
};

// Trains every run at every seed and scores the resulting samples. Training
// failures are recorded in the cell, not thrown.
std::vector<CoverageCell> coverage_experiment(const std::vector<CoverageRun>& runs,
                                              const std::vector<std::uint64_t>& seeds);

std::string coverage_csv(const std::vector<CoverageCell>& cells);

double median(std::vector<double> v);

}  // namespace sgan::metrics
