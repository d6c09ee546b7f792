#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "sgan/metrics.hpp"

using namespace sgan;
using namespace sgan::metrics;
using nets::Activation;

namespace {

// one sample exactly on each requested center, cycling generator labels
void put_on_center(Tensor& x, std::vector<int>& labels, int row, const synth::MixtureSpec& spec,
                   int mode, int gen) {
    x.at(row, 0) = spec.centers[static_cast<std::size_t>(mode)][0];
    x.at(row, 1) = spec.centers[static_cast<std::size_t>(mode)][1];
    labels[static_cast<std::size_t>(row)] = gen;
}

gan::TrainConfig tiny_train_config(int n_gen, long steps, std::uint64_t seed) {
    gan::TrainConfig cfg;
    cfg.model.n_generators = n_gen;
    cfg.model.noise_dim = 2;
    cfg.model.data_dim = 2;
    cfg.model.generator = {{2, 4, false, Activation::leaky_relu},
                           {4, 2, false, Activation::none}};
    cfg.model.discriminator = {{2, 4, false, Activation::leaky_relu},
                               {4, 1, false, Activation::sigmoid}};
    cfg.batch_real = 8;
    cfg.batch_gen = 8;
    cfg.steps = steps;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("samples on every center cover all modes") {
    synth::MixtureSpec spec = synth::ring_mixture(8, 2.0, 0.01);
    const int n = 800;
    Tensor x(n, 2);
    std::vector<int> labels(n, 0);
    for (int i = 0; i < n; ++i) put_on_center(x, labels, i, spec, i % 8, i % 4);

    ModeReport rep = assign_and_score(x, labels, spec, 4);
    CHECK(rep.n_modes == 8);
    CHECK(rep.n_generators == 4);
    CHECK(rep.n_samples == n);
    CHECK(rep.modes_covered == 8);
    CHECK(rep.hq_fraction == 1.0);
    CHECK(rep.hq_radius == doctest::Approx(0.04).epsilon(1e-12));
    for (int m = 0; m < 8; ++m) {
        CHECK(rep.assigned_counts[static_cast<std::size_t>(m)] == 100);
        CHECK(rep.hq_counts[static_cast<std::size_t>(m)] == 100);
    }

    int total = 0, total_hq = 0;
    for (int g = 0; g < 4; ++g)
        for (int m = 0; m < 8; ++m) {
            total += rep.generator_mode_counts[g][m];
            total_hq += rep.generator_mode_hq[g][m];
        }
    CHECK(total == n);
    CHECK(total_hq == n);
}

TEST_CASE("a collapsed sampler covers one mode") {
    synth::MixtureSpec spec = synth::ring_mixture(8, 2.0, 0.01);
    const int n = 500;
    Tensor x(n, 2);
    std::vector<int> labels(n, 0);
    for (int i = 0; i < n; ++i) put_on_center(x, labels, i, spec, 3, 0);
    ModeReport rep = assign_and_score(x, labels, spec, 1);
    CHECK(rep.modes_covered == 1);
    CHECK(rep.hq_fraction == 1.0);
    CHECK(rep.assigned_counts[3] == n);
}

TEST_CASE("samples outside the radius are assigned but not high quality") {
    synth::MixtureSpec spec = synth::ring_mixture(4, 2.0, 0.01);
    Tensor x(4, 2);
    std::vector<int> labels(4, 0);
    // on-center, borderline inside, outside, far outside
    x.at(0, 0) = 2.0;
    x.at(0, 1) = 0.0;
    x.at(1, 0) = 2.0 + 0.039;
    x.at(1, 1) = 0.0;
    x.at(2, 0) = 2.0 + 0.041;
    x.at(2, 1) = 0.0;
    x.at(3, 0) = 1.0;
    x.at(3, 1) = 1.0;

    ModeReport rep = assign_and_score(x, labels, spec, 1);
    CHECK(rep.assigned_counts[0] >= 3);
    CHECK(rep.hq_counts[0] == 2);
    CHECK(rep.hq_fraction == 0.5);
}

TEST_CASE("coverage needs at least one percent of all samples") {
    synth::MixtureSpec spec = synth::ring_mixture(2, 2.0, 0.01);
    const int n = 1000;
    Tensor x(n, 2);
    std::vector<int> labels(n, 0);
    // 991 on mode 0, 9 on mode 1: mode 1 sits below the 1% line
    for (int i = 0; i < n; ++i) put_on_center(x, labels, i, spec, i < 991 ? 0 : 1, 0);
    ModeReport rep = assign_and_score(x, labels, spec, 1);
    CHECK(rep.hq_counts[1] == 9);
    CHECK(rep.modes_covered == 1);

    // move one more sample across the line
    put_on_center(x, labels, 0, spec, 1, 0);
    rep = assign_and_score(x, labels, spec, 1);
    CHECK(rep.hq_counts[1] == 10);
    CHECK(rep.modes_covered == 2);
}

TEST_CASE("gaussian blobs at four sigma capture almost everything") {
    synth::MixtureSpec spec = synth::ring_mixture(8, 2.0, 0.05);
    Rng rng(31);
    Tensor x = synth::sample_real(spec, 20000, rng);
    std::vector<int> labels(20000, 0);
    ModeReport rep = assign_and_score(x, labels, spec, 1);
    CHECK(rep.modes_covered == 8);
    // P(|N(0, I2)| <= 4) = 1 - exp(-8)
    CHECK(rep.hq_fraction == doctest::Approx(1.0 - std::exp(-8.0)).epsilon(2e-4));
}

TEST_CASE("report invariants: counts partition the samples") {
    synth::MixtureSpec spec = synth::ring_mixture(8, 2.0, 0.05);
    Rng rng(32);
    const int n = 3000;
    Tensor x = synth::sample_real(spec, n, rng);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % 3;

    ModeReport rep = assign_and_score(x, labels, spec, 3);
    CHECK(std::accumulate(rep.assigned_counts.begin(), rep.assigned_counts.end(), 0) == n);
    int hq_total = std::accumulate(rep.hq_counts.begin(), rep.hq_counts.end(), 0);
    CHECK(rep.hq_fraction == doctest::Approx(double(hq_total) / n).epsilon(1e-12));
    for (int m = 0; m < 8; ++m) {
        int per_gen = 0, per_gen_hq = 0;
        for (int g = 0; g < 3; ++g) {
            per_gen += rep.generator_mode_counts[g][m];
            per_gen_hq += rep.generator_mode_hq[g][m];
        }
        CHECK(per_gen == rep.assigned_counts[static_cast<std::size_t>(m)]);
        CHECK(per_gen_hq == rep.hq_counts[static_cast<std::size_t>(m)]);
    }
}

TEST_CASE("scoring is invariant to sample order") {
    synth::MixtureSpec spec = synth::ring_mixture(8, 2.0, 0.05);
    Rng rng(33);
    const int n = 1000;
    Tensor x = synth::sample_real(spec, n, rng);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % 2;

    Tensor rx(n, 2);
    std::vector<int> rlabels(n);
    for (int i = 0; i < n; ++i) {
        rx.at(i, 0) = x.at(n - 1 - i, 0);
        rx.at(i, 1) = x.at(n - 1 - i, 1);
        rlabels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(n - 1 - i)];
    }
    ModeReport a = assign_and_score(x, labels, spec, 2);
    ModeReport b = assign_and_score(rx, rlabels, spec, 2);
    CHECK(a.modes_covered == b.modes_covered);
    CHECK(a.hq_fraction == b.hq_fraction);
    CHECK(a.assigned_counts == b.assigned_counts);
    CHECK(a.hq_counts == b.hq_counts);
}

TEST_CASE("extending a balanced sample keeps coverage monotone") {
    synth::MixtureSpec spec = synth::ring_mixture(8, 2.0, 0.05);
    Rng rng(34);
    Tensor big = synth::sample_real(spec, 4000, rng);
    Tensor small(2000, 2);
    std::copy(big.data.begin(), big.data.begin() + 4000, small.data.begin());
    std::vector<int> lb(4000, 0), ls(2000, 0);
    ModeReport a = assign_and_score(small, ls, spec, 1);
    ModeReport b = assign_and_score(big, lb, spec, 1);
    CHECK(b.modes_covered >= a.modes_covered);
}

TEST_CASE("assign_and_score validates its inputs") {
    synth::MixtureSpec spec = synth::ring_mixture(2, 1.0, 0.1);
    Tensor x(3, 2);
    std::vector<int> labels(3, 0);
    CHECK_THROWS(assign_and_score(x, {0, 1}, spec, 1));     // label length mismatch
    labels[1] = 5;
    CHECK_THROWS(assign_and_score(x, labels, spec, 2));     // label out of range
    labels[1] = -1;
    CHECK_THROWS(assign_and_score(x, labels, spec, 2));
    labels[1] = 0;
    Tensor bad(3, 3);
    CHECK_THROWS(assign_and_score(bad, labels, spec, 1));   // not 2-D samples
}

TEST_CASE("generator balance computes entropy and dominant modes") {
    synth::MixtureSpec spec = synth::ring_mixture(4, 2.0, 0.01);
    const int n = 400;
    Tensor x(n, 2);
    std::vector<int> labels(n, 0);
    // generator g sticks to mode g: a perfect matching
    for (int i = 0; i < n; ++i) put_on_center(x, labels, i, spec, i % 4, i % 4);
    ModeReport rep = assign_and_score(x, labels, spec, 4);
    BalanceReport bal = generator_balance(rep);
    REQUIRE(bal.generator_totals.size() == 4);
    for (int g = 0; g < 4; ++g) CHECK(bal.generator_totals[static_cast<std::size_t>(g)] == 100);
    CHECK(bal.entropy == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    for (int g = 0; g < 4; ++g) {
        REQUIRE(bal.dominant_modes[static_cast<std::size_t>(g)].size() == 1);
        CHECK(bal.dominant_modes[static_cast<std::size_t>(g)][0] == g);
    }
}

TEST_CASE("entropy collapses to zero when one generator produces everything") {
    synth::MixtureSpec spec = synth::ring_mixture(4, 2.0, 0.01);
    Tensor x(100, 2);
    std::vector<int> labels(100, 2);  // only generator 2 emits samples
    for (int i = 0; i < 100; ++i) put_on_center(x, labels, i, spec, i % 4, 2);
    ModeReport rep = assign_and_score(x, labels, spec, 4);
    BalanceReport bal = generator_balance(rep);
    CHECK(bal.entropy == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(bal.generator_totals[2] == 100);
    CHECK(bal.dominant_modes[0].empty());  // silent generators dominate nothing
    CHECK_FALSE(bal.dominant_modes[2].empty());
}

TEST_CASE("dominant modes take the smallest prefix reaching the share") {
    synth::MixtureSpec spec = synth::ring_mixture(4, 2.0, 0.01);
    const int n = 100;
    Tensor x(n, 2);
    std::vector<int> labels(n, 0);
    // 70 on mode 1, 30 on mode 3: mode 1 alone holds 70% >= 60%
    for (int i = 0; i < n; ++i) put_on_center(x, labels, i, spec, i < 70 ? 1 : 3, 0);
    ModeReport rep = assign_and_score(x, labels, spec, 1);
    BalanceReport bal = generator_balance(rep);
    REQUIRE(bal.dominant_modes[0].size() == 1);
    CHECK(bal.dominant_modes[0][0] == 1);

    // an even 50/50 split needs both modes
    for (int i = 0; i < n; ++i) put_on_center(x, labels, i, spec, i < 50 ? 1 : 3, 0);
    rep = assign_and_score(x, labels, spec, 1);
    bal = generator_balance(rep);
    REQUIRE(bal.dominant_modes[0].size() == 2);
    CHECK(bal.dominant_modes[0][0] == 1);
    CHECK(bal.dominant_modes[0][1] == 3);
}

TEST_CASE("median handles odd, even, and single-element lists") {
    CHECK(median({3.0}) == 3.0);
    CHECK(median({5.0, 1.0, 3.0}) == 3.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK_THROWS(median({}));
}

TEST_CASE("coverage experiment trains, scores, and stays deterministic") {
    CoverageRun run;
    run.name = "tiny";
    run.cfg = tiny_train_config(2, 5, 1);
    run.mixture = synth::ring_mixture(2, 1.0, 0.2);
    run.eval_samples = 500;

    std::vector<CoverageCell> a = coverage_experiment({run}, {7, 8});
    std::vector<CoverageCell> b = coverage_experiment({run}, {7, 8});
    REQUIRE(a.size() == 2);
    CHECK(a[0].config == "tiny");
    CHECK(a[0].seed == 7);
    CHECK(a[1].seed == 8);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK_FALSE(a[i].failed);
        CHECK(a[i].modes_covered == b[i].modes_covered);
        CHECK(a[i].hq_fraction == b[i].hq_fraction);
        CHECK(a[i].entropy == b[i].entropy);
        CHECK(a[i].mode_report.n_samples == 500);
    }

    CHECK_THROWS(coverage_experiment({run}, {}));
    CHECK_THROWS(coverage_experiment({}, {1}));
}

TEST_CASE("coverage experiment records aborted runs as failed cells") {
    CoverageRun run;
    run.name = "explode";
    run.cfg = tiny_train_config(1, 50, 1);
    run.cfg.model.init_std = 1e160;  // overflow quickly
    run.cfg.adam_d.lr = 1.0;
    run.cfg.adam_g.lr = 1.0;
    run.mixture = synth::ring_mixture(2, 1.0, 0.2);
    run.eval_samples = 100;

    std::vector<CoverageCell> cells = coverage_experiment({run}, {3});
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].failed);
    CHECK_FALSE(cells[0].reason.empty());
    CHECK(cells[0].modes_covered == 0);
}

TEST_CASE("coverage csv has the documented header and one row per cell") {
    CoverageRun run;
    run.name = "csvcheck";
    run.cfg = tiny_train_config(1, 2, 9);
    run.mixture = synth::ring_mixture(2, 1.0, 0.2);
    run.eval_samples = 200;

    std::vector<CoverageCell> cells = coverage_experiment({run}, {1, 2, 3});
    std::string csv = coverage_csv(cells);
    CHECK(csv.rfind("config,seed,modes_covered,hq_fraction,entropy\n", 0) == 0);
    int lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 4);  // header + 3 cells
    CHECK(csv.find("csvcheck,1,") != std::string::npos);
    CHECK(csv.find("csvcheck,3,") != std::string::npos);
    CHECK(coverage_csv(coverage_experiment({run}, {1, 2, 3})) == csv);  // byte-identical
}
