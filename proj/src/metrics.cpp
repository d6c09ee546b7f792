#include "sgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sgan::metrics {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("metrics: " + msg); }

int nearest_center(const synth::MixtureSpec& spec, double x0, double x1, double* dist) {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < spec.centers.size(); ++m) {
        const double d0 = x0 - spec.centers[m][0];
        const double d1 = x1 - spec.centers[m][1];
        const double d2 = d0 * d0 + d1 * d1;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(m);
        }
    }
    if (dist) *dist = std::sqrt(best_d2);
    return best;
}

}  // namespace

ModeReport assign_and_score(const Tensor& x, const std::vector<int>& labels,
                            const synth::MixtureSpec& spec, int n_generators,
                            double hq_radius_sigmas) {
    spec.validate();
    if (x.cols != 2) fail("samples must be 2-D");
    if (labels.size() != static_cast<std::size_t>(x.rows)) fail("labels/sample count mismatch");
    if (n_generators < 1) fail("need at least one generator");
    if (!(hq_radius_sigmas > 0.0)) fail("hq radius must be positive");

    ModeReport rep;
    rep.n_modes = static_cast<int>(spec.centers.size());
    rep.n_generators = n_generators;
    rep.n_samples = x.rows;
    rep.hq_radius = hq_radius_sigmas * spec.stddev;
    rep.assigned_counts.assign(static_cast<std::size_t>(rep.n_modes), 0);
    rep.hq_counts.assign(static_cast<std::size_t>(rep.n_modes), 0);
    rep.generator_mode_counts.assign(static_cast<std::size_t>(n_generators),
                                     std::vector<int>(static_cast<std::size_t>(rep.n_modes), 0));
    rep.generator_mode_hq = rep.generator_mode_counts;

    int hq_total = 0;
    for (int i = 0; i < x.rows; ++i) {
        const int g = labels[static_cast<std::size_t>(i)];
        if (g < 0 || g >= n_generators) fail("label out of range");
        double dist = 0.0;
        const int m = nearest_center(spec, x.at(i, 0), x.at(i, 1), &dist);
        rep.assigned_counts[static_cast<std::size_t>(m)] += 1;
        rep.generator_mode_counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(m)] += 1;
        if (dist <= rep.hq_radius) {
            rep.hq_counts[static_cast<std::size_t>(m)] += 1;
            rep.generator_mode_hq[static_cast<std::size_t>(g)][static_cast<std::size_t>(m)] += 1;
            hq_total += 1;
        }
    }
    rep.hq_fraction = rep.n_samples > 0 ? static_cast<double>(hq_total) / rep.n_samples : 0.0;
    const double need = 0.01 * rep.n_samples;
    for (int c : rep.hq_counts)
        if (c >= need && c > 0) rep.modes_covered += 1;
    return rep;
}

BalanceReport generator_balance(const ModeReport& report, double dominant_share) {
    if (report.n_generators < 1) fail("report has no generators");
    if (!(dominant_share > 0.0 && dominant_share <= 1.0)) fail("dominant share must be in (0, 1]");

    BalanceReport rep;
    rep.generator_totals.assign(static_cast<std::size_t>(report.n_generators), 0);
    for (int g = 0; g < report.n_generators; ++g) {
        const auto& row = report.generator_mode_counts[static_cast<std::size_t>(g)];
        rep.generator_totals[static_cast<std::size_t>(g)] =
            std::accumulate(row.begin(), row.end(), 0);
    }

    rep.entropy = 0.0;
    if (report.n_samples > 0) {
        for (const int tg : rep.generator_totals) {
            if (tg <= 0) continue;
            const double p = static_cast<double>(tg) / report.n_samples;
            rep.entropy -= p * std::log(p);
        }
    }

    rep.dominant_modes.assign(static_cast<std::size_t>(report.n_generators), {});
    for (int g = 0; g < report.n_generators; ++g) {
        const auto& hq = report.generator_mode_hq[static_cast<std::size_t>(g)];
        const double total = std::accumulate(hq.begin(), hq.end(), 0.0);
        if (total <= 0.0) continue;
        std::vector<int> order(static_cast<std::size_t>(report.n_modes));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return hq[static_cast<std::size_t>(a)] > hq[static_cast<std::size_t>(b)];
        });
        double acc = 0.0;
        std::vector<int>& dom = rep.dominant_modes[static_cast<std::size_t>(g)];
        for (int m : order) {
            dom.push_back(m);
            acc += hq[static_cast<std::size_t>(m)];
            if (acc >= dominant_share * total) break;
        }
        std::sort(dom.begin(), dom.end());
    }
    return rep;
}

std::vector<CoverageCell> coverage_experiment(const std::vector<CoverageRun>& runs,
                                              const std::vector<std::uint64_t>& seeds) {
    if (runs.empty()) fail("no runs given");
    if (seeds.empty()) fail("no seeds given");

    std::vector<CoverageCell> cells;
    for (const CoverageRun& run : runs) {
        run.mixture.validate();
        for (std::uint64_t seed : seeds) {
            CoverageCell cell;
            cell.config = run.name;
            cell.seed = seed;

            gan::TrainConfig cfg = run.cfg;
            cfg.seed = seed;
            gan::DataSource data{2, [&run](int n, Rng& rng) {
                                     return synth::sample_real(run.mixture, n, rng);
                                 }};
            const gan::TrainResult res = gan::train(cfg, data);
            if (res.aborted) {
                cell.failed = true;
                cell.reason = res.abort_reason;
                cells.push_back(std::move(cell));
                continue;
            }
            Rng eval_rng = Rng::restore(res.state.rng).fork();
            const gan::Samples s =
                gan::sample(cfg.model, res.state.gammas, run.eval_samples, eval_rng);
            cell.mode_report = assign_and_score(s.x, s.labels, run.mixture,
                                                cfg.model.n_generators, run.hq_radius_sigmas);
            cell.balance = generator_balance(cell.mode_report);
            cell.modes_covered = cell.mode_report.modes_covered;
            cell.hq_fraction = cell.mode_report.hq_fraction;
            cell.entropy = cell.balance.entropy;
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

std::string coverage_csv(const std::vector<CoverageCell>& cells) {
    std::string s = "config,seed,modes_covered,hq_fraction,entropy\n";
    char buf[128];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%d,%.17g,%.17g\n", c.config.c_str(),
                      static_cast<unsigned long long>(c.seed), c.modes_covered, c.hq_fraction,
                      c.entropy);
        s += buf;
    }
    return s;
}

double median(std::vector<double> v) {
    if (v.empty()) fail("median of empty list");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace sgan::metrics
