#include "sgan/cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "sgan/autodiff.hpp"
#include "sgan/nets.hpp"

#include "sgan/duality.hpp"
#include "sgan/gan.hpp"
#include "sgan/metrics.hpp"
#include "sgan/serialize.hpp"
#include "sgan/svg.hpp"
#include "sgan/synthdata.hpp"

namespace sgan::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string fmt_short(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

// ---- run configuration -------------------------------------------------

struct RunConfig {
    std::string task = "mixture";  // mixture | mnist | fashion
    std::string out;
    int eval_samples = 8000;
    double hq_radius_sigmas = 4.0;
    int ring_modes = 8;
    double ring_radius = 2.0;
    double ring_stddev = 0.01;
    std::string images;
    std::string labels;
    gan::TrainConfig train;
};

using nets::Activation;
using nets::LayerSpec;

gan::TrainConfig mixture_train_defaults() {
    gan::TrainConfig t;
    t.model.payoff = gan::Payoff::log_gan;
    t.model.n_generators = 8;
    t.model.noise_dim = 2;
    t.model.data_dim = 2;
    t.model.generator = {{2, 16, true, Activation::leaky_relu}, {16, 2, false, Activation::none}};
    t.model.discriminator = {{2, 512, false, Activation::leaky_relu},
                             {512, 256, false, Activation::leaky_relu},
                             {256, 1, false, Activation::sigmoid}};
    t.batch_real = 64;
    t.batch_gen = 64;
    t.steps = 25000;
    return t;
}

gan::TrainConfig image_train_defaults(const std::string& task) {
    gan::TrainConfig t;
    t.model.payoff = gan::Payoff::log_gan;
    t.model.n_generators = 10;
    t.model.data_dim = 784;
    t.model.discriminator = {{784, 512, false, Activation::leaky_relu},
                             {512, 256, false, Activation::leaky_relu},
                             {256, 1, false, Activation::sigmoid}};
    if (task == "mnist") {
        t.model.noise_dim = 100;
        t.model.generator = {{100, 512, true, Activation::none},
                             {512, 784, false, Activation::tanh}};
        t.steps = 1000;
    } else {  // fashion
        t.model.noise_dim = 2;
        t.model.generator = {{2, 128, true, Activation::none},
                             {128, 256, true, Activation::none},
                             {256, 512, true, Activation::none},
                             {512, 1024, true, Activation::none},
                             {1024, 784, false, Activation::tanh}};
        t.steps = 500;
    }
    t.batch_real = 100;
    t.batch_gen = 100;
    return t;
}

RunConfig defaults_for(const std::string& task) {
    RunConfig rc;
    rc.task = task;
    if (task == "mixture") {
        rc.train = mixture_train_defaults();
    } else if (task == "mnist" || task == "fashion") {
        rc.train = image_train_defaults(task);
    } else {
        throw std::invalid_argument("unknown task '" + task + "' (mixture|mnist|fashion)");
    }
    rc.out = "runs/" + task;
    return rc;
}

json run_config_json(const RunConfig& rc) {
    return json{{"task", rc.task},
                {"out", rc.out},
                {"eval_samples", rc.eval_samples},
                {"hq_radius_sigmas", rc.hq_radius_sigmas},
                {"ring",
                 {{"modes", rc.ring_modes}, {"radius", rc.ring_radius}, {"stddev", rc.ring_stddev}}},
                {"images", rc.images},
                {"labels", rc.labels},
                {"train", to_json(rc.train)}};
}

RunConfig overlay_run_config(const json& j) {
    const std::string task = j.value("task", "mixture");
    RunConfig rc = defaults_for(task);
    rc.out = j.value("out", rc.out);
    rc.eval_samples = j.value("eval_samples", rc.eval_samples);
    rc.hq_radius_sigmas = j.value("hq_radius_sigmas", rc.hq_radius_sigmas);
    if (j.count("ring")) {
        const json& r = j.at("ring");
        rc.ring_modes = r.value("modes", rc.ring_modes);
        rc.ring_radius = r.value("radius", rc.ring_radius);
        rc.ring_stddev = r.value("stddev", rc.ring_stddev);
    }
    rc.images = j.value("images", rc.images);
    rc.labels = j.value("labels", rc.labels);
    if (j.count("train")) {
        json base = to_json(rc.train);
        base.update(j.at("train"));  // shallow merge of user keys over defaults
        rc.train = train_config_from_json(base);
    }
    return rc;
}

json read_json_file(const std::string& path) {
    if (!fs::exists(path)) throw std::invalid_argument("config file not found: " + path);
    std::ifstream in(path, std::ios::binary);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

synth::MixtureSpec ring_of(const RunConfig& rc) {
    return synth::ring_mixture(rc.ring_modes, rc.ring_radius, rc.ring_stddev);
}

struct ResolvedData {
    gan::DataSource source;
    std::shared_ptr<synth::LabeledImages> dataset;  // image tasks only
};

ResolvedData data_source_for(const RunConfig& rc) {
    ResolvedData rd;
    if (rc.task == "mixture") {
        const synth::MixtureSpec spec = ring_of(rc);
        rd.source = {2, [spec](int n, Rng& rng) { return synth::sample_real(spec, n, rng); }};
        return rd;
    }
    if (rc.images.empty() || rc.labels.empty())
        throw std::invalid_argument("task '" + rc.task + "' needs --images and --labels");
    rd.dataset = std::make_shared<synth::LabeledImages>(
        synth::load_image_dataset(rc.images, rc.labels));
    const Tensor& px = rd.dataset->images.pixels;
    if (px.cols != rc.train.model.data_dim)
        throw std::invalid_argument("dataset dimension " + std::to_string(px.cols) +
                                    " != model data_dim " +
                                    std::to_string(rc.train.model.data_dim));
    auto ds = rd.dataset;
    rd.source = {px.cols, [ds](int n, Rng& rng) {
                     const Tensor& p = ds->images.pixels;
                     Tensor b(n, p.cols);
                     for (int i = 0; i < n; ++i) {
                         const auto row = rng.uniform_index(static_cast<std::uint64_t>(p.rows));
                         for (int j = 0; j < p.cols; ++j)
                             b.at(i, j) = p.at(static_cast<int>(row), j);
                     }
                     return b;
                 }};
    return rd;
}

std::string metrics_csv(const std::vector<gan::MetricsRow>& rows) {
    std::string s = "step,objective,d_loss,g_loss_mean\n";
    for (const auto& r : rows)
        s += std::to_string(r.step) + "," + fmt(r.objective) + "," + fmt(r.d_loss) + "," +
             fmt(r.g_loss_mean) + "\n";
    return s;
}

// ---- subcommand state ---------------------------------------------------

struct TrainArgs {
    std::string config, out, task, images, labels;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_generators;
    std::optional<long> steps;
};

struct EvalArgs {
    std::string checkpoint, config, out;
    int n = -1;
    std::uint64_t seed = 1;
};

struct GapArgs {
    std::string checkpoint, config, out;
    int K = 200;
    double probe_lr = 1e-3;
    std::uint64_t seed = 1;
};

struct DualityArgs {
    std::string family = "pm1";
    std::string I = "1:8";
    std::string out = ".";
    std::uint64_t seed = 1;
    int max_members = 6;
};

struct VerifyArgs {
    std::string suite = "all";
    std::string out;
    std::uint64_t seed = 7;
};

struct PlotArgs {
    std::string checkpoint, config, out = "samples.svg";
    int n = 8000;
    std::uint64_t seed = 1;
};

RunConfig resolve_run_config(const TrainArgs& a) {
    RunConfig rc;
    if (!a.config.empty()) {
        json j = read_json_file(a.config);
        if (!a.task.empty()) j["task"] = a.task;
        rc = overlay_run_config(j);
    } else {
        rc = defaults_for(a.task.empty() ? "mixture" : a.task);
    }
    if (!a.out.empty()) rc.out = a.out;
    if (!a.images.empty()) rc.images = a.images;
    if (!a.labels.empty()) rc.labels = a.labels;
    if (a.seed) {
        rc.train.seed = *a.seed;
    } else if (const char* env = std::getenv("SGAN_SEED")) {
        try {
            rc.train.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("SGAN_SEED is not an unsigned integer");
        }
    }
    if (a.n_generators) rc.train.model.n_generators = *a.n_generators;
    if (a.steps) rc.train.steps = *a.steps;
    rc.train.validate();
    return rc;
}

int cmd_train(const TrainArgs& a) {
    const RunConfig rc = resolve_run_config(a);
    const ResolvedData rd = data_source_for(rc);
    fs::create_directories(rc.out);

    write_text(rc.out + "/config.json", run_config_json(rc).dump(1, '\t') + "\n");

    const gan::TrainResult res = gan::train(rc.train, rd.source);
    write_text(rc.out + "/metrics.csv", metrics_csv(res.metrics));
    save_checkpoint(rc.out + "/checkpoint.json", rc.train, res.state);

    if (res.aborted) {
        std::cout << "training aborted at step " << res.state.step << ": " << res.abort_reason
                  << "\n";
        return 2;
    }
    std::cout << "trained " << res.state.step << " steps (I=" << rc.train.model.n_generators
              << ", task=" << rc.task << "), wrote " << rc.out << "\n";
    return 0;
}

std::string sibling_config(const std::string& checkpoint_path) {
    return (fs::path(checkpoint_path).parent_path() / "config.json").string();
}

std::pair<gan::TrainConfig, gan::EnsembleState> open_checkpoint(const std::string& path) {
    if (!fs::exists(path)) throw std::invalid_argument("checkpoint file not found: " + path);
    return load_checkpoint(path);
}

RunConfig load_run_for_checkpoint(const std::string& checkpoint, const std::string& config_flag,
                                  const gan::TrainConfig& cfg) {
    std::string path = config_flag.empty() ? sibling_config(checkpoint) : config_flag;
    if (!fs::exists(path)) {
        if (!config_flag.empty()) throw std::invalid_argument("config file not found: " + path);
        // fall back to task defaults around the checkpointed train config
        RunConfig rc = defaults_for(cfg.model.data_dim == 2 ? "mixture" : "mnist");
        rc.train = cfg;
        return rc;
    }
    RunConfig rc = overlay_run_config(read_json_file(path));
    rc.train = cfg;  // the checkpoint is authoritative for the model
    return rc;
}

int cmd_eval(const EvalArgs& a) {
    auto [cfg, state] = open_checkpoint(a.checkpoint);
    RunConfig rc = load_run_for_checkpoint(a.checkpoint, a.config, cfg);
    if (rc.task != "mixture")
        throw std::invalid_argument("eval scores mixture runs only");
    const std::string out_dir =
        a.out.empty() ? fs::path(a.checkpoint).parent_path().string() : a.out;
    fs::create_directories(out_dir.empty() ? "." : out_dir);

    const int n = a.n > 0 ? a.n : rc.eval_samples;
    Rng rng(a.seed);
    const gan::Samples s = gan::sample(cfg.model, state.gammas, n, rng);
    const synth::MixtureSpec spec = ring_of(rc);
    const metrics::ModeReport mr = metrics::assign_and_score(
        s.x, s.labels, spec, cfg.model.n_generators, rc.hq_radius_sigmas);
    const metrics::BalanceReport br = metrics::generator_balance(mr);

    json j{{"n_samples", mr.n_samples},
           {"modes_covered", mr.modes_covered},
           {"hq_fraction", mr.hq_fraction},
           {"entropy", br.entropy},
           {"hq_radius", mr.hq_radius},
           {"assigned_counts", mr.assigned_counts},
           {"hq_counts", mr.hq_counts},
           {"generator_totals", br.generator_totals},
           {"generator_mode_hq", mr.generator_mode_hq},
           {"dominant_modes", br.dominant_modes}};
    const std::string out_path = (fs::path(out_dir) / "eval.json").string();
    write_text(out_path, j.dump(1, '\t') + "\n");
    std::cout << "modes_covered=" << mr.modes_covered << " hq_fraction=" << fmt_short(mr.hq_fraction)
              << " entropy=" << fmt_short(br.entropy) << " -> " << out_path << "\n";
    return 0;
}

int cmd_gap(const GapArgs& a) {
    auto [cfg, state] = open_checkpoint(a.checkpoint);
    RunConfig rc = load_run_for_checkpoint(a.checkpoint, a.config, cfg);
    const ResolvedData rd = data_source_for(rc);
    const std::string out_dir =
        a.out.empty() ? fs::path(a.checkpoint).parent_path().string() : a.out;
    fs::create_directories(out_dir.empty() ? "." : out_dir);

    const gan::GapReport rep = gan::empirical_gap(cfg, state, rd.source, a.K, a.probe_lr, a.seed);
    std::string csv = "I,K,probe_lr,w_hat,q_hat,gap,valid\n";
    csv += std::to_string(cfg.model.n_generators) + "," + std::to_string(a.K) + "," +
           fmt(a.probe_lr) + "," + fmt(rep.w_hat) + "," + fmt(rep.q_hat) + "," + fmt(rep.gap) +
           "," + (rep.valid ? "1" : "0") + "\n";
    const std::string out_path = (fs::path(out_dir) / "gap.csv").string();
    write_text(out_path, csv);
    std::cout << "gap=" << fmt_short(rep.gap) << " (w_hat=" << fmt_short(rep.w_hat)
              << ", q_hat=" << fmt_short(rep.q_hat) << ") -> " << out_path << "\n";
    if (!rep.valid) return 2;
    return 0;
}

std::pair<int, int> parse_range(const std::string& s) {
    const auto colon = s.find(':');
    try {
        if (colon == std::string::npos) {
            const int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw std::invalid_argument("bad ensemble size range '" + s + "' (want N or A:B)");
    }
}

int cmd_duality(const DualityArgs& a) {
    const auto [ilo, ihi] = parse_range(a.I);
    if (ilo < 1 || ihi < ilo) throw std::invalid_argument("ensemble range must satisfy 1 <= A <= B");

    duality::QuadraticFamily fam;
    if (a.family == "pm1") {
        fam = duality::pm1_family();
    } else if (a.family == "random") {
        Rng rng(a.seed);
        fam = duality::random_family(a.max_members, rng);
    } else {
        throw std::invalid_argument("unknown family '" + a.family + "' (pm1|random)");
    }

    fs::create_directories(a.out.empty() ? "." : a.out);
    std::string csv = "I,w_star,q_star,gap,delta_worst,bound,holds\n";
    bool all_hold = true;
    for (int I = ilo; I <= ihi; ++I) {
        const duality::DualityReport rep = duality::exact_minimax(fam, I);
        csv += std::to_string(rep.I) + "," + fmt(rep.w_star) + "," + fmt(rep.q_star) + "," +
               fmt(rep.gap) + "," + fmt(rep.delta_worst) + "," + fmt(rep.bound) + "," +
               (rep.holds ? "1" : "0") + "\n";
        all_hold = all_hold && rep.holds;
        std::cout << "I=" << rep.I << " w*=" << fmt_short(rep.w_star)
                  << " q*=" << fmt_short(rep.q_star) << " gap=" << fmt_short(rep.gap)
                  << " bound=" << fmt_short(rep.bound) << (rep.holds ? "" : "  VIOLATED") << "\n";
    }
    const std::string out_path = (fs::path(a.out) / "duality.csv").string();
    write_text(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
    return all_hold ? 0 : 2;
}

int cmd_plot(const PlotArgs& a) {
    auto [cfg, state] = open_checkpoint(a.checkpoint);
    if (cfg.model.data_dim != 2)
        throw std::invalid_argument("plot supports 2-D models only");
    RunConfig rc = load_run_for_checkpoint(a.checkpoint, a.config, cfg);
    Rng rng(a.seed);
    const gan::Samples s = gan::sample(cfg.model, state.gammas, a.n, rng);
    std::vector<std::array<double, 2>> centers;
    if (rc.task == "mixture") centers = ring_of(rc).centers;
    if (const auto dir = fs::path(a.out).parent_path(); !dir.empty()) fs::create_directories(dir);
    svg::write_scatter(a.out, s.x, s.labels, centers);
    std::cout << "wrote " << a.out << " (" << a.n << " samples)\n";
    return 0;
}

// ---- verify suites -------------------------------------------------------

struct SuiteResult {
    std::string line;
    bool ok = true;
};

SuiteResult suite_grad_check(std::uint64_t seed);
SuiteResult suite_minimax(std::uint64_t seed);
SuiteResult suite_infconv(std::uint64_t seed);
SuiteResult suite_strong_duality(std::uint64_t seed);
SuiteResult suite_caratheodory(std::uint64_t seed);
SuiteResult suite_shapley_folkman(std::uint64_t seed);
SuiteResult suite_matching(std::uint64_t seed);

int cmd_verify(const VerifyArgs& a) {
    using Suite = SuiteResult (*)(std::uint64_t);
    const std::vector<std::pair<std::string, Suite>> suites = {
        {"grad-check", &suite_grad_check},
        {"minimax", &suite_minimax},
        {"infconv", &suite_infconv},
        {"strong-duality", &suite_strong_duality},
        {"caratheodory", &suite_caratheodory},
        {"shapley-folkman", &suite_shapley_folkman},
        {"matching", &suite_matching},
    };

    std::string report;
    bool all_ok = true;
    bool matched_any = false;
    for (const auto& [name, fn] : suites) {
        if (a.suite != "all" && a.suite != name) continue;
        matched_any = true;
        const SuiteResult r = fn(a.seed);
        report += (r.ok ? "ok " : "FAIL ") + name + ": " + r.line + "\n";
        all_ok = all_ok && r.ok;
    }
    if (!matched_any) throw std::invalid_argument("unknown suite '" + a.suite + "'");
    report += all_ok ? "all checks passed\n" : "CHECKS FAILED\n";
    std::cout << report;
    if (!a.out.empty()) write_text(a.out, report);
    return all_ok ? 0 : 2;
}

// ---- verify suite implementations ---------------------------------------

SuiteResult suite_grad_check(std::uint64_t seed) {
    Rng rng(seed);
    const std::array<Activation, 4> acts = {Activation::tanh, Activation::leaky_relu,
                                            Activation::sigmoid, Activation::none};
    double worst = 0.0;
    const int reps = 16;
    for (int rep = 0; rep < reps; ++rep) {
        const int batch = 2 + static_cast<int>(rng.uniform_index(4));
        const int in_dim = 1 + static_cast<int>(rng.uniform_index(4));
        const int depth = 1 + static_cast<int>(rng.uniform_index(3));
        std::vector<LayerSpec> specs;
        int cur = in_dim;
        for (int l = 0; l < depth; ++l) {
            const bool last = l == depth - 1;
            LayerSpec s;
            s.in = cur;
            s.out = last ? 1 : 2 + static_cast<int>(rng.uniform_index(4));
            s.batchnorm = !last && rng.uniform() < 0.5;
            s.act = last ? Activation::sigmoid : acts[rng.uniform_index(4)];
            specs.push_back(s);
            cur = s.out;
        }
        ad::Graph g = nets::build_mlp(specs);
        int head = g.output("y");
        if (rep % 2 == 0) head = g.log(head, 1e-7, 1.0 - 1e-7);
        head = g.mean(head);
        ad::NamedTensors inputs;
        inputs["x"] = Tensor::randn(batch, in_dim, rng, 0.0, 1.0);
        const ad::NamedTensors params = nets::init_params(specs, rng, 0.5);
        const ad::GradCheckReport r = ad::grad_check(g, inputs, params, head, 1e-5, 1e-5);
        worst = std::max(worst, r.max_rel_err);
        if (!r.pass)
            return {"network " + std::to_string(rep) + " rel err " + fmt_short(r.max_rel_err) +
                        " at " + r.worst_param,
                    false};
    }
    return {std::to_string(reps) + " random networks, max rel err " + fmt_short(worst), true};
}

SuiteResult suite_minimax(std::uint64_t seed) {
    const duality::QuadraticFamily pm1 = duality::pm1_family();
    double worst = 0.0;
    for (int I = 1; I <= 64; ++I) {
        const duality::DualityReport r = duality::exact_minimax(pm1, I);
        const double w_expect = I % 2 == 0 ? 0.0 : 0.5 / (static_cast<double>(I) * I);
        worst = std::max({worst, std::fabs(r.w_star - w_expect), std::fabs(r.q_star),
                          std::fabs(r.delta_worst - 0.5)});
        if (!r.holds || r.gap < -1e-12 || worst > 1e-10)
            return {"two-member family I=" + std::to_string(I) + " dev " + fmt_short(worst),
                    false};
    }
    Rng rng(seed);
    for (int rep = 0; rep < 25; ++rep) {
        const duality::QuadraticFamily fam = duality::random_family(6, rng);
        for (const int I : {1, 2, 3, 5, 8}) {
            const duality::DualityReport r = duality::exact_minimax(fam, I);
            if (r.gap < -1e-12 || !r.holds)
                return {"random family " + std::to_string(rep) + " I=" + std::to_string(I) +
                            " gap " + fmt_short(r.gap) + " vs bound " + fmt_short(r.bound),
                        false};
        }
    }
    return {"closed forms to 1e-10 for I=1..64 (max dev " + fmt_short(worst) +
                "), 25 random families within the gap bound",
            true};
}

duality::GridFunction random_convex_grid(Rng& rng) {
    std::array<double, 3> slope{}, shift{};
    for (int j = 0; j < 3; ++j) {
        slope[static_cast<std::size_t>(j)] = rng.uniform(-2.0, 2.0);
        shift[static_cast<std::size_t>(j)] = rng.uniform(-1.0, 1.0);
    }
    const double q = 0.05 + 0.2 * rng.uniform();
    return duality::GridFunction::tabulate(
        duality::kGridLo, duality::kGridHi, duality::kGridN, [=](double u) {
            double best = slope[0] * u + shift[0];
            for (int j = 1; j < 3; ++j)
                best = std::max(best, slope[static_cast<std::size_t>(j)] * u +
                                          shift[static_cast<std::size_t>(j)]);
            return best + 0.5 * q * u * u;
        });
}

SuiteResult suite_infconv(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    double tol = 0.0;
    for (int rep = 0; rep < 6; ++rep) {
        const int I = 2 + static_cast<int>(rng.uniform_index(3));
        std::vector<duality::GridFunction> fs;
        for (int i = 0; i < I; ++i) fs.push_back(random_convex_grid(rng));
        const duality::InfconvReport r = duality::infconv_check(fs);
        worst = std::max(worst, r.max_dev);
        tol = r.tol;
        if (!r.pass)
            return {"instance " + std::to_string(rep) + " deviation " + fmt_short(r.max_dev) +
                        " over tolerance " + fmt_short(r.tol),
                    false};
    }
    return {"6 random convex instances, max deviation " + fmt_short(worst) + " < " +
                fmt_short(tol),
            true};
}

SuiteResult suite_strong_duality(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const duality::QuadraticFamily fam = duality::random_family(5, rng);
        for (const int I : {2, 4}) {
            const duality::StrongDualityReport r = duality::strong_duality_check(fam, I);
            worst = std::max(worst, r.primal_dual_dev);
            if (!r.pass)
                return {"family " + std::to_string(rep) + " I=" + std::to_string(I) +
                            " dual deviation " + fmt_short(r.primal_dual_dev),
                        false};
        }
    }
    return {"10 checks, max primal/dual deviation " + fmt_short(worst), true};
}

SuiteResult suite_caratheodory(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform_index(2));
        const int k = d + 2 + static_cast<int>(rng.uniform_index(6));
        std::vector<std::vector<double>> pts;
        std::vector<double> w;
        double wsum = 0.0;
        for (int i = 0; i < k; ++i) {
            std::vector<double> p;
            for (int j = 0; j < d; ++j) p.push_back(rng.uniform(-1.0, 1.0));
            pts.push_back(std::move(p));
            w.push_back(-std::log(1.0 - rng.uniform()));
            wsum += w.back();
        }
        for (double& wi : w) wi /= wsum;
        std::vector<double> target(static_cast<std::size_t>(d), 0.0);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < d; ++j)
                target[static_cast<std::size_t>(j)] +=
                    w[static_cast<std::size_t>(i)] * pts[static_cast<std::size_t>(i)]
                                                        [static_cast<std::size_t>(j)];

        const duality::ConvexCombination red = duality::caratheodory_reduce(pts, w);
        if (static_cast<int>(red.points.size()) > d + 1)
            return {"instance " + std::to_string(rep) + " support " +
                        std::to_string(red.points.size()) + " > d+1",
                    false};
        std::vector<double> recon(static_cast<std::size_t>(d), 0.0);
        double rsum = 0.0;
        for (std::size_t i = 0; i < red.points.size(); ++i) {
            rsum += red.weights[i];
            if (red.weights[i] < -1e-12)
                return {"instance " + std::to_string(rep) + " negative weight", false};
            for (int j = 0; j < d; ++j)
                recon[static_cast<std::size_t>(j)] +=
                    red.weights[i] * red.points[i][static_cast<std::size_t>(j)];
        }
        double err = std::fabs(rsum - 1.0);
        for (int j = 0; j < d; ++j)
            err = std::max(err, std::fabs(recon[static_cast<std::size_t>(j)] -
                                          target[static_cast<std::size_t>(j)]));
        worst = std::max(worst, err);
        if (err > 1e-9)
            return {"instance " + std::to_string(rep) + " reconstruction error " +
                        fmt_short(err),
                    false};
    }
    return {"40 random instances reduced to d+1 points, worst error " + fmt_short(worst), true};
}

SuiteResult suite_shapley_folkman(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
        const int m = 1 + static_cast<int>(rng.uniform_index(2));
        const int I = 2 + static_cast<int>(rng.uniform_index(5));
        duality::SFInstance inst;
        inst.target.assign(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < I; ++i) {
            const int k = 1 + static_cast<int>(rng.uniform_index(4));
            std::vector<std::vector<double>> set;
            std::vector<double> w;
            double wsum = 0.0;
            for (int p = 0; p < k; ++p) {
                std::vector<double> pt;
                for (int j = 0; j < m; ++j) pt.push_back(rng.uniform(-1.0, 1.0));
                set.push_back(std::move(pt));
                w.push_back(-std::log(1.0 - rng.uniform()));
                wsum += w.back();
            }
            for (int p = 0; p < k; ++p)
                for (int j = 0; j < m; ++j)
                    inst.target[static_cast<std::size_t>(j)] +=
                        w[static_cast<std::size_t>(p)] / wsum *
                        set[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
            inst.sets.push_back(std::move(set));
        }
        const duality::SFDecomposition dec = duality::shapley_folkman_decompose(inst);
        worst = std::max(worst, dec.reconstruction_error);
        if (static_cast<int>(dec.convexified.size()) > m)
            return {"instance " + std::to_string(rep) + " convexified " +
                        std::to_string(dec.convexified.size()) + " sets > m",
                    false};
        for (const int i : dec.convexified)
            if (dec.mixtures[static_cast<std::size_t>(i)].points.size() >
                static_cast<std::size_t>(m + 1))
                return {"instance " + std::to_string(rep) + " mixture support > m+1", false};
        if (dec.reconstruction_error > 1e-9)
            return {"instance " + std::to_string(rep) + " reconstruction error " +
                        fmt_short(dec.reconstruction_error),
                    false};
    }
    return {"40 random instances decomposed, worst reconstruction error " + fmt_short(worst),
            true};
}

SuiteResult suite_matching(std::uint64_t seed) {
    const double floor_value = 2.0 * std::log(0.5);
    {
        const std::vector<double> p = {0.25, 0.25, 0.25, 0.25};
        const duality::DiscreteGanReport r = duality::discrete_gan_value(p, p);
        if (!r.matched || std::fabs(r.value - floor_value) > 1e-12)
            return {"identical distributions missed the floor value", false};
        const std::vector<double> a = {0.5, 0.5, 0.0, 0.0};
        const std::vector<double> b = {0.0, 0.0, 0.5, 0.5};
        const duality::DiscreteGanReport rd = duality::discrete_gan_value(a, b);
        if (rd.matched || std::fabs(rd.value) > 1e-12)
            return {"disjoint supports should score 0", false};
    }
    Rng rng(seed);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform_index(6));
        std::vector<double> p, q;
        double ps = 0.0, qs = 0.0;
        for (int i = 0; i < n; ++i) {
            p.push_back(1e-3 + rng.uniform());
            q.push_back(1e-3 + rng.uniform());
            ps += p.back();
            qs += q.back();
        }
        for (int i = 0; i < n; ++i) {
            p[static_cast<std::size_t>(i)] /= ps;
            q[static_cast<std::size_t>(i)] /= qs;
        }
        const duality::DiscreteGanReport r = duality::discrete_gan_value(p, q);
        const double oracle = floor_value + 2.0 * duality::js_divergence(p, q);
        worst = std::max(worst, std::fabs(r.value - oracle));
        if (std::fabs(r.value - oracle) > 1e-12)
            return {"pair " + std::to_string(rep) + " deviates from the divergence oracle by " +
                        fmt_short(std::fabs(r.value - oracle)),
                    false};
        if (r.value < floor_value - 1e-12)
            return {"pair " + std::to_string(rep) + " fell below the floor value", false};
        if (duality::total_variation(p, q) > 0.01 && r.value <= floor_value + 5e-5)
            return {"pair " + std::to_string(rep) + " should sit strictly above the floor",
                    false};
    }
    return {"floor and divergence identities hold, worst oracle deviation " + fmt_short(worst),
            true};
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Ensemble GAN with one shared discriminator: training, metrics, and duality checks"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* t = app.add_subcommand("train", "Train an ensemble against one discriminator");
    t->add_option("--config", ta.config, "Run config JSON");
    t->add_option("--out", ta.out, "Output directory");
    t->add_option("--task", ta.task, "mixture|mnist|fashion");
    t->add_option("--images", ta.images, "IDX image file (image tasks)");
    t->add_option("--labels", ta.labels, "IDX label file (image tasks)");
    t->add_option("--seed", ta.seed, "Master seed");
    t->add_option("--I", ta.n_generators, "Number of generators");
    t->add_option("--steps", ta.steps, "Training steps");

    EvalArgs ea;
    auto* e = app.add_subcommand("eval", "Score samples from a checkpoint");
    e->add_option("--checkpoint", ea.checkpoint, "Checkpoint JSON")->required();
    e->add_option("--config", ea.config, "Run config JSON (default: sibling config.json)");
    e->add_option("--out", ea.out, "Output directory (default: checkpoint directory)");
    e->add_option("--n", ea.n, "Evaluation sample count");
    e->add_option("--seed", ea.seed, "Sampling seed");

    GapArgs ga;
    auto* g = app.add_subcommand("gap", "Empirical minimax-gap probe");
    g->add_option("--checkpoint", ga.checkpoint, "Checkpoint JSON")->required();
    g->add_option("--config", ga.config, "Run config JSON (default: sibling config.json)");
    g->add_option("--out", ga.out, "Output directory (default: checkpoint directory)");
    g->add_option("--K", ga.K, "Probe steps per side");
    g->add_option("--probe-lr", ga.probe_lr, "Probe learning rate");
    g->add_option("--seed", ga.seed, "Probe seed");

    DualityArgs da;
    auto* d = app.add_subcommand("duality", "Exact ensemble minimax values and bounds");
    d->add_option("--family", da.family, "pm1|random");
    d->add_option("--I", da.I, "Ensemble size or range A:B");
    d->add_option("--seed", da.seed, "Family seed (random family)");
    d->add_option("--members", da.max_members, "Max members for random family");
    d->add_option("--out", da.out, "Output directory");

    VerifyArgs va;
    auto* v = app.add_subcommand("verify", "Run the numerical property suites");
    v->add_option("--suite", va.suite,
                  "all|grad-check|minimax|infconv|strong-duality|caratheodory|shapley-folkman|"
                  "matching");
    v->add_option("--seed", va.seed, "Suite seed");
    v->add_option("--out", va.out, "Also write the report to this file");

    PlotArgs pa;
    auto* p = app.add_subcommand("plot", "Scatter plot of generator samples");
    p->add_option("--checkpoint", pa.checkpoint, "Checkpoint JSON")->required();
    p->add_option("--config", pa.config, "Run config JSON (default: sibling config.json)");
    p->add_option("--out", pa.out, "Output SVG path");
    p->add_option("--n", pa.n, "Sample count");
    p->add_option("--seed", pa.seed, "Sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return 1;
    }

    try {
        if (t->parsed()) return cmd_train(ta);
        if (e->parsed()) return cmd_eval(ea);
        if (g->parsed()) return cmd_gap(ga);
        if (d->parsed()) return cmd_duality(da);
        if (v->parsed()) return cmd_verify(va);
        if (p->parsed()) return cmd_plot(pa);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("sgan");
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace sgan::cli
