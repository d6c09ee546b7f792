#include "sgan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgan::gan {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("gan: " + msg); }

Tensor gaussian_noise(int n, int dim, Rng& rng) { return Tensor::randn(n, dim, rng); }

// Prebuilt graphs for one model: the generator stack and the two payoff terms
// (each term contains the full discriminator stack and a scalar head).
struct Engine {
    ModelConfig m;
    ad::Graph gen_g;
    int gen_out = -1;
    ad::Graph real_g;  // x -> D -> f -> mean
    int real_out = -1;
    ad::Graph fake_g;  // x -> D -> f(1 - .) -> mean
    int fake_out = -1;

    explicit Engine(const ModelConfig& model) : m(model) {
        m.validate();
        int z = gen_g.input("z", m.noise_dim);
        gen_out = nets::append_mlp(gen_g, m.generator, z, m.leaky_slope);
        gen_g.mark_output("y", gen_out);

        real_out = build_term(real_g, false);
        fake_out = build_term(fake_g, true);
    }

    int build_term(ad::Graph& g, bool flip) {
        int x = g.input("x", m.data_dim);
        int d = nets::append_mlp(g, m.discriminator, x, m.leaky_slope);
        int u = flip ? g.scalar_affine(d, -1.0, 1.0) : d;
        if (m.payoff == Payoff::log_gan) u = g.log(u, 1e-7, 1.0 - 1e-7);
        int out = g.mean(u);
        g.mark_output("value", out);
        return out;
    }

    Tensor gen_fwd(const ad::NamedTensors& gamma, const Tensor& z, ad::Values* keep) const {
        ad::Values local;
        ad::Values& v = keep ? *keep : local;
        ad::NamedTensors in;
        in["z"] = z;
        ad::evaluate(gen_g, in, gamma, v);
        return v.at(gen_out);
    }

    double term(const ad::Graph& g, int out, const ad::NamedTensors& theta, const Tensor& x,
                ad::Values* keep) const {
        ad::Values local;
        ad::Values& v = keep ? *keep : local;
        ad::NamedTensors in;
        in["x"] = x;
        ad::evaluate(g, in, theta, v);
        return v.at(out).data[0];
    }

    double real_term(const ad::NamedTensors& theta, const Tensor& x,
                     ad::Values* keep = nullptr) const {
        return term(real_g, real_out, theta, x, keep);
    }

    double fake_term(const ad::NamedTensors& theta, const Tensor& x,
                     ad::Values* keep = nullptr) const {
        return term(fake_g, fake_out, theta, x, keep);
    }

    // d(term)/dx with the given scalar seed; also accumulates theta grads if wanted.
    Tensor term_input_grad(const ad::Graph& g, int out, const ad::Values& vals, double seed,
                           ad::Gradients* theta_grads) const {
        ad::Gradients local;
        ad::Gradients& gr = theta_grads ? *theta_grads : local;
        ad::backward(g, vals, out, Tensor::scalar(seed), gr);
        Tensor dx = gr.input_grads.at("x");
        if (!theta_grads) return dx;
        return dx;
    }
};

void accumulate_scaled(Tensor& acc, const Tensor& t, double s) {
    for (std::size_t k = 0; k < t.size(); ++k) acc.data[k] += s * t.data[k];
}

void scale_grads(ad::NamedTensors& grads, double s) {
    for (auto& [name, t] : grads)
        for (double& v : t.data) v *= s;
}

Tensor average_rows(const std::vector<Tensor>& parts) {
    Tensor acc(parts.front().rows, parts.front().cols);
    for (const Tensor& p : parts) accumulate_scaled(acc, p, 1.0);
    const double inv = 1.0 / static_cast<double>(parts.size());
    for (double& v : acc.data) v *= inv;
    return acc;
}

void check_batches(const ModelConfig& m, const Tensor& real, const Tensor& noise) {
    if (real.cols != m.data_dim) fail("real batch has wrong dimension");
    if (noise.cols != m.noise_dim) fail("noise batch has wrong dimension");
    if (real.rows < 1 || noise.rows < 1) fail("empty batch");
}

}  // namespace

void ModelConfig::validate() const {
    if (n_generators < 1) fail("need at least one generator");
    if (noise_dim < 1 || data_dim < 1) fail("dims must be positive");
    nets::validate_specs(generator);
    nets::validate_specs(discriminator);
    if (generator.front().in != noise_dim) fail("generator input dim != noise_dim");
    if (generator.back().out != data_dim) fail("generator output dim != data_dim");
    if (discriminator.front().in != data_dim) fail("discriminator input dim != data_dim");
    if (discriminator.back().out != 1) fail("discriminator must end in one unit");
    if (!(init_std > 0.0)) fail("init_std must be positive");
}

void TrainConfig::validate() const {
    model.validate();
    if (batch_real < 1 || batch_gen < 1) fail("batch sizes must be positive");
    if (steps < 0) fail("steps must be non-negative");
    if (log_every < 1) fail("log_every must be positive");
}

double payoff(const ModelConfig& m, const ad::NamedTensors& gamma,
              const ad::NamedTensors& theta, const Tensor& real, const Tensor& noise) {
    Engine eng(m);
    check_batches(m, real, noise);
    const Tensor fake = eng.gen_fwd(gamma, noise, nullptr);
    return eng.real_term(theta, real) + eng.fake_term(theta, fake);
}

double ensemble_objective(const ModelConfig& m, const std::vector<ad::NamedTensors>& gammas,
                          const ad::NamedTensors& theta, const Tensor& real,
                          const std::vector<Tensor>& noises) {
    Engine eng(m);
    if (gammas.size() != static_cast<std::size_t>(m.n_generators))
        fail("wrong generator count");
    if (noises.size() != gammas.size()) fail("need one noise batch per generator");
    double acc = 0.0;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        check_batches(m, real, noises[i]);
        acc += eng.fake_term(theta, eng.gen_fwd(gammas[i], noises[i], nullptr));
    }
    return eng.real_term(theta, real) + acc / static_cast<double>(gammas.size());
}

double multibranch_objective(const ModelConfig& m,
                             const std::vector<ad::NamedTensors>& branches,
                             const ad::NamedTensors& theta, const Tensor& real,
                             const Tensor& noise) {
    Engine eng(m);
    if (branches.empty()) fail("need at least one branch");
    check_batches(m, real, noise);
    std::vector<Tensor> outs;
    outs.reserve(branches.size());
    for (const auto& gamma : branches) outs.push_back(eng.gen_fwd(gamma, noise, nullptr));
    return eng.real_term(theta, real) + eng.fake_term(theta, average_rows(outs));
}

EnsembleState init_state(const TrainConfig& cfg) {
    cfg.validate();
    EnsembleState st;
    Rng master(cfg.seed);
    Rng rd = master.fork();
    st.theta = nets::init_params(cfg.model.discriminator, rd, cfg.model.init_std);
    st.opt_theta = nets::make_adam(cfg.adam_d, nets::total_size(nets::layout_of(st.theta)));
    st.gammas.reserve(static_cast<std::size_t>(cfg.model.n_generators));
    for (int i = 0; i < cfg.model.n_generators; ++i) {
        Rng rg = master.fork();
        st.gammas.push_back(nets::init_params(cfg.model.generator, rg, cfg.model.init_std));
        st.opt_gammas.push_back(
            nets::make_adam(cfg.adam_g, nets::total_size(nets::layout_of(st.gammas[i]))));
    }
    st.step = 0;
    st.rng = master.save();
    return st;
}

namespace {

StepLog step_impl(EnsembleState& st, const TrainConfig& cfg, const DataSource& data,
                  const Engine& eng) {
    const ModelConfig& m = eng.m;
    const int I = m.n_generators;
    const double invI = 1.0 / static_cast<double>(I);
    Rng rng = Rng::restore(st.rng);

    auto draw_noises = [&](std::vector<Tensor>& zs) {
        const int streams = m.multibranch ? 1 : I;
        zs.clear();
        for (int i = 0; i < streams; ++i) {
            Rng r = rng.fork();
            zs.push_back(gaussian_noise(cfg.batch_gen, m.noise_dim, r));
        }
    };

    auto make_fakes = [&](const std::vector<Tensor>& zs, std::vector<ad::Values>* keep,
                          std::vector<Tensor>& fakes) {
        fakes.clear();
        if (keep) keep->resize(st.gammas.size());
        for (std::size_t i = 0; i < st.gammas.size(); ++i) {
            const Tensor& z = m.multibranch ? zs[0] : zs[i];
            fakes.push_back(eng.gen_fwd(st.gammas[i], z, keep ? &(*keep)[i] : nullptr));
        }
    };

    StepLog log;

    // --- discriminator phase ---
    {
        Rng r_real = rng.fork();
        const Tensor real = data.sample(cfg.batch_real, r_real);
        check_batches(m, real, Tensor(1, m.noise_dim));
        std::vector<Tensor> zs;
        draw_noises(zs);
        std::vector<Tensor> fakes;
        make_fakes(zs, nullptr, fakes);

        ad::Gradients gd;
        ad::Values vals;
        double target = eng.term(eng.real_g, eng.real_out, st.theta, real, &vals);
        ad::backward(eng.real_g, vals, eng.real_out, Tensor::scalar(1.0), gd);

        double fake_acc = 0.0;
        if (m.multibranch) {
            const Tensor composite = average_rows(fakes);
            fake_acc = eng.term(eng.fake_g, eng.fake_out, st.theta, composite, &vals);
            ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(1.0), gd);
            target += fake_acc;
        } else {
            for (const Tensor& f : fakes) {
                fake_acc += eng.term(eng.fake_g, eng.fake_out, st.theta, f, &vals);
                ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(invI), gd);
            }
            target += fake_acc * invI;
        }
        log.d_loss = -target;
        if (cfg.adam_d.lr != 0.0) {
            scale_grads(gd.param_grads, -1.0);  // Adam descends; discriminator ascends
            nets::adam_step(st.theta, gd.param_grads, st.opt_theta);
        }
    }

    // --- generator phase ---
    {
        Rng r_real = rng.fork();
        const Tensor real = data.sample(cfg.batch_real, r_real);
        std::vector<Tensor> zs;
        draw_noises(zs);
        std::vector<ad::Values> gen_vals;
        std::vector<Tensor> fakes;
        make_fakes(zs, &gen_vals, fakes);

        const double real_part = eng.real_term(st.theta, real);

        auto descend_branch = [&](std::size_t i, const Tensor& dfake) {
            ad::Gradients gg;
            ad::backward(eng.gen_g, gen_vals[i], eng.gen_out, dfake, gg);
            if (cfg.adam_g.lr != 0.0)
                nets::adam_step(st.gammas[i], gg.param_grads, st.opt_gammas[i]);
        };

        if (m.multibranch) {
            const Tensor composite = average_rows(fakes);
            ad::Values vals;
            const double fake_part =
                eng.term(eng.fake_g, eng.fake_out, st.theta, composite, &vals);
            log.objective = real_part + fake_part;
            Tensor dcomp;
            if (!m.non_saturating) {
                log.g_loss_mean = fake_part;
                ad::Gradients gr;
                ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(1.0), gr);
                dcomp = gr.input_grads.at("x");
            } else {
                ad::Values ns_vals;
                const double ns = eng.term(eng.real_g, eng.real_out, st.theta, composite, &ns_vals);
                log.g_loss_mean = -ns;
                ad::Gradients gr;
                ad::backward(eng.real_g, ns_vals, eng.real_out, Tensor::scalar(-1.0), gr);
                dcomp = gr.input_grads.at("x");
            }
            for (double& v : dcomp.data) v *= invI;  // composite averages the branches
            for (std::size_t i = 0; i < st.gammas.size(); ++i) descend_branch(i, dcomp);
        } else {
            double fake_acc = 0.0;
            double ns_acc = 0.0;
            for (std::size_t i = 0; i < st.gammas.size(); ++i) {
                ad::Values vals;
                fake_acc += eng.term(eng.fake_g, eng.fake_out, st.theta, fakes[i], &vals);
                Tensor dfake;
                if (!m.non_saturating) {
                    ad::Gradients gr;
                    ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(invI), gr);
                    dfake = gr.input_grads.at("x");
                } else {
                    ad::Values ns_vals;
                    ns_acc +=
                        eng.term(eng.real_g, eng.real_out, st.theta, fakes[i], &ns_vals);
                    ad::Gradients gr;
                    ad::backward(eng.real_g, ns_vals, eng.real_out, Tensor::scalar(-invI), gr);
                    dfake = gr.input_grads.at("x");
                }
                descend_branch(i, dfake);
            }
            log.objective = real_part + fake_acc * invI;
            log.g_loss_mean = m.non_saturating ? -ns_acc * invI : fake_acc * invI;
        }
    }

    st.step += 1;
    st.rng = rng.save();
    return log;
}

}  // namespace

StepLog train_step(EnsembleState& st, const TrainConfig& cfg, const DataSource& data) {
    cfg.validate();
    if (data.dim != cfg.model.data_dim) fail("data source dim != model data_dim");
    Engine eng(cfg.model);
    return step_impl(st, cfg, data, eng);
}

TrainResult train(const TrainConfig& cfg, const DataSource& data,
                  const std::function<void(const MetricsRow&)>& on_log) {
    cfg.validate();
    if (data.dim != cfg.model.data_dim) fail("data source dim != model data_dim");
    Engine eng(cfg.model);

    TrainResult res;
    res.state = init_state(cfg);

    auto push_row = [&](const StepLog& log) {
        MetricsRow row{res.state.step, log.objective, log.d_loss, log.g_loss_mean};
        res.metrics.push_back(row);
        if (on_log) on_log(row);
    };

    for (long s = 0; s < cfg.steps; ++s) {
        StepLog log;
        try {
            log = step_impl(res.state, cfg, data, eng);
        } catch (const std::runtime_error& e) {
            res.aborted = true;
            res.abort_reason = e.what();
            break;
        }
        if (!std::isfinite(log.objective) || !std::isfinite(log.d_loss) ||
            !std::isfinite(log.g_loss_mean)) {
            res.aborted = true;
            res.abort_reason = "non-finite objective at step " + std::to_string(res.state.step);
            break;
        }
        if (res.state.step % cfg.log_every == 0 || res.state.step == cfg.steps) push_row(log);
    }
    return res;
}

Samples sample(const ModelConfig& m, const std::vector<ad::NamedTensors>& gammas, int n,
               Rng& rng) {
    m.validate();
    if (gammas.size() != static_cast<std::size_t>(m.n_generators))
        fail("wrong generator count");
    if (n < 0) fail("sample count must be non-negative");
    Engine eng(m);

    Samples out;
    out.x.resize(n, m.data_dim);
    out.labels.assign(static_cast<std::size_t>(n), 0);
    if (n == 0) return out;

    if (m.multibranch) {
        Tensor z = gaussian_noise(n, m.noise_dim, rng);
        std::vector<Tensor> outs;
        outs.reserve(gammas.size());
        for (const auto& gamma : gammas) outs.push_back(eng.gen_fwd(gamma, z, nullptr));
        out.x = average_rows(outs);
        return out;
    }

    const int I = m.n_generators;
    for (int i = 0; i < n; ++i)
        out.labels[static_cast<std::size_t>(i)] =
            static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(I)));
    Tensor z = gaussian_noise(n, m.noise_dim, rng);

    for (int g = 0; g < I; ++g) {
        std::vector<int> rows;
        for (int i = 0; i < n; ++i)
            if (out.labels[static_cast<std::size_t>(i)] == g) rows.push_back(i);
        if (rows.empty()) continue;
        Tensor zg(static_cast<int>(rows.size()), m.noise_dim);
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (int j = 0; j < m.noise_dim; ++j) zg.at(static_cast<int>(k), j) = z.at(rows[k], j);
        const Tensor xg = eng.gen_fwd(gammas[static_cast<std::size_t>(g)], zg, nullptr);
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (int j = 0; j < m.data_dim; ++j) out.x.at(rows[k], j) = xg.at(static_cast<int>(k), j);
    }
    return out;
}

GapReport empirical_gap(const TrainConfig& cfg, const EnsembleState& st,
                        const DataSource& data, int K, double probe_lr,
                        std::uint64_t seed) {
    cfg.validate();
    if (K < 0) fail("probe step count must be non-negative");
    if (!(probe_lr >= 0.0)) fail("probe_lr must be non-negative");
    Engine eng(cfg.model);
    const ModelConfig& m = eng.m;
    const int I = m.n_generators;
    const double invI = 1.0 / static_cast<double>(I);

    Rng rng(seed);
    Rng r_real = rng.fork();
    const Tensor real = data.sample(cfg.batch_real, r_real);
    std::vector<Tensor> zs;
    {
        const int streams = m.multibranch ? 1 : I;
        for (int i = 0; i < streams; ++i) {
            Rng r = rng.fork();
            zs.push_back(gaussian_noise(cfg.batch_gen, m.noise_dim, r));
        }
    }

    auto fakes_of = [&](const std::vector<ad::NamedTensors>& gammas,
                        std::vector<ad::Values>* keep) {
        std::vector<Tensor> fakes;
        if (keep) keep->resize(gammas.size());
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            const Tensor& z = m.multibranch ? zs[0] : zs[i];
            fakes.push_back(eng.gen_fwd(gammas[i], z, keep ? &(*keep)[i] : nullptr));
        }
        return fakes;
    };

    auto objective = [&](const ad::NamedTensors& theta, const std::vector<Tensor>& fakes) {
        double fake_part = 0.0;
        if (m.multibranch) {
            fake_part = eng.fake_term(theta, average_rows(fakes));
        } else {
            for (const Tensor& f : fakes) fake_part += eng.fake_term(theta, f);
            fake_part *= invI;
        }
        return eng.real_term(theta, real) + fake_part;
    };

    GapReport rep;
    rep.probe_steps = K;
    rep.probe_lr = probe_lr;

    // Gradient steps with global-norm clipping at 1. Unlike Adam, movement
    // stays proportional to the true gradient magnitude near a saddle, so a
    // balanced state genuinely reports a small gap; the clip keeps the probe
    // from overshooting on the steep cliffs of the clamped log payoff.
    auto gradient_step = [](ad::NamedTensors& params, const ad::NamedTensors& grads,
                            double step) {
        double sq = 0.0;
        for (const auto& [name, g] : grads)
            if (params.count(name))
                for (double v : g.data) sq += v * v;
        const double norm = std::sqrt(sq);
        const double scale = norm > 1.0 ? 1.0 / norm : 1.0;
        for (auto& [name, t] : params) {
            const auto it = grads.find(name);
            if (it == grads.end()) continue;
            for (std::size_t k = 0; k < t.size(); ++k)
                t.data[k] += step * scale * it->second.data[k];
        }
    };

    // Ascent on a copy of theta, generators frozen (their fakes are constants).
    double w_hat;
    {
        ad::NamedTensors theta = st.theta;
        const std::vector<Tensor> fakes = fakes_of(st.gammas, nullptr);
        const Tensor composite = m.multibranch ? average_rows(fakes) : Tensor();
        for (int k = 0; k < K && probe_lr > 0.0; ++k) {
            ad::Gradients gd;
            ad::Values vals;
            eng.term(eng.real_g, eng.real_out, theta, real, &vals);
            ad::backward(eng.real_g, vals, eng.real_out, Tensor::scalar(1.0), gd);
            if (m.multibranch) {
                eng.term(eng.fake_g, eng.fake_out, theta, composite, &vals);
                ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(1.0), gd);
            } else {
                for (const Tensor& f : fakes) {
                    eng.term(eng.fake_g, eng.fake_out, theta, f, &vals);
                    ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(invI), gd);
                }
            }
            gradient_step(theta, gd.param_grads, probe_lr);
        }
        w_hat = objective(theta, fakes_of(st.gammas, nullptr));
    }

    // Descent on copies of the gammas, theta frozen.
    double q_hat;
    {
        std::vector<ad::NamedTensors> gammas = st.gammas;
        for (int k = 0; k < K && probe_lr > 0.0; ++k) {
            std::vector<ad::Values> gen_vals;
            const std::vector<Tensor> fakes = fakes_of(gammas, &gen_vals);
            if (m.multibranch) {
                ad::Values vals;
                eng.term(eng.fake_g, eng.fake_out, st.theta, average_rows(fakes), &vals);
                ad::Gradients gr;
                ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(1.0), gr);
                Tensor dcomp = gr.input_grads.at("x");
                for (double& v : dcomp.data) v *= invI;
                for (std::size_t i = 0; i < gammas.size(); ++i) {
                    ad::Gradients gg;
                    ad::backward(eng.gen_g, gen_vals[i], eng.gen_out, dcomp, gg);
                    gradient_step(gammas[i], gg.param_grads, -probe_lr);
                }
            } else {
                for (std::size_t i = 0; i < gammas.size(); ++i) {
                    ad::Values vals;
                    eng.term(eng.fake_g, eng.fake_out, st.theta, fakes[i], &vals);
                    ad::Gradients gr;
                    ad::backward(eng.fake_g, vals, eng.fake_out, Tensor::scalar(invI), gr);
                    ad::Gradients gg;
                    ad::backward(eng.gen_g, gen_vals[i], eng.gen_out, gr.input_grads.at("x"), gg);
                    gradient_step(gammas[i], gg.param_grads, -probe_lr);
                }
            }
        }
        q_hat = objective(st.theta, fakes_of(gammas, nullptr));
    }

    rep.w_hat = w_hat;
    rep.q_hat = q_hat;
    rep.gap = w_hat - q_hat;
    rep.valid = std::isfinite(w_hat) && std::isfinite(q_hat);
    return rep;
}

}  // namespace sgan::gan
