#include "sgan/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace sgan {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("serialize: " + msg); }

const json& need(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing key '") + key + "'");
    return *it;
}

}  // namespace

json to_json(const Tensor& t) {
    return json{{"rows", t.rows}, {"cols", t.cols}, {"data", t.data}};
}

Tensor tensor_from_json(const json& j) {
    Tensor t(need(j, "rows").get<int>(), need(j, "cols").get<int>());
    const auto data = need(j, "data").get<std::vector<double>>();
    if (data.size() != t.size()) fail("tensor data does not match shape");
    t.data = data;
    return t;
}

json to_json(const ad::NamedTensors& p) {
    json j = json::object();
    for (const auto& [name, t] : p) j[name] = to_json(t);
    return j;
}

ad::NamedTensors named_tensors_from_json(const json& j) {
    ad::NamedTensors p;
    for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = tensor_from_json(it.value());
    return p;
}

namespace {

std::string act_name(nets::Activation a) {
    switch (a) {
        case nets::Activation::none: return "none";
        case nets::Activation::tanh: return "tanh";
        case nets::Activation::leaky_relu: return "leaky_relu";
        case nets::Activation::sigmoid: return "sigmoid";
    }
    fail("bad activation enum");
}

nets::Activation act_from_name(const std::string& s) {
    if (s == "none") return nets::Activation::none;
    if (s == "tanh") return nets::Activation::tanh;
    if (s == "leaky_relu") return nets::Activation::leaky_relu;
    if (s == "sigmoid") return nets::Activation::sigmoid;
    fail("unknown activation '" + s + "'");
}

}  // namespace

json to_json(const nets::LayerSpec& s) {
    return json{{"in", s.in}, {"out", s.out}, {"batchnorm", s.batchnorm}, {"act", act_name(s.act)}};
}

nets::LayerSpec layer_from_json(const json& j) {
    nets::LayerSpec s;
    s.in = need(j, "in").get<int>();
    s.out = need(j, "out").get<int>();
    s.batchnorm = j.value("batchnorm", false);
    s.act = act_from_name(j.value("act", "none"));
    return s;
}

json to_json(const std::vector<nets::LayerSpec>& specs) {
    json arr = json::array();
    for (const auto& s : specs) arr.push_back(to_json(s));
    return arr;
}

std::vector<nets::LayerSpec> layers_from_json(const json& j) {
    std::vector<nets::LayerSpec> specs;
    for (const auto& item : j) specs.push_back(layer_from_json(item));
    return specs;
}

json to_json(const nets::AdamConfig& c) {
    return json{{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}};
}

nets::AdamConfig adam_config_from_json(const json& j) {
    nets::AdamConfig c;
    c.lr = j.value("lr", c.lr);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    return c;
}

json to_json(const nets::AdamState& st) {
    json j = to_json(st.cfg);
    j["step"] = st.step;
    j["m"] = st.m;
    j["v"] = st.v;
    return j;
}

nets::AdamState adam_state_from_json(const json& j) {
    nets::AdamState st;
    st.cfg = adam_config_from_json(j);
    st.step = need(j, "step").get<long>();
    st.m = need(j, "m").get<std::vector<double>>();
    st.v = need(j, "v").get<std::vector<double>>();
    if (st.m.size() != st.v.size()) fail("adam moment sizes disagree");
    return st;
}

namespace {

std::string payoff_name(gan::Payoff p) {
    return p == gan::Payoff::log_gan ? "log" : "identity";
}

gan::Payoff payoff_from_name(const std::string& s) {
    if (s == "log") return gan::Payoff::log_gan;
    if (s == "identity") return gan::Payoff::identity;
    fail("unknown payoff '" + s + "'");
}

}  // namespace

json to_json(const gan::TrainConfig& cfg) {
    const gan::ModelConfig& m = cfg.model;
    return json{{"payoff", payoff_name(m.payoff)},
                {"n_generators", m.n_generators},
                {"noise_dim", m.noise_dim},
                {"data_dim", m.data_dim},
                {"generator", to_json(m.generator)},
                {"discriminator", to_json(m.discriminator)},
                {"leaky_slope", m.leaky_slope},
                {"init_std", m.init_std},
                {"multibranch", m.multibranch},
                {"non_saturating", m.non_saturating},
                {"adam_d", to_json(cfg.adam_d)},
                {"adam_g", to_json(cfg.adam_g)},
                {"batch_real", cfg.batch_real},
                {"batch_gen", cfg.batch_gen},
                {"steps", cfg.steps},
                {"log_every", cfg.log_every},
                {"seed", cfg.seed}};
}

gan::TrainConfig train_config_from_json(const json& j) {
    gan::TrainConfig cfg;
    gan::ModelConfig& m = cfg.model;
    m.payoff = payoff_from_name(j.value("payoff", "log"));
    m.n_generators = j.value("n_generators", 1);
    m.noise_dim = j.value("noise_dim", 2);
    m.data_dim = j.value("data_dim", 2);
    m.generator = layers_from_json(need(j, "generator"));
    m.discriminator = layers_from_json(need(j, "discriminator"));
    m.leaky_slope = j.value("leaky_slope", 0.2);
    m.init_std = j.value("init_std", 0.01);
    m.multibranch = j.value("multibranch", false);
    m.non_saturating = j.value("non_saturating", false);
    if (j.count("adam_d")) cfg.adam_d = adam_config_from_json(j.at("adam_d"));
    if (j.count("adam_g")) cfg.adam_g = adam_config_from_json(j.at("adam_g"));
    cfg.batch_real = j.value("batch_real", 64);
    cfg.batch_gen = j.value("batch_gen", 64);
    cfg.steps = j.value("steps", 0L);
    cfg.log_every = j.value("log_every", 100);
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.validate();
    return cfg;
}

namespace {

json to_json(const Rng::State& st) {
    return json{{"s", st.s}, {"has_spare", st.has_spare}, {"spare_bits", st.spare_bits}};
}

Rng::State rng_from_json(const json& j) {
    Rng::State st{};
    const auto s = need(j, "s").get<std::vector<std::uint64_t>>();
    if (s.size() != 4) fail("rng state needs four words");
    std::copy(s.begin(), s.end(), st.s.begin());
    st.has_spare = need(j, "has_spare").get<bool>();
    st.spare_bits = need(j, "spare_bits").get<std::uint64_t>();
    return st;
}

}  // namespace

json to_json(const gan::EnsembleState& st) {
    json gammas = json::array();
    for (const auto& g : st.gammas) gammas.push_back(to_json(g));
    json opt_g = json::array();
    for (const auto& o : st.opt_gammas) opt_g.push_back(to_json(o));
    return json{{"step", st.step},
                {"theta", to_json(st.theta)},
                {"gammas", gammas},
                {"adam_theta", to_json(st.opt_theta)},
                {"adam_gammas", opt_g},
                {"rng", to_json(st.rng)}};
}

gan::EnsembleState ensemble_from_json(const json& j) {
    gan::EnsembleState st;
    st.step = need(j, "step").get<long>();
    st.theta = named_tensors_from_json(need(j, "theta"));
    for (const auto& g : need(j, "gammas")) st.gammas.push_back(named_tensors_from_json(g));
    st.opt_theta = adam_state_from_json(need(j, "adam_theta"));
    for (const auto& o : need(j, "adam_gammas")) st.opt_gammas.push_back(adam_state_from_json(o));
    st.rng = rng_from_json(need(j, "rng"));
    if (st.gammas.size() != st.opt_gammas.size()) fail("generator/optimizer count mismatch");
    return st;
}

json to_json(const synth::MixtureSpec& spec) {
    json centers = json::array();
    for (const auto& c : spec.centers) centers.push_back(json::array({c[0], c[1]}));
    return json{{"centers", centers}, {"weights", spec.weights}, {"stddev", spec.stddev}};
}

synth::MixtureSpec mixture_from_json(const json& j) {
    synth::MixtureSpec spec;
    for (const auto& c : need(j, "centers")) {
        if (c.size() != 2) fail("mixture centers must be 2-D");
        spec.centers.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    spec.weights = need(j, "weights").get<std::vector<double>>();
    spec.stddev = need(j, "stddev").get<double>();
    spec.validate();
    return spec;
}

void save_checkpoint(const std::string& path, const gan::TrainConfig& cfg,
                     const gan::EnsembleState& st) {
    json j{{"format", "sgan-checkpoint"},
           {"version", 1},
           {"config", to_json(cfg)},
           {"state", to_json(st)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write '" + path + "'");
    out << j.dump(1, '\t') << '\n';
}

std::pair<gan::TrainConfig, gan::EnsembleState> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("'" + path + "' is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != "sgan-checkpoint") fail("'" + path + "' is not a checkpoint");
    return {train_config_from_json(need(j, "config")), ensemble_from_json(need(j, "state"))};
}

}  // namespace sgan
