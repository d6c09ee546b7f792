#include "sgan/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace sgan::nets {

void validate_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw std::invalid_argument("nets: empty layer list");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].in <= 0 || specs[i].out <= 0)
            throw std::invalid_argument("nets: layer " + std::to_string(i) +
                                        " has non-positive dims");
        if (i > 0 && specs[i].in != specs[i - 1].out)
            throw std::invalid_argument("nets: layer " + std::to_string(i) +
                                        " input dim does not match previous output");
    }
}

std::size_t param_count(const std::vector<LayerSpec>& specs) {
    std::size_t n = 0;
    for (const auto& s : specs)
        n += static_cast<std::size_t>(s.in) * s.out + static_cast<std::size_t>(s.out);
    return n;
}

int append_mlp(ad::Graph& g, const std::vector<LayerSpec>& specs, int input_node,
               double leaky_slope) {
    validate_specs(specs);
    int x = input_node;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        const std::string tag = "L" + std::to_string(i);
        int w = g.param(tag + ".W", s.in, s.out);
        int b = g.param(tag + ".b", 1, s.out);
        x = g.add_bias(g.matmul(x, w), b);
        if (s.batchnorm) x = g.batchnorm(x);
        switch (s.act) {
            case Activation::none: break;
            case Activation::tanh: x = g.tanh(x); break;
            case Activation::leaky_relu: x = g.leaky_relu(x, leaky_slope); break;
            case Activation::sigmoid: x = g.sigmoid(x); break;
        }
    }
    return x;
}

ad::Graph build_mlp(const std::vector<LayerSpec>& specs, double leaky_slope) {
    validate_specs(specs);
    ad::Graph g;
    int x = g.input("x", specs.front().in);
    int y = append_mlp(g, specs, x, leaky_slope);
    g.mark_output("y", y);
    return g;
}

ad::NamedTensors init_params(const std::vector<LayerSpec>& specs, Rng& rng,
                             double weight_std) {
    validate_specs(specs);
    ad::NamedTensors p;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        const std::string tag = "L" + std::to_string(i);
        p[tag + ".W"] = Tensor::randn(s.in, s.out, rng, 0.0, weight_std);
        p[tag + ".b"] = Tensor(1, s.out);
    }
    return p;
}

std::vector<Block> layout_of(const ad::NamedTensors& params) {
    std::vector<Block> layout;
    std::size_t off = 0;
    for (const auto& [name, t] : params) {  // std::map iterates in name order
        layout.push_back({name, t.rows, t.cols, off});
        off += t.size();
    }
    return layout;
}

std::size_t total_size(const std::vector<Block>& layout) {
    if (layout.empty()) return 0;
    const Block& last = layout.back();
    return last.offset + static_cast<std::size_t>(last.rows) * last.cols;
}

std::vector<double> flatten(const ad::NamedTensors& params) {
    std::vector<double> flat;
    for (const auto& [name, t] : params) flat.insert(flat.end(), t.data.begin(), t.data.end());
    return flat;
}

ad::NamedTensors unflatten(const std::vector<Block>& layout, const std::vector<double>& flat) {
    if (flat.size() != total_size(layout))
        throw std::invalid_argument("nets: flat vector does not match layout size");
    ad::NamedTensors p;
    for (const Block& b : layout) {
        Tensor t(b.rows, b.cols);
        std::copy(flat.begin() + static_cast<long>(b.offset),
                  flat.begin() + static_cast<long>(b.offset + t.size()), t.data.begin());
        p[b.name] = std::move(t);
    }
    return p;
}

AdamState make_adam(const AdamConfig& cfg, std::size_t n) {
    AdamState st;
    st.cfg = cfg;
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
    return st;
}

void adam_step(ad::NamedTensors& params, const ad::NamedTensors& grads, AdamState& st) {
    const AdamConfig& c = st.cfg;
    st.step += 1;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step));

    std::size_t off = 0;
    for (auto& [name, t] : params) {
        const Tensor* g = nullptr;
        auto it = grads.find(name);
        if (it != grads.end()) {
            if (!it->second.same_shape(t))
                throw std::invalid_argument("adam: grad shape mismatch for block '" + name + "'");
            g = &it->second;
        }
        if (off + t.size() > st.m.size())
            throw std::invalid_argument("adam: state size does not match params");
        for (std::size_t k = 0; k < t.size(); ++k, ++off) {
            const double gv = g ? g->data[k] : 0.0;
            if (!std::isfinite(gv))
                throw std::runtime_error("adam: non-finite gradient in block '" + name + "'");
            st.m[off] = c.beta1 * st.m[off] + (1.0 - c.beta1) * gv;
            st.v[off] = c.beta2 * st.v[off] + (1.0 - c.beta2) * gv * gv;
            const double mh = st.m[off] / bc1;
            const double vh = st.v[off] / bc2;
            t.data[k] -= c.lr * mh / (std::sqrt(vh) + c.eps);
        }
    }
    if (off != st.m.size()) throw std::invalid_argument("adam: state size does not match params");
}

}  // namespace sgan::nets
