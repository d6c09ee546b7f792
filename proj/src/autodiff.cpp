#include "sgan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgan::ad {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("autodiff: " + msg); }

bool finite(double x) { return std::isfinite(x); }

}  // namespace

int Graph::add(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Graph::check_id(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size())) fail("bad node id");
}

int Graph::input(const std::string& name, int cols) {
    if (cols <= 0) fail("input '" + name + "': cols must be positive");
    if (leaf_names_.count(name)) fail("duplicate leaf name '" + name + "'");
    Node n;
    n.op = Op::input;
    n.name = name;
    n.rows = -1;
    n.cols = cols;
    int id = add(std::move(n));
    leaf_names_[name] = id;
    input_nodes_.push_back(id);
    return id;
}

int Graph::param(const std::string& name, int rows, int cols) {
    if (rows <= 0 || cols <= 0) fail("param '" + name + "': dims must be positive");
    if (leaf_names_.count(name)) fail("duplicate leaf name '" + name + "'");
    Node n;
    n.op = Op::param;
    n.name = name;
    n.rows = rows;
    n.cols = cols;
    int id = add(std::move(n));
    leaf_names_[name] = id;
    param_nodes_.push_back(id);
    return id;
}

int Graph::matmul(int a, int b) {
    check_id(a);
    check_id(b);
    const Node& na = nodes_[a];
    const Node& nb = nodes_[b];
    if (nb.rows >= 0 && na.cols != nb.rows) fail("matmul: inner dims disagree");
    Node n;
    n.op = Op::matmul;
    n.in0 = a;
    n.in1 = b;
    n.rows = na.rows;
    n.cols = nb.cols;
    return add(std::move(n));
}

int Graph::add_bias(int x, int bias) {
    check_id(x);
    check_id(bias);
    const Node& nx = nodes_[x];
    const Node& nb = nodes_[bias];
    if (nb.rows != 1 || nb.cols != nx.cols) fail("add_bias: bias must be 1 x cols(x)");
    Node n;
    n.op = Op::add_bias;
    n.in0 = x;
    n.in1 = bias;
    n.rows = nx.rows;
    n.cols = nx.cols;
    return add(std::move(n));
}

int Graph::unary(Op op, int x, double p0, double p1) {
    check_id(x);
    Node n;
    n.op = op;
    n.in0 = x;
    n.p0 = p0;
    n.p1 = p1;
    n.rows = nodes_[x].rows;
    n.cols = nodes_[x].cols;
    if (op == Op::mean || op == Op::sum) {
        n.rows = 1;
        n.cols = 1;
    }
    return add(std::move(n));
}

int Graph::tanh(int x) { return unary(Op::tanh_fn, x); }
int Graph::sigmoid(int x) { return unary(Op::sigmoid, x); }

int Graph::leaky_relu(int x, double slope) { return unary(Op::leaky_relu, x, slope); }

int Graph::log(int x, double lo, double hi) {
    if (!(lo > 0.0) || !(hi > lo)) fail("log: clamp window must satisfy 0 < lo < hi");
    return unary(Op::log_fn, x, lo, hi);
}

int Graph::log_raw(int x) { return unary(Op::log_fn, x, 0.0, 0.0); }

int Graph::mean(int x) { return unary(Op::mean, x); }
int Graph::sum(int x) { return unary(Op::sum, x); }

int Graph::scalar_affine(int x, double scale, double shift) {
    return unary(Op::scalar_affine, x, scale, shift);
}

int Graph::batchnorm(int x, double eps) {
    if (!(eps > 0.0)) fail("batchnorm: eps must be positive");
    return unary(Op::batchnorm, x, eps);
}

void Graph::mark_output(const std::string& name, int node) {
    check_id(node);
    outputs_[name] = node;
}

int Graph::output(const std::string& name) const {
    auto it = outputs_.find(name);
    if (it == outputs_.end()) fail("unknown output '" + name + "'");
    return it->second;
}

namespace {

void matmul_fwd(const Tensor& a, const Tensor& w, Tensor& c) {
    c.resize(a.rows, w.cols);
    std::fill(c.data.begin(), c.data.end(), 0.0);
    const int n = a.cols, m = w.cols;
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[static_cast<std::size_t>(i) * n];
        double* crow = &c.data[static_cast<std::size_t>(i) * m];
        for (int k = 0; k < n; ++k) {
            const double v = arow[k];
            if (v == 0.0) continue;
            const double* wrow = &w.data[static_cast<std::size_t>(k) * m];
            for (int j = 0; j < m; ++j) crow[j] += v * wrow[j];
        }
    }
}

void batchnorm_stats(const Tensor& x, double eps, std::vector<double>& inv_std,
                     std::vector<double>& mu) {
    const int r = x.rows, c = x.cols;
    mu.assign(c, 0.0);
    inv_std.assign(c, 0.0);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) mu[j] += x.at(i, j);
    for (int j = 0; j < c; ++j) mu[j] /= r;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            const double d = x.at(i, j) - mu[j];
            inv_std[j] += d * d;
        }
    for (int j = 0; j < c; ++j) inv_std[j] = 1.0 / std::sqrt(inv_std[j] / r + eps);
}

}  // namespace

void evaluate(const Graph& g, const NamedTensors& inputs, const NamedTensors& params,
              Values& out) {
    const auto& nodes = g.nodes();
    out.node_vals.resize(nodes.size());
    std::vector<double> mu, inv_std;

    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const Node& n = nodes[id];
        Tensor& y = out.node_vals[id];
        switch (n.op) {
            case Op::input: {
                auto it = inputs.find(n.name);
                if (it == inputs.end()) fail("missing input '" + n.name + "'");
                if (it->second.cols != n.cols) fail("input '" + n.name + "': wrong cols");
                y = it->second;
                break;
            }
            case Op::param: {
                auto it = params.find(n.name);
                if (it == params.end()) fail("missing param '" + n.name + "'");
                if (it->second.rows != n.rows || it->second.cols != n.cols)
                    fail("param '" + n.name + "': wrong shape");
                y = it->second;
                break;
            }
            case Op::matmul: {
                const Tensor& a = out.node_vals[n.in0];
                const Tensor& w = out.node_vals[n.in1];
                if (a.cols != w.rows) fail("matmul: inner dims disagree");
                matmul_fwd(a, w, y);
                break;
            }
            case Op::add_bias: {
                const Tensor& x = out.node_vals[n.in0];
                const Tensor& b = out.node_vals[n.in1];
                y.resize(x.rows, x.cols);
                for (int i = 0; i < x.rows; ++i)
                    for (int j = 0; j < x.cols; ++j) y.at(i, j) = x.at(i, j) + b.data[j];
                break;
            }
            case Op::tanh_fn: {
                const Tensor& x = out.node_vals[n.in0];
                y.resize(x.rows, x.cols);
                for (std::size_t k = 0; k < x.size(); ++k) y.data[k] = std::tanh(x.data[k]);
                break;
            }
            case Op::leaky_relu: {
                const Tensor& x = out.node_vals[n.in0];
                y.resize(x.rows, x.cols);
                for (std::size_t k = 0; k < x.size(); ++k) {
                    const double v = x.data[k];
                    y.data[k] = v > 0.0 ? v : n.p0 * v;
                }
                break;
            }
            case Op::sigmoid: {
                const Tensor& x = out.node_vals[n.in0];
                y.resize(x.rows, x.cols);
                for (std::size_t k = 0; k < x.size(); ++k)
                    y.data[k] = 1.0 / (1.0 + std::exp(-x.data[k]));
                break;
            }
            case Op::log_fn: {
                const Tensor& x = out.node_vals[n.in0];
                y.resize(x.rows, x.cols);
                const bool clamped = n.p0 > 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) {
                    double v = x.data[k];
                    if (clamped) {
                        v = std::clamp(v, n.p0, n.p1);
                    } else if (v <= 0.0) {
                        fail("log: non-positive input");
                    }
                    y.data[k] = std::log(v);
                }
                break;
            }
            case Op::mean:
            case Op::sum: {
                const Tensor& x = out.node_vals[n.in0];
                if (x.size() == 0) fail("mean/sum over empty tensor");
                double acc = 0.0;
                for (double v : x.data) acc += v;
                y.resize(1, 1);
                y.data[0] = n.op == Op::mean ? acc / static_cast<double>(x.size()) : acc;
                break;
            }
            case Op::scalar_affine: {
                const Tensor& x = out.node_vals[n.in0];
                y.resize(x.rows, x.cols);
                for (std::size_t k = 0; k < x.size(); ++k) y.data[k] = n.p0 * x.data[k] + n.p1;
                break;
            }
            case Op::batchnorm: {
                const Tensor& x = out.node_vals[n.in0];
                if (x.rows < 1) fail("batchnorm: empty batch");
                batchnorm_stats(x, n.p0, inv_std, mu);
                y.resize(x.rows, x.cols);
                for (int i = 0; i < x.rows; ++i)
                    for (int j = 0; j < x.cols; ++j)
                        y.at(i, j) = (x.at(i, j) - mu[j]) * inv_std[j];
                break;
            }
        }
    }
}

Values evaluate(const Graph& g, const NamedTensors& inputs, const NamedTensors& params) {
    Values v;
    evaluate(g, inputs, params, v);
    return v;
}

void backward(const Graph& g, const Values& vals, int output_node, const Tensor& seed,
              Gradients& out) {
    const auto& nodes = g.nodes();
    if (output_node < 0 || output_node >= static_cast<int>(nodes.size()))
        fail("backward: bad output node");
    const Tensor& yout = vals.at(output_node);
    if (!seed.same_shape(yout)) fail("backward: seed shape does not match output");

    std::vector<Tensor> adj(nodes.size());
    std::vector<char> live(nodes.size(), 0);
    auto touch = [&](int id, const Tensor& like) {
        if (!live[id]) {
            adj[id].resize(like.rows, like.cols);
            live[id] = 1;
        }
    };
    touch(output_node, yout);
    adj[output_node] = seed;

    std::vector<double> mu, inv_std;

    for (int id = output_node; id >= 0; --id) {
        if (!live[id]) continue;
        const Node& n = nodes[id];
        const Tensor& dy = adj[id];
        switch (n.op) {
            case Op::input:
            case Op::param:
                break;
            case Op::matmul: {
                const Tensor& a = vals.at(n.in0);
                const Tensor& w = vals.at(n.in1);
                touch(n.in0, a);
                touch(n.in1, w);
                Tensor& da = adj[n.in0];
                Tensor& dw = adj[n.in1];
                const int m = w.cols, kdim = a.cols;
                for (int i = 0; i < a.rows; ++i) {
                    const double* dyr = &dy.data[static_cast<std::size_t>(i) * m];
                    const double* ar = &a.data[static_cast<std::size_t>(i) * kdim];
                    double* dar = &da.data[static_cast<std::size_t>(i) * kdim];
                    for (int k = 0; k < kdim; ++k) {
                        const double* wr = &w.data[static_cast<std::size_t>(k) * m];
                        double* dwr = &dw.data[static_cast<std::size_t>(k) * m];
                        double acc = 0.0;
                        const double av = ar[k];
                        for (int j = 0; j < m; ++j) {
                            acc += dyr[j] * wr[j];
                            dwr[j] += av * dyr[j];
                        }
                        dar[k] += acc;
                    }
                }
                break;
            }
            case Op::add_bias: {
                const Tensor& x = vals.at(n.in0);
                const Tensor& b = vals.at(n.in1);
                touch(n.in0, x);
                touch(n.in1, b);
                Tensor& dx = adj[n.in0];
                Tensor& db = adj[n.in1];
                for (int i = 0; i < x.rows; ++i)
                    for (int j = 0; j < x.cols; ++j) {
                        dx.at(i, j) += dy.at(i, j);
                        db.data[j] += dy.at(i, j);
                    }
                break;
            }
            case Op::tanh_fn: {
                const Tensor& y = vals.at(id);
                touch(n.in0, y);
                Tensor& dx = adj[n.in0];
                for (std::size_t k = 0; k < y.size(); ++k)
                    dx.data[k] += dy.data[k] * (1.0 - y.data[k] * y.data[k]);
                break;
            }
            case Op::leaky_relu: {
                const Tensor& x = vals.at(n.in0);
                touch(n.in0, x);
                Tensor& dx = adj[n.in0];
                for (std::size_t k = 0; k < x.size(); ++k)
                    dx.data[k] += dy.data[k] * (x.data[k] > 0.0 ? 1.0 : n.p0);
                break;
            }
            case Op::sigmoid: {
                const Tensor& y = vals.at(id);
                touch(n.in0, y);
                Tensor& dx = adj[n.in0];
                for (std::size_t k = 0; k < y.size(); ++k)
                    dx.data[k] += dy.data[k] * y.data[k] * (1.0 - y.data[k]);
                break;
            }
            case Op::log_fn: {
                const Tensor& x = vals.at(n.in0);
                touch(n.in0, x);
                Tensor& dx = adj[n.in0];
                const bool clamped = n.p0 > 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) {
                    const double v = x.data[k];
                    if (clamped && (v < n.p0 || v > n.p1)) continue;  // flat outside window
                    dx.data[k] += dy.data[k] / std::max(v, clamped ? n.p0 : v);
                }
                break;
            }
            case Op::mean: {
                const Tensor& x = vals.at(n.in0);
                touch(n.in0, x);
                Tensor& dx = adj[n.in0];
                const double s = dy.data[0] / static_cast<double>(x.size());
                for (std::size_t k = 0; k < x.size(); ++k) dx.data[k] += s;
                break;
            }
            case Op::sum: {
                const Tensor& x = vals.at(n.in0);
                touch(n.in0, x);
                Tensor& dx = adj[n.in0];
                const double s = dy.data[0];
                for (std::size_t k = 0; k < x.size(); ++k) dx.data[k] += s;
                break;
            }
            case Op::scalar_affine: {
                const Tensor& x = vals.at(n.in0);
                touch(n.in0, x);
                Tensor& dx = adj[n.in0];
                for (std::size_t k = 0; k < x.size(); ++k) dx.data[k] += n.p0 * dy.data[k];
                break;
            }
            case Op::batchnorm: {
                const Tensor& x = vals.at(n.in0);
                const Tensor& y = vals.at(id);
                touch(n.in0, x);
                Tensor& dx = adj[n.in0];
                batchnorm_stats(x, n.p0, inv_std, mu);
                const int r = x.rows, c = x.cols;
                for (int j = 0; j < c; ++j) {
                    double sum_dy = 0.0, sum_dyy = 0.0;
                    for (int i = 0; i < r; ++i) {
                        sum_dy += dy.at(i, j);
                        sum_dyy += dy.at(i, j) * y.at(i, j);
                    }
                    const double mdy = sum_dy / r, mdyy = sum_dyy / r;
                    for (int i = 0; i < r; ++i)
                        dx.at(i, j) += inv_std[j] * (dy.at(i, j) - mdy - y.at(i, j) * mdyy);
                }
                break;
            }
        }
    }

    for (int id : g.param_nodes()) {
        if (!live[id]) continue;
        const std::string& name = nodes[id].name;
        auto it = out.param_grads.find(name);
        if (it == out.param_grads.end()) {
            out.param_grads[name] = adj[id];
        } else {
            for (std::size_t k = 0; k < adj[id].size(); ++k) it->second.data[k] += adj[id].data[k];
        }
    }
    for (int id : g.input_nodes()) {
        if (!live[id]) continue;
        const std::string& name = nodes[id].name;
        auto it = out.input_grads.find(name);
        if (it == out.input_grads.end()) {
            out.input_grads[name] = adj[id];
        } else {
            for (std::size_t k = 0; k < adj[id].size(); ++k) it->second.data[k] += adj[id].data[k];
        }
    }
}

Gradients backward(const Graph& g, const Values& vals, int output_node, double seed) {
    const Tensor& y = vals.at(output_node);
    Tensor s(y.rows, y.cols);
    std::fill(s.data.begin(), s.data.end(), seed);
    Gradients out;
    backward(g, vals, output_node, s, out);
    return out;
}

GradCheckReport grad_check(const Graph& g, const NamedTensors& inputs,
                           const NamedTensors& params, int output_node, double tol,
                           double step) {
    const Node& on = g.node(output_node);
    if (!(on.rows == 1 && on.cols == 1)) fail("grad_check: output must be scalar");

    Values vals = evaluate(g, inputs, params);
    Gradients grads = backward(g, vals, output_node, 1.0);

    NamedTensors p = params;
    Values scratch;
    auto eval_at = [&]() {
        evaluate(g, inputs, p, scratch);
        return scratch.at(output_node).data[0];
    };

    GradCheckReport rep;
    for (auto& [name, t] : p) {
        const Tensor* ad = nullptr;
        auto it = grads.param_grads.find(name);
        if (it != grads.param_grads.end()) ad = &it->second;
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double keep = t.data[k];
            t.data[k] = keep + step;
            const double fp = eval_at();
            t.data[k] = keep - step;
            const double fm = eval_at();
            t.data[k] = keep;
            const double fd = (fp - fm) / (2.0 * step);
            const double adv = ad ? ad->data[k] : 0.0;
            const double rel =
                std::abs(adv - fd) / std::max({1.0, std::abs(adv), std::abs(fd)});
            if (!finite(rel) || rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst_param = name;
                rep.worst_index = static_cast<int>(k);
            }
        }
    }
    rep.pass = finite(rep.max_rel_err) && rep.max_rel_err <= tol;
    return rep;
}

}  // namespace sgan::ad
