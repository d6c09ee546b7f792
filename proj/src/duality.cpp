#include "sgan/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sgan::duality {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("duality: " + msg); }

constexpr double kInf = std::numeric_limits<double>::infinity();

// Golden-section ascent of a concave function; returns the best value seen.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double width_tol, double* arg = nullptr) {
    constexpr double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 300 && b - a > width_tol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    const double fm = f(xm);
    double best = fm, bx = xm;
    if (f1 > best) { best = f1; bx = x1; }
    if (f2 > best) { best = f2; bx = x2; }
    if (arg) *arg = bx;
    return best;
}

}  // namespace

GridFunction GridFunction::tabulate(double lo, double hi, int n,
                                    const std::function<double(double)>& f) {
    if (n < 2 || !(hi > lo)) fail("grid needs hi > lo and at least two points");
    GridFunction g;
    g.lo = lo;
    g.hi = hi;
    g.values.resize(static_cast<std::size_t>(n));
    const double d = (hi - lo) / (n - 1);
    for (int j = 0; j < n; ++j) g.values[static_cast<std::size_t>(j)] = f(lo + d * j);
    return g;
}

void QuadraticFamily::validate() const {
    if (t != 1 && t != 2) fail("t must be 1 or 2");
    if (members.empty()) fail("family has no members");
}

QuadraticFamily pm1_family() {
    QuadraticFamily fam;
    fam.t = 1;
    fam.members.push_back({{1.0, 0.0}, 0.0});
    fam.members.push_back({{-1.0, 0.0}, 0.0});
    return fam;
}

QuadraticFamily random_family(int max_members, Rng& rng) {
    if (max_members < 2) fail("need at least two members");
    QuadraticFamily fam;
    fam.t = 1;
    const int k = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_members - 1)));
    for (int i = 0; i < k; ++i)
        fam.members.push_back({{rng.uniform(-2.0, 2.0), 0.0}, rng.uniform(-1.0, 1.0)});
    return fam;
}

double h_point(const QuadraticFamily& fam, double u) {
    fam.validate();
    if (fam.t != 1) fail("h_point needs t = 1");
    double best = kInf;
    for (const Member& m : fam.members) {
        const double d = u + m.a[0];
        best = std::min(best, 0.5 * d * d + m.b);
    }
    return best;
}

double h_point2(const QuadraticFamily& fam, double u0, double u1) {
    fam.validate();
    if (fam.t != 2) fail("h_point2 needs t = 2");
    double best = kInf;
    for (const Member& m : fam.members) {
        const double d0 = u0 + m.a[0], d1 = u1 + m.a[1];
        best = std::min(best, 0.5 * (d0 * d0 + d1 * d1) + m.b);
    }
    return best;
}

GridFunction family_h(const QuadraticFamily& fam, double lo, double hi, int n) {
    return GridFunction::tabulate(lo, hi, n, [&](double u) { return h_point(fam, u); });
}

GridFunction conjugate_grid(const GridFunction& f, double vlo, double vhi, int n) {
    if (f.size() < 2) fail("conjugate of trivial grid");
    GridFunction g;
    g.lo = vlo;
    g.hi = vhi;
    g.values.resize(static_cast<std::size_t>(n));
    const double dv = (vhi - vlo) / (n - 1);
    for (int j = 0; j < n; ++j) {
        const double v = vlo + dv * j;
        double best = -kInf;
        for (int i = 0; i < f.size(); ++i)
            best = std::max(best, v * f.u(i) - f.values[static_cast<std::size_t>(i)]);
        g.values[static_cast<std::size_t>(j)] = best;
    }
    return g;
}

GridFunction lower_convex_envelope(const GridFunction& f) {
    const int n = f.size();
    if (n < 2) fail("envelope of trivial grid");
    std::vector<int> hull;
    hull.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double xj = f.u(j), yj = f.values[static_cast<std::size_t>(j)];
        while (hull.size() >= 2) {
            const int i1 = hull[hull.size() - 2], i2 = hull.back();
            const double x1 = f.u(i1), y1 = f.values[static_cast<std::size_t>(i1)];
            const double x2 = f.u(i2), y2 = f.values[static_cast<std::size_t>(i2)];
            // keep i2 only if (i1, i2, j) turns counterclockwise
            if ((x2 - x1) * (yj - y1) - (y2 - y1) * (xj - x1) > 0.0) break;
            hull.pop_back();
        }
        hull.push_back(j);
    }
    GridFunction env;
    env.lo = f.lo;
    env.hi = f.hi;
    env.values.assign(static_cast<std::size_t>(n), 0.0);
    for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
        const int ia = hull[s], ib = hull[s + 1];
        const double ya = f.values[static_cast<std::size_t>(ia)];
        const double yb = f.values[static_cast<std::size_t>(ib)];
        for (int j = ia; j <= ib; ++j) {
            const double w = ib == ia ? 0.0 : static_cast<double>(j - ia) / (ib - ia);
            env.values[static_cast<std::size_t>(j)] = ya + w * (yb - ya);
        }
    }
    if (hull.size() == 1) env.values = f.values;
    return env;
}

DeltaReport duality_delta(const GridFunction& h) {
    const GridFunction env = lower_convex_envelope(h);
    DeltaReport rep;
    for (int j = 0; j < h.size(); ++j) {
        const double d = h.values[static_cast<std::size_t>(j)] - env.values[static_cast<std::size_t>(j)];
        if (d > rep.delta) {
            rep.delta = d;
            rep.arg_u = h.u(j);
        }
    }
    return rep;
}

namespace {

double multiset_count(int k, int I) {
    // C(k + I - 1, I)
    double c = 1.0;
    for (int i = 1; i <= I; ++i) c *= static_cast<double>(k - 1 + i) / i;
    return c;
}

// Enumerates all size-I multisets of members, tracking the summed a and b.
void enum_multisets(const QuadraticFamily& fam, std::size_t k, int left, double a0, double a1,
                    double bsum, int I, double& best) {
    if (k + 1 == fam.members.size()) {
        const Member& m = fam.members[k];
        const double s0 = (a0 + left * m.a[0]) / I;
        const double s1 = (a1 + left * m.a[1]) / I;
        const double val = 0.5 * (s0 * s0 + s1 * s1) + (bsum + left * m.b) / I;
        best = std::min(best, val);
        return;
    }
    const Member& m = fam.members[k];
    for (int c = 0; c <= left; ++c)
        enum_multisets(fam, k + 1, left - c, a0 + c * m.a[0], a1 + c * m.a[1],
                       bsum + c * m.b, I, best);
}

double inner_value(const QuadraticFamily& fam, double t0, double t1) {
    double worst = kInf;
    for (const Member& m : fam.members)
        worst = std::min(worst, m.a[0] * t0 + m.a[1] * t1 + m.b);
    return worst - 0.5 * (t0 * t0 + t1 * t1);
}

}  // namespace

MinimaxValues minimax_values(const QuadraticFamily& fam, int I) {
    fam.validate();
    if (I < 1) fail("I must be positive");
    if (multiset_count(static_cast<int>(fam.members.size()), I) > 2e6)
        fail("multiset enumeration too large");

    MinimaxValues mv;
    mv.w_star = kInf;
    enum_multisets(fam, 0, I, 0.0, 0.0, 0.0, I, mv.w_star);

    double alo = kInf, ahi = -kInf, alo2 = kInf, ahi2 = -kInf;
    for (const Member& m : fam.members) {
        alo = std::min(alo, m.a[0]);
        ahi = std::max(ahi, m.a[0]);
        alo2 = std::min(alo2, m.a[1]);
        ahi2 = std::max(ahi2, m.a[1]);
    }
    if (fam.t == 1) {
        mv.q_star = golden_max([&](double t0) { return inner_value(fam, t0, 0.0); },
                               alo - 1.0, ahi + 1.0, 1e-13);
    } else {
        mv.q_star = golden_max(
            [&](double t0) {
                return golden_max([&](double t1) { return inner_value(fam, t0, t1); },
                                  alo2 - 1.0, ahi2 + 1.0, 1e-13);
            },
            alo - 1.0, ahi + 1.0, 1e-13);
    }
    return mv;
}

DualityReport exact_minimax(const QuadraticFamily& fam, int I, double grid_lo, double grid_hi,
                            int grid_n) {
    fam.validate();
    if (fam.t != 1) fail("exact_minimax reports need t = 1");
    const MinimaxValues mv = minimax_values(fam, I);
    const GridFunction h = family_h(fam, grid_lo, grid_hi, grid_n);
    const DeltaReport dr = duality_delta(h);

    DualityReport rep;
    rep.I = I;
    rep.w_star = mv.w_star;
    rep.q_star = mv.q_star;
    rep.gap = mv.w_star - mv.q_star;
    rep.delta_worst = dr.delta;
    rep.bound = (fam.t + 1) * dr.delta / I;
    rep.holds = rep.gap >= -1e-12 && rep.gap <= rep.bound + 1e-9;
    return rep;
}

GridFunction infconv_enumerated(const GridFunction& f, const GridFunction& g) {
    const double df = f.spacing(), dg = g.spacing();
    if (std::abs(df - dg) > 1e-9 * std::max(1.0, df)) fail("infconv needs equal spacings");
    const int nf = f.size(), ng = g.size();
    GridFunction w;
    w.lo = f.lo + g.lo;
    w.hi = f.hi + g.hi;
    w.values.assign(static_cast<std::size_t>(nf + ng - 1), kInf);
    for (int s = 0; s < nf + ng - 1; ++s) {
        const int i0 = std::max(0, s - (ng - 1)), i1 = std::min(nf - 1, s);
        double best = kInf;
        for (int i = i0; i <= i1; ++i)
            best = std::min(best, f.values[static_cast<std::size_t>(i)] +
                                      g.values[static_cast<std::size_t>(s - i)]);
        w.values[static_cast<std::size_t>(s)] = best;
    }
    return w;
}

namespace {

void require_same_grid(const std::vector<GridFunction>& fs) {
    for (const GridFunction& f : fs) {
        if (f.size() != fs[0].size() || std::abs(f.lo - fs[0].lo) > 1e-12 ||
            std::abs(f.hi - fs[0].hi) > 1e-12)
            fail("grid functions must share one grid");
    }
}

std::pair<double, double> chord_slopes(const GridFunction& f) {
    double lo = kInf, hi = -kInf;
    for (int j = 0; j + 1 < f.size(); ++j) {
        const double s = (f.values[static_cast<std::size_t>(j + 1)] -
                          f.values[static_cast<std::size_t>(j)]) /
                         f.spacing();
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

}  // namespace

InfconvReport infconv_check(const std::vector<GridFunction>& fs) {
    if (fs.empty()) fail("no grid functions given");
    require_same_grid(fs);
    const int I = static_cast<int>(fs.size());
    const double dp = fs[0].spacing();

    GridFunction sum = fs[0];
    for (int i = 1; i < I; ++i)
        for (int j = 0; j < sum.size(); ++j)
            sum.values[static_cast<std::size_t>(j)] += fs[i].values[static_cast<std::size_t>(j)];

    // Dual grid: symmetric, spacing ~ half the primal spacing, wide enough to
    // cover every chord slope so both conjugates stay exact piecewise-linear.
    const auto [slo, shi] = chord_slopes(sum);
    double smax = std::max(std::abs(slo), std::abs(shi)) + 1.0;
    for (const GridFunction& f : fs) {
        const auto [flo, fhi] = chord_slopes(f);
        smax = std::max({smax, std::abs(flo) + 1.0, std::abs(fhi) + 1.0});
    }
    const double dv = dp / 2.0;
    const int half = static_cast<int>(std::ceil(smax / dv));
    const double S = half * dv;
    const int nv = 2 * half + 1;

    const GridFunction lhs = conjugate_grid(sum, -S, S, nv);

    std::vector<GridFunction> conjs;
    conjs.reserve(fs.size());
    for (const GridFunction& f : fs) conjs.push_back(conjugate_grid(f, -S, S, nv));
    GridFunction fold = conjs[0];
    for (int i = 1; i < I; ++i) fold = infconv_enumerated(fold, conjs[static_cast<std::size_t>(i)]);
    const GridFunction env = lower_convex_envelope(fold);

    // fold grid starts at -I*S; dual point j sits at offset (I-1)*half + j.
    const int off = (I - 1) * half;
    InfconvReport rep;
    rep.tol = 10.0 * dp;
    for (int j = 0; j < nv; ++j) {
        const double dev = std::abs(lhs.values[static_cast<std::size_t>(j)] -
                                    env.values[static_cast<std::size_t>(off + j)]);
        rep.max_dev = std::max(rep.max_dev, dev);
    }
    rep.pass = rep.max_dev <= rep.tol;
    return rep;
}

StrongDualityReport strong_duality_check(const QuadraticFamily& fam, int I, double grid_lo,
                                         double grid_hi, int grid_n) {
    fam.validate();
    if (fam.t != 1) fail("strong_duality_check needs t = 1");
    if (I < 1) fail("I must be positive");
    if (std::abs(grid_lo + grid_hi) > 1e-12 || grid_n % 2 == 0)
        fail("strong duality grid must be symmetric with odd point count");

    const GridFunction h = family_h(fam, grid_lo, grid_hi, grid_n);
    GridFunction w = h;
    for (int i = 1; i < I; ++i) w = infconv_enumerated(w, h);

    const int mid = I * ((grid_n - 1) / 2);  // index of u = 0 in the folded grid
    const GridFunction env = lower_convex_envelope(w);

    StrongDualityReport rep;
    rep.p0 = w.values[static_cast<std::size_t>(mid)];
    rep.cl_p0 = env.values[static_cast<std::size_t>(mid)];
    rep.delta_worst = duality_delta(h).delta;
    rep.nonconvexity_bound = (fam.t + 1) * rep.delta_worst;

    const auto [slo, shi] = chord_slopes(w);
    auto dual_value = [&](double mu) {
        double best = kInf;
        for (int j = 0; j < w.size(); ++j)
            best = std::min(best, w.values[static_cast<std::size_t>(j)] - mu * w.u(j));
        return best;
    };
    rep.sup_q = golden_max(dual_value, slo - 1.0, shi + 1.0, 1e-11);
    rep.primal_dual_dev = std::abs(rep.cl_p0 - rep.sup_q);

    const double dp = h.spacing();
    const double nonconv = rep.p0 - rep.cl_p0;
    rep.pass = rep.primal_dual_dev <= 10.0 * dp && nonconv >= -1e-9 &&
               nonconv <= rep.nonconvexity_bound + 1e-9;
    return rep;
}

namespace {

// Nontrivial null vector of a rows x cols matrix with cols > rank.
std::vector<double> null_vector(std::vector<std::vector<double>> m) {
    const int rows = static_cast<int>(m.size());
    const int cols = static_cast<int>(m[0].size());
    std::vector<int> pivot_col(static_cast<std::size_t>(rows), -1);
    std::vector<char> is_pivot(static_cast<std::size_t>(cols), 0);
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int pr = -1;
        double best = 1e-11;
        for (int i = r; i < rows; ++i)
            if (std::abs(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]) > best) {
                best = std::abs(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
                pr = i;
            }
        if (pr < 0) continue;
        std::swap(m[static_cast<std::size_t>(r)], m[static_cast<std::size_t>(pr)]);
        const double piv = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        for (int j = c; j < cols; ++j) m[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double s = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            if (s == 0.0) continue;
            for (int j = c; j < cols; ++j)
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                    s * m[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        }
        pivot_col[static_cast<std::size_t>(r)] = c;
        is_pivot[static_cast<std::size_t>(c)] = 1;
        ++r;
    }
    int free_col = -1;
    for (int c = 0; c < cols; ++c)
        if (!is_pivot[static_cast<std::size_t>(c)]) {
            free_col = c;
            break;
        }
    if (free_col < 0) fail("no affine dependence found");
    std::vector<double> mu(static_cast<std::size_t>(cols), 0.0);
    mu[static_cast<std::size_t>(free_col)] = 1.0;
    for (int i = 0; i < rows; ++i)
        if (pivot_col[static_cast<std::size_t>(i)] >= 0)
            mu[static_cast<std::size_t>(pivot_col[static_cast<std::size_t>(i)])] =
                -m[static_cast<std::size_t>(i)][static_cast<std::size_t>(free_col)];
    return mu;
}

}  // namespace

ConvexCombination caratheodory_reduce(const std::vector<std::vector<double>>& points,
                                      const std::vector<double>& weights) {
    if (points.empty() || points.size() != weights.size())
        fail("points/weights size mismatch");
    const std::size_t d = points[0].size();
    if (d == 0) fail("points must have dimension >= 1");
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (points[i].size() != d) fail("points have mixed dimensions");
        if (weights[i] < -1e-9) fail("weights are not a convex combination (negative)");
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("weights are not a convex combination (sum != 1)");

    std::vector<int> active;
    std::vector<double> w(weights);
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::max(w[i], 0.0) / sum;
        if (w[i] > 0.0) active.push_back(static_cast<int>(i));
    }

    while (active.size() > d + 1) {
        // columns are the active points lifted with a trailing 1
        std::vector<std::vector<double>> m(d + 1, std::vector<double>(active.size()));
        for (std::size_t c = 0; c < active.size(); ++c) {
            for (std::size_t r = 0; r < d; ++r)
                m[r][c] = points[static_cast<std::size_t>(active[c])][r];
            m[d][c] = 1.0;
        }
        std::vector<double> mu = null_vector(std::move(m));
        bool has_pos = false;
        for (double v : mu)
            if (v > 1e-13) has_pos = true;
        if (!has_pos)
            for (double& v : mu) v = -v;

        double alpha = kInf;
        std::size_t drop = 0;
        for (std::size_t c = 0; c < active.size(); ++c) {
            if (mu[c] <= 1e-13) continue;
            const double ratio = w[static_cast<std::size_t>(active[c])] / mu[c];
            if (ratio < alpha) {
                alpha = ratio;
                drop = c;
            }
        }
        for (std::size_t c = 0; c < active.size(); ++c)
            w[static_cast<std::size_t>(active[c])] -= alpha * mu[c];
        w[static_cast<std::size_t>(active[drop])] = 0.0;
        active.erase(active.begin() + static_cast<long>(drop));
        for (std::size_t c = 0; c < active.size(); ++c) {
            double& wc = w[static_cast<std::size_t>(active[c])];
            if (wc < 0.0) wc = 0.0;  // clip floating dust
        }
    }

    double s2 = 0.0;
    for (int i : active) s2 += w[static_cast<std::size_t>(i)];
    ConvexCombination out;
    for (int i : active) {
        out.indices.push_back(i);
        out.points.push_back(points[static_cast<std::size_t>(i)]);
        out.weights.push_back(w[static_cast<std::size_t>(i)] / s2);
    }
    return out;
}

namespace {

// Phase-1 simplex for A x = b, x >= 0 (dense, Bland's rule). Returns a basic
// feasible solution; throws if the system is infeasible.
std::vector<double> phase1_simplex(std::vector<std::vector<double>> a, std::vector<double> b,
                                   double feas_tol) {
    const int rows = static_cast<int>(a.size());
    const int nreal = static_cast<int>(a[0].size());
    for (int i = 0; i < rows; ++i)
        if (b[static_cast<std::size_t>(i)] < 0.0) {
            b[static_cast<std::size_t>(i)] = -b[static_cast<std::size_t>(i)];
            for (double& v : a[static_cast<std::size_t>(i)]) v = -v;
        }

    const int ncols = nreal + rows;
    std::vector<std::vector<double>> t(static_cast<std::size_t>(rows),
                                       std::vector<double>(static_cast<std::size_t>(ncols + 1), 0.0));
    std::vector<int> basis(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < nreal; ++j) t[i][static_cast<std::size_t>(j)] = a[i][static_cast<std::size_t>(j)];
        t[i][static_cast<std::size_t>(nreal + i)] = 1.0;
        t[i][static_cast<std::size_t>(ncols)] = b[static_cast<std::size_t>(i)];
        basis[static_cast<std::size_t>(i)] = nreal + i;
    }
    // reduced costs for minimizing the artificial sum
    std::vector<double> obj(static_cast<std::size_t>(ncols), 0.0);
    for (int j = 0; j < nreal; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows; ++i) s += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        obj[static_cast<std::size_t>(j)] = -s;
    }

    for (int iter = 0; iter < 20000; ++iter) {
        int enter = -1;
        for (int j = 0; j < nreal; ++j)  // artificials never re-enter
            if (obj[static_cast<std::size_t>(j)] < -1e-11) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        double best_ratio = kInf;
        for (int i = 0; i < rows; ++i) {
            const double piv = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
            if (piv <= 1e-11) continue;
            const double ratio = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(ncols)] / piv;
            if (ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 && leave >= 0 &&
                 basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                best_ratio = ratio;
                leave = i;
            }
        }
        if (leave < 0) fail("phase-1 simplex unbounded");  // cannot happen

        const double piv = t[static_cast<std::size_t>(leave)][static_cast<std::size_t>(enter)];
        for (double& v : t[static_cast<std::size_t>(leave)]) v /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == leave) continue;
            const double s = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
            if (s == 0.0) continue;
            for (int j = 0; j <= ncols; ++j)
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                    s * t[static_cast<std::size_t>(leave)][static_cast<std::size_t>(j)];
        }
        const double so = obj[static_cast<std::size_t>(enter)];
        if (so != 0.0)
            for (int j = 0; j < ncols; ++j)
                obj[static_cast<std::size_t>(j)] -=
                    so * t[static_cast<std::size_t>(leave)][static_cast<std::size_t>(j)];
        basis[static_cast<std::size_t>(leave)] = enter;
    }

    double residual = 0.0;
    for (int i = 0; i < rows; ++i)
        if (basis[static_cast<std::size_t>(i)] >= nreal)
            residual += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(ncols)];
    if (residual > feas_tol) fail("target is not in the convex hull of the set sum");

    std::vector<double> x(static_cast<std::size_t>(nreal), 0.0);
    for (int i = 0; i < rows; ++i)
        if (basis[static_cast<std::size_t>(i)] < nreal)
            x[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] =
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(ncols)];
    return x;
}

}  // namespace

SFDecomposition shapley_folkman_decompose(const SFInstance& inst, double tol) {
    const int nsets = static_cast<int>(inst.sets.size());
    const int m = static_cast<int>(inst.target.size());
    if (nsets < 1) fail("need at least one set");
    if (m < 1) fail("target must have dimension >= 1");
    std::vector<int> base(static_cast<std::size_t>(nsets), 0);
    int nvars = 0;
    for (int i = 0; i < nsets; ++i) {
        if (inst.sets[static_cast<std::size_t>(i)].empty()) fail("set " + std::to_string(i) + " is empty");
        for (const auto& p : inst.sets[static_cast<std::size_t>(i)])
            if (static_cast<int>(p.size()) != m) fail("point dimension != target dimension");
        base[static_cast<std::size_t>(i)] = nvars;
        nvars += static_cast<int>(inst.sets[static_cast<std::size_t>(i)].size());
    }

    // rows: one convexity constraint per set, then m coordinate constraints
    std::vector<std::vector<double>> a(static_cast<std::size_t>(nsets + m),
                                       std::vector<double>(static_cast<std::size_t>(nvars), 0.0));
    std::vector<double> b(static_cast<std::size_t>(nsets + m), 0.0);
    for (int i = 0; i < nsets; ++i) {
        const auto& set = inst.sets[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < set.size(); ++p) {
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(base[static_cast<std::size_t>(i)]) + p] = 1.0;
            for (int r = 0; r < m; ++r)
                a[static_cast<std::size_t>(nsets + r)][static_cast<std::size_t>(base[static_cast<std::size_t>(i)]) + p] =
                    set[p][static_cast<std::size_t>(r)];
        }
        b[static_cast<std::size_t>(i)] = 1.0;
    }
    for (int r = 0; r < m; ++r) b[static_cast<std::size_t>(nsets + r)] = inst.target[static_cast<std::size_t>(r)];

    const std::vector<double> lambda = phase1_simplex(std::move(a), std::move(b), 1e-7);

    SFDecomposition dec;
    dec.pure_choice.assign(static_cast<std::size_t>(nsets), -1);
    dec.mixtures.resize(static_cast<std::size_t>(nsets));
    dec.reconstruction.assign(static_cast<std::size_t>(m), 0.0);

    for (int i = 0; i < nsets; ++i) {
        const auto& set = inst.sets[static_cast<std::size_t>(i)];
        std::vector<int> support;
        for (std::size_t p = 0; p < set.size(); ++p)
            if (lambda[static_cast<std::size_t>(base[static_cast<std::size_t>(i)]) + p] > 1e-11)
                support.push_back(static_cast<int>(p));
        if (support.size() <= 1) {
            const int pick = support.empty() ? 0 : support[0];
            dec.pure_choice[static_cast<std::size_t>(i)] = pick;
            for (int r = 0; r < m; ++r)
                dec.reconstruction[static_cast<std::size_t>(r)] += set[static_cast<std::size_t>(pick)][static_cast<std::size_t>(r)];
            continue;
        }
        std::vector<std::vector<double>> pts;
        std::vector<double> wts;
        double s = 0.0;
        for (int p : support) {
            pts.push_back(set[static_cast<std::size_t>(p)]);
            const double w = lambda[static_cast<std::size_t>(base[static_cast<std::size_t>(i)] + p)];
            wts.push_back(w);
            s += w;
        }
        for (double& w : wts) w /= s;
        ConvexCombination mix = caratheodory_reduce(pts, wts);
        // map back to indices within the set
        for (int& idx : mix.indices) idx = support[static_cast<std::size_t>(idx)];
        if (static_cast<int>(mix.indices.size()) == 1) {
            dec.pure_choice[static_cast<std::size_t>(i)] = mix.indices[0];
            for (int r = 0; r < m; ++r)
                dec.reconstruction[static_cast<std::size_t>(r)] +=
                    mix.points[0][static_cast<std::size_t>(r)];
            continue;
        }
        dec.convexified.push_back(i);
        for (std::size_t k = 0; k < mix.indices.size(); ++k)
            for (int r = 0; r < m; ++r)
                dec.reconstruction[static_cast<std::size_t>(r)] +=
                    mix.weights[k] * mix.points[k][static_cast<std::size_t>(r)];
        dec.mixtures[static_cast<std::size_t>(i)] = std::move(mix);
    }

    dec.reconstruction_error = 0.0;
    for (int r = 0; r < m; ++r)
        dec.reconstruction_error =
            std::max(dec.reconstruction_error,
                     std::abs(dec.reconstruction[static_cast<std::size_t>(r)] -
                              inst.target[static_cast<std::size_t>(r)]));
    if (dec.reconstruction_error > tol)
        throw std::runtime_error("duality: decomposition drifted beyond tolerance");
    return dec;
}

namespace {

void check_distribution(const std::vector<double>& p, const char* name) {
    if (p.empty()) fail(std::string(name) + " is empty");
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) fail(std::string(name) + " has a negative entry");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) fail(std::string(name) + " does not sum to 1");
}

}  // namespace

DiscreteGanReport discrete_gan_value(const std::vector<double>& p,
                                     const std::vector<double>& q) {
    check_distribution(p, "p");
    check_distribution(q, "q");
    if (p.size() != q.size()) fail("p and q must share a support");
    double value = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double s = p[i] + q[i];
        if (p[i] > 0.0) value += p[i] * std::log(p[i] / s);
        if (q[i] > 0.0) value += q[i] * std::log(q[i] / s);
    }
    DiscreteGanReport rep;
    rep.value = value;
    rep.matched = std::abs(value - 2.0 * std::log(0.5)) <= 1e-9;
    return rep;
}

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    check_distribution(p, "p");
    check_distribution(q, "q");
    if (p.size() != q.size()) fail("p and q must share a support");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) d += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) d += 0.5 * q[i] * std::log(q[i] / m);
    }
    return d;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) fail("p and q must share a support");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return 0.5 * d;
}

}  // namespace sgan::duality
