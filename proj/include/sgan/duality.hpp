#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "sgan/rng.hpp"

namespace sgan::duality {

// Uniformly spaced 1-D grid with tabulated values.
struct GridFunction {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    double spacing() const { return (hi - lo) / (size() - 1); }
    double u(int j) const { return lo + spacing() * j; }

    static GridFunction tabulate(double lo, double hi, int n,
                                 const std::function<double(double)>& f);
};

constexpr double kGridLo = -8.0;
constexpr double kGridHi = 8.0;
constexpr int kGridN = 1601;  // spacing 0.01

// Family of pure generator strategies for the payoff
//   phi_k(theta) = a_k . theta - 0.5*|theta|^2 + b_k,
// concave and closed in theta, so ensemble duality gaps obey the
// (t+1)*delta/I bound exactly.
struct Member {
    std::array<double, 2> a{0.0, 0.0};
    double b = 0.0;
};

struct QuadraticFamily {
    int t = 1;  // theta dimension, 1 or 2
    std::vector<Member> members;

    void validate() const;
};

// Two members with a = +1 and a = -1, b = 0. Closed forms: q* = 0 for all I,
// w* = 0 for even I and 1/(2 I^2) for odd I.
QuadraticFamily pm1_family();

// t = 1 family with 2..max_members members, |a| <= 2, |b| <= 1.
QuadraticFamily random_family(int max_members, Rng& rng);

// h(u) = min_k [ 0.5*(u + a_k)^2 + b_k ]: the per-generator dual building
// block whose non-convexity drives the duality gap.
double h_point(const QuadraticFamily& fam, double u);                   // t = 1
double h_point2(const QuadraticFamily& fam, double u0, double u1);      // t = 2
GridFunction family_h(const QuadraticFamily& fam, double lo = kGridLo,
                      double hi = kGridHi, int n = kGridN);

// Discrete Legendre transform: g(v) = max_j [ v*u_j - f(u_j) ].
GridFunction conjugate_grid(const GridFunction& f, double vlo, double vhi, int n);

// Greatest convex minorant through the grid points (monotone chain).
GridFunction lower_convex_envelope(const GridFunction& f);

struct DeltaReport {
    double delta = 0.0;  // sup_u [ h(u) - cl h(u) ] on the grid
    double arg_u = 0.0;
};

DeltaReport duality_delta(const GridFunction& h);

struct MinimaxValues {
    double w_star = 0.0;  // inf over generator multisets of sup_theta
    double q_star = 0.0;  // sup_theta of inf over generators (I-independent)
};

// Exact values by multiset enumeration (w*) and golden-section ascent (q*).
// Supports t in {1, 2}; enumeration capped at 2e6 multisets.
MinimaxValues minimax_values(const QuadraticFamily& fam, int I);

struct DualityReport {
    int I = 0;
    double w_star = 0.0;
    double q_star = 0.0;
    double gap = 0.0;
    double delta_worst = 0.0;
    double bound = 0.0;  // (t+1) * delta_worst / I
    bool holds = false;  // gap >= -1e-12 and gap <= bound + 1e-9
};

// Full report; requires t = 1 (delta needs the 1-D grid envelope).
DualityReport exact_minimax(const QuadraticFamily& fam, int I, double grid_lo = kGridLo,
                            double grid_hi = kGridHi, int grid_n = kGridN);

// Exact inf-convolution of grid functions sharing one spacing; supports add.
GridFunction infconv_enumerated(const GridFunction& f, const GridFunction& g);

struct InfconvReport {
    double max_dev = 0.0;
    double tol = 0.0;  // 10 * primal spacing
    bool pass = false;
};

// Checks (f_1 + ... + f_I)* = cl(f_1* # ... # f_I*) where # is infimal
// convolution, comparing both sides on an automatically chosen dual grid.
InfconvReport infconv_check(const std::vector<GridFunction>& fs);

struct StrongDualityReport {
    double p0 = 0.0;     // perturbation value at 0 (= I * w* for these families)
    double cl_p0 = 0.0;  // closure value at 0 (= I * q*)
    double sup_q = 0.0;  // best dual value over the multipliers
    double primal_dual_dev = 0.0;  // |cl_p0 - sup_q|
    double delta_worst = 0.0;
    double nonconvexity_bound = 0.0;  // (t+1) * delta_worst
    bool pass = false;
};

// Builds p as the I-fold infimal convolution of h and verifies that the dual
// ascent attains cl p(0), with p(0) - cl p(0) inside the nonconvexity bound.
StrongDualityReport strong_duality_check(const QuadraticFamily& fam, int I,
                                         double grid_lo = kGridLo, double grid_hi = kGridHi,
                                         int grid_n = kGridN);

// --- convex decomposition utilities ---

struct ConvexCombination {
    std::vector<int> indices;  // into the original point list
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
};

// Prunes a convex combination in R^d down to at most d+1 points by repeated
// affine-dependence elimination. Preserves the represented point exactly up
// to floating drift.
ConvexCombination caratheodory_reduce(const std::vector<std::vector<double>>& points,
                                      const std::vector<double>& weights);

struct SFInstance {
    std::vector<std::vector<std::vector<double>>> sets;  // sets[i][p] in R^m
    std::vector<double> target;                          // in conv(sum of sets)
};

struct SFDecomposition {
    std::vector<int> pure_choice;                // point index per set, -1 if convexified
    std::vector<ConvexCombination> mixtures;     // per set; empty unless convexified
    std::vector<int> convexified;                // indices of non-pure sets, size <= m
    std::vector<double> reconstruction;          // sum of per-set contributions
    double reconstruction_error = 0.0;           // max-norm vs target
};

// Writes the target as a sum with at most m convexified summands (m = dim),
// each using at most m+1 points. Throws if the target is not in the hull.
SFDecomposition shapley_folkman_decompose(const SFInstance& inst, double tol = 1e-9);

// --- discrete two-player value against the optimal classifier ---

struct DiscreteGanReport {
    double value = 0.0;  // sum_x [ p log(p/(p+q)) + q log(q/(p+q)) ]
    bool matched = false;  // value within 1e-9 of 2 log(1/2)
};

// Value of the inner maximization over the classifier for finite supports.
// Minimized exactly when the two distributions coincide.
DiscreteGanReport discrete_gan_value(const std::vector<double>& p,
                                     const std::vector<double>& q);

double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace sgan::duality
