#pragma once

#include "buildinglab/coxgeom.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bl::inc {

using cox::ConvexSubcomplex;
using cox::WeightAssignment;

enum class Status {
    ok,
    no_negative_value,  // f >= 0 everywhere on K: minimizer not unique, nothing claimed
};

struct IncenterResult {
    Status status = Status::ok;
    Vec point;                         // unit vector
    std::optional<QVec> exact_point;   // positive multiple of point, when certified
    double value = 0;
    std::optional<ExactScalar> exact_value;
    std::vector<int> active_set;       // root indices attaining the max, in root order
    double radius_certificate = 0;     // max distance from point to the vertices of K
    int iterations = 0;
    double residual = 0;               // |f_K(point) - value|
    std::string method;                // "active-set", "wolfe" or "iterative"
};

// Minimum-norm point of the convex hull of finitely many vectors.
struct MinNorm {
    Vec point;
    std::vector<int> support;      // indices of atoms with positive weight
    std::vector<double> weights;   // aligned with support
    int iterations = 0;
};
MinNorm min_norm_enumerate(const std::vector<Vec>& atoms);
MinNorm min_norm_wolfe(const std::vector<Vec>& atoms, int max_iter = 10000);

// Weighted incenter of a top-dimensional K: the minimizer of f_K.
IncenterResult minimize(const ConvexSubcomplex& K, const WeightAssignment& w);

// Start-dependent route to the same minimizer: projected supergradient ascent
// from `start`, with periodic polishing on the currently near-active roots.
IncenterResult minimize_from(const ConvexSubcomplex& K, const WeightAssignment& w, const Vec& start,
                             int max_iter = 100000);

// Minimizer of -sin d(x, boundary C) for C the intersection of the closed
// hemispheres {<x, n_i> >= 0}; the returned value is -sin(inradius).
struct PolytopeIncenter {
    bool degenerate;
    Vec point;
    double value;
};
PolytopeIncenter polytope_incenter(const std::vector<Vec>& normals);

struct Violation {
    Vec x, y;
    double lhs, rhs;
    std::string kind;  // "inequality" or "positive"
};
using Sampler = std::function<Vec(Rng&)>;
using Function = std::function<double(const Vec&)>;

// Samples pairs (x, y) with d(x, y) < pi and tests nonpositivity plus
// f(x) + f(y) >= 2 cos(d/2) f(m) - tol with m the midpoint.
std::vector<Violation> check_nicely_convex(const Function& f, const Sampler& sample, int n_samples,
                                           Rng& rng, double tol = 1e-12);
std::vector<Violation> check_nicely_convex(const ConvexSubcomplex& K, const WeightAssignment& w,
                                           int n_samples, Rng& rng, double tol = 1e-12);

double gn_recursion(int n, double t);
double gn_bound(int n, double t);  // 2^n (1 - cos(t / 2^n))

double rad_certificate(const ConvexSubcomplex& K, const Vec& x0);

}  // namespace bl::inc
