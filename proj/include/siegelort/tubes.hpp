#pragma once

#include <array>

#include "siegel.hpp"

namespace siegelort {

// ---------------------------------------------------------------------------
// R-tube: the parallel set of singular geodesics joining two transverse
// Lagrangians. Membership is the cross-ratio condition
// R(a, Z, conj Z, b) = -Id. All nontrivial operations normalize the pair to
// (0, l_infinity) via standardize_pair and transport back, so there is a
// single tested code path.
// ---------------------------------------------------------------------------
struct RTube {
    LagrangianFrame a, b;

    RTube(LagrangianFrame a_, LagrangianFrame b_, const ToleranceProfile& tol = default_tolerances())
        : a(std::move(a_)), b(std::move(b_)) {
        if (!transverse(a, b, tol)) throw domain_error("R-tube: endpoints not transverse");
    }

    static RTube standard(int n) { return {LagrangianFrame::zero(n), LagrangianFrame::infinity(n)}; }
};

struct TubeSplitCoords {
    double euclid = 0; // pi^R
    RMat sl_part;      // pi^SL, symmetric PD with det 1
};

inline double membership_residual(const RTube& t, const SiegelPoint& z,
                                  const ToleranceProfile& tol = default_tolerances()) {
    CMat r = cross_ratio_tube(t.a, z, t.b, tol);
    return (r + CMat::identity(z.n)).max_abs();
}

inline bool contains_point(const RTube& t, const SiegelPoint& z,
                           const ToleranceProfile& tol = default_tolerances()) {
    return membership_residual(t, z, tol) < 1e-7;
}

namespace detail {

// Orderings (l1, l2, l3, l4) with t1's endpoints in slots 1, 3 and t2's in
// slots 2, 4; used both for the interleaving test and for orthogonality.
inline std::optional<std::array<const LagrangianFrame*, 4>> interleaving_order(
    const RTube& t1, const RTube& t2, const ToleranceProfile& tol) {
    const LagrangianFrame* c[4][4] = {{&t1.a, &t2.a, &t1.b, &t2.b},
                                      {&t1.a, &t2.b, &t1.b, &t2.a},
                                      {&t1.b, &t2.a, &t1.a, &t2.b},
                                      {&t1.b, &t2.b, &t1.a, &t2.a}};
    for (auto& o : c) {
        try {
            if (is_maximal_tuple({*o[0], *o[1], *o[2], *o[3]}, tol))
                return std::array<const LagrangianFrame*, 4>{o[0], o[1], o[2], o[3]};
        } catch (const domain_error&) {
            // shared or degenerate endpoints: this ordering is out
        }
    }
    return std::nullopt;
}

} // namespace detail

// Orthogonality of tubes reads off the cross-ratio of the endpoints:
// R(a, c, b, d) = 2 Id once (a, c, b, d) is oriented maximal.
inline double orthogonality_residual(const RTube& t1, const RTube& t2,
                                     const ToleranceProfile& tol = default_tolerances()) {
    auto order = detail::interleaving_order(t1, t2, tol);
    if (!order) return std::numeric_limits<double>::infinity();
    auto& o = *order;
    RMat r = cross_ratio(*o[0], *o[1], *o[2], *o[3], tol);
    return (r - RMat::identity(t1.a.n) * 2.0).max_abs();
}

inline bool tubes_orthogonal(const RTube& t1, const RTube& t2,
                             const ToleranceProfile& tol = default_tolerances()) {
    return orthogonality_residual(t1, t2, tol) < 1e-7;
}

// Intersection of interleaving tubes. After sending t1 to (0, l_inf) the
// membership condition for i Y on the transported t2 = Y_{B, C} collapses to
// the Riccati equation Y B^{-1} Y = -C, with the unique PD solution
// Y = B^{1/2} (B^{-1/2} (-C) B^{-1/2})^{1/2} B^{1/2}.
inline SiegelPoint intersect_tubes(const RTube& t1, const RTube& t2,
                                   const ToleranceProfile& tol = default_tolerances()) {
    auto order = detail::interleaving_order(t1, t2, tol);
    if (!order) throw disjoint_tubes("intersect_tubes: endpoints do not interleave");
    auto& o = *order;
    SymplecticElement g = standardize_pair(*o[0], *o[2], tol);
    RMat bch = act(g, *o[1], tol).forced_chart(tol);
    RMat cch = act(g, *o[3], tol).forced_chart(tol);
    RMat mc = cch * -1.0; // positive definite in a maximal configuration
    if (!is_positive_definite(bch, tol) || !is_positive_definite(mc, tol))
        throw disjoint_tubes("intersect_tubes: Riccati right-hand side not positive definite");
    RMat bh = sym_sqrt(bch, tol);
    RMat bhi = inverse(bh);
    RMat y = symmetrized(bh * sym_sqrt(symmetrized(bhi * mc * bhi), tol) * bh);
    SiegelPoint p = act(g.inverse(), SiegelPoint::purely_imaginary(y), tol);
    double r1 = membership_residual(t1, p, tol), r2 = membership_residual(t2, p, tol);
    if (r1 > 1e-7 || r2 > 1e-7)
        throw numerical_error("intersect_tubes: membership residual too large: " +
                              std::to_string(std::max(r1, r2)));
    return p;
}

// sigma_{a,b}: transport of diag(Id, -Id) by any symplectic element carrying
// (0, l_inf) to (a, b); the GL(n) stabilizer freedom commutes with the block
// sign matrix, so the result is well defined. Fixes a and b; determinant is
// (-1)^n. Sign convention: acts as -1 on the first endpoint, +1 on the
// second, matching sigma_{0, l_inf} = diag(Id, -Id).
inline RMat involution_matrix(const RTube& t, const ToleranceProfile& tol = default_tolerances()) {
    const int n = t.a.n;
    SymplecticElement g = standardize_pair(t.a, t.b, tol);
    RMat sgn(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        sgn(i, i) = 1.0;
        sgn(n + i, n + i) = -1.0;
    }
    return g.inverse().g * sgn * g.g;
}

inline LagrangianFrame reflect_lagrangian(const RTube& t, const LagrangianFrame& l,
                                          const ToleranceProfile& tol = default_tolerances()) {
    return apply_matrix(involution_matrix(t, tol), l, tol);
}

// Orthogonal projection of a Lagrangian in ((a, b)) onto the tube; in the
// standard position this is A -> iA.
inline SiegelPoint project_lagrangian(const RTube& t, const LagrangianFrame& l,
                                      const ToleranceProfile& tol = default_tolerances()) {
    const LagrangianFrame *pa = &t.a, *pb = &t.b;
    if (!is_maximal_triple(*pa, l, *pb, tol)) {
        std::swap(pa, pb);
        if (!is_maximal_triple(*pa, l, *pb, tol))
            throw domain_error("project_lagrangian: Lagrangian not in the interval of the tube");
    }
    SymplecticElement g = standardize_pair(*pa, *pb, tol);
    RMat chart = act(g, l, tol).forced_chart(tol);
    if (!is_positive_definite(chart, tol))
        throw numerical_error("project_lagrangian: transported chart not positive definite");
    SiegelPoint p = act(g.inverse(), SiegelPoint::purely_imaginary(chart), tol);
    if (membership_residual(t, p, tol) > 1e-7)
        throw numerical_error("project_lagrangian: projected point left the tube");
    return p;
}

// Vectorial distance of the projections of x and y onto the tube, read off
// the eigenvalues of R(a, x, y, b); equal to
// vectorial_distance(project(x), project(y)).
inline WeylVector projected_vectorial_distance(const RTube& t, const LagrangianFrame& x,
                                               const LagrangianFrame& y,
                                               const ToleranceProfile& tol = default_tolerances()) {
    const LagrangianFrame *pa = &t.a, *pb = &t.b;
    if (frames_equal(x, y, 1e-12)) {
        if (!is_maximal_triple(*pa, x, *pb, tol) && !is_maximal_triple(*pb, x, *pa, tol))
            throw domain_error("projected_vectorial_distance: point not in the tube interval");
        return WeylVector(std::vector<double>(t.a.n, 0.0), tol);
    }
    if (!is_maximal_tuple({*pa, x, y, *pb}, tol)) {
        std::swap(pa, pb);
        if (!is_maximal_tuple({*pa, x, y, *pb}, tol))
            throw domain_error("projected_vectorial_distance: (a, x, y, b) not maximal");
    }
    SymplecticElement g = standardize_pair(*pa, *pb, tol);
    RMat xc = act(g, x, tol).forced_chart(tol);
    RMat yc = act(g, y, tol).forced_chart(tol);
    std::vector<double> mu = pd_pencil_eigenvalues(xc, yc, tol);
    std::vector<double> comps;
    for (double m : mu) {
        if (m <= 0) throw numerical_error("projected_vectorial_distance: nonpositive eigenvalue");
        comps.push_back(std::log(m));
    }
    std::sort(comps.rbegin(), comps.rend());
    return WeylVector(comps, tol);
}

// ---------------------------------------------------------------------------
// Product structure of the standard tube: X -> (log det X / sqrt(n),
// X / det(X)^{1/n}), an isometry onto R x X_{SL(n)}.
// ---------------------------------------------------------------------------

inline bool on_standard_tube(const SiegelPoint& z, const ToleranceProfile& tol = default_tolerances()) {
    return z.X.max_abs() <= std::max(tol.residual_abs, 1e-7 * std::max(1.0, z.Y.max_abs()));
}

inline TubeSplitCoords product_split(const SiegelPoint& z,
                                     const ToleranceProfile& tol = default_tolerances()) {
    if (!on_standard_tube(z, tol))
        throw domain_error("product_split: point not on the standard tube");
    const int n = z.n;
    double det = determinant(z.Y);
    if (det <= 0) throw numerical_error("product_split: nonpositive determinant");
    TubeSplitCoords c;
    c.euclid = std::log(det) / std::sqrt(double(n));
    c.sl_part = z.Y * std::pow(det, -1.0 / n);
    return c;
}

inline double pi_r(const RMat& y, const ToleranceProfile& tol = default_tolerances()) {
    return product_split(SiegelPoint::purely_imaginary(y), tol).euclid;
}

inline RMat pi_sl(const RMat& y, const ToleranceProfile& tol = default_tolerances()) {
    return product_split(SiegelPoint::purely_imaginary(y), tol).sl_part;
}

// d_SL between unit-determinant PD matrices: sqrt(sum log^2 of the pencil
// eigenvalues); the normalization making the tube identification isometric.
inline double d_sl(const RMat& s1, const RMat& s2, const ToleranceProfile& tol = default_tolerances()) {
    std::vector<double> ev = pd_pencil_eigenvalues(s2, s1, tol);
    double acc = 0;
    for (double l : ev) acc += std::log(l) * std::log(l);
    return std::sqrt(acc);
}

inline double d_gl(const RMat& y1, const RMat& y2, const ToleranceProfile& tol = default_tolerances()) {
    std::vector<double> ev = pd_pencil_eigenvalues(y2, y1, tol);
    double acc = 0;
    for (double l : ev) acc += std::log(l) * std::log(l);
    return std::sqrt(acc);
}

// Causal order on the standard tube: the increment of imaginary parts is PD.
inline bool is_causal_pair(const SiegelPoint& z1, const SiegelPoint& z2,
                           const ToleranceProfile& tol = default_tolerances()) {
    if (!on_standard_tube(z1, tol) || !on_standard_tube(z2, tol))
        throw domain_error("is_causal_pair: points not on the standard tube");
    return is_positive_definite(symmetrized(z2.Y - z1.Y), tol);
}

} // namespace siegelort
