#pragma once

#include <optional>

#include "linalg.hpp"

namespace siegelort {

// ---------------------------------------------------------------------------
// Value in the closed model Weyl chamber: x1 >= ... >= xn >= 0.
// ---------------------------------------------------------------------------
struct WeylVector {
    std::vector<double> x;

    WeylVector() = default;
    explicit WeylVector(std::vector<double> comps, const ToleranceProfile& tol = default_tolerances())
        : x(std::move(comps)) {
        double scale = 0;
        for (double v : x) scale = std::max(scale, std::abs(v));
        double slack = std::max(tol.residual_abs, tol.compare_rel * scale);
        for (size_t i = 0; i + 1 < x.size(); ++i)
            if (x[i] < x[i + 1] - slack) throw numerical_error("Weyl vector not sorted");
        for (double& v : x) {
            if (v < -slack) throw numerical_error("Weyl vector has a negative component");
            if (v < 0) v = 0;
        }
        std::sort(x.rbegin(), x.rend());
    }

    int n() const { return static_cast<int>(x.size()); }
    double riemannian() const {
        double s = 0;
        for (double v : x) s += v * v;
        return std::sqrt(s);
    }
    double finsler() const {
        double s = 0;
        for (double v : x) s += v;
        return 0.5 * s;
    }
    double smallest() const { return x.back(); }
};

// ---------------------------------------------------------------------------
// Element of Sp(2n, R).
// ---------------------------------------------------------------------------
struct SymplecticElement {
    int n = 0;
    RMat g;

    SymplecticElement() = default;
    SymplecticElement(int rank, RMat m, const ToleranceProfile& tol = default_tolerances())
        : n(rank), g(std::move(m)) {
        if (g.rows != 2 * n || g.cols != 2 * n) throw domain_error("symplectic element: wrong shape");
        if (!g.all_finite()) throw domain_error("symplectic element: non-finite entries");
        RMat j = symplectic_form(n);
        double defect = (g.transpose() * j * g - j).max_abs();
        if (defect > 1e3 * tol.residual_abs * std::max(1.0, g.max_abs() * g.max_abs()))
            throw domain_error("symplectic element: g^T J g != J, defect " + std::to_string(defect));
    }

    static SymplecticElement identity(int n) { return {n, RMat::identity(2 * n)}; }

    // For symplectic g the inverse is -J g^T J, exactly.
    SymplecticElement inverse() const {
        RMat j = symplectic_form(n);
        return {n, (j * g.transpose() * j) * -1.0};
    }

    SymplecticElement operator*(const SymplecticElement& o) const { return {n, g * o.g}; }

    RMat block_a() const { return g.block(0, 0, n, n); }
    RMat block_b() const { return g.block(0, n, n, n); }
    RMat block_c() const { return g.block(n, 0, n, n); }
    RMat block_d() const { return g.block(n, n, n, n); }
};

// Assemble [[A, B], [C, D]] from n x n blocks.
inline RMat from_blocks(const RMat& a, const RMat& b, const RMat& c, const RMat& d) {
    const int n = a.rows;
    RMat m(2 * n, 2 * n);
    m.set_block(0, 0, a);
    m.set_block(0, n, b);
    m.set_block(n, 0, c);
    m.set_block(n, n, d);
    return m;
}

inline SymplecticElement block_diagonal_symplectic(int n, const RMat& a) {
    return {n, from_blocks(a, RMat::zero(n, n), RMat::zero(n, n), inverse(a).transpose())};
}

// ---------------------------------------------------------------------------
// Lagrangian subspace of R^{2n}, stored as an orthonormal 2n x n frame. The
// frame is authoritative; the affine chart (when the subspace is transverse
// to l_infinity) is a cache.
// ---------------------------------------------------------------------------
struct LagrangianFrame {
    int n = 0;
    RMat F; // orthonormal columns
    std::optional<RMat> chart;
    bool at_infinity = false;

    static LagrangianFrame from_frame(const RMat& raw_in, const ToleranceProfile& tol = default_tolerances()) {
        LagrangianFrame l;
        l.n = raw_in.cols;
        if (raw_in.rows != 2 * l.n) throw domain_error("lagrangian frame: wrong shape");
        if (!raw_in.all_finite()) throw domain_error("lagrangian frame: non-finite entries");
        // Frames are defined up to the GL(n) column action, so rank is tested
        // after balancing the column norms.
        RMat raw = raw_in;
        for (int j = 0; j < l.n; ++j) {
            double s = 0;
            for (int i = 0; i < 2 * l.n; ++i) s += raw(i, j) * raw(i, j);
            s = std::sqrt(s);
            if (s <= 0) throw domain_error("lagrangian frame: zero column");
            for (int i = 0; i < 2 * l.n; ++i) raw(i, j) /= s;
        }
        if (smallest_singular_value(raw) <= tol.pd_margin)
            throw domain_error("lagrangian frame: rank deficient");
        l.F = orthonormal_columns(raw);
        RMat iso = l.F.transpose() * symplectic_form(l.n) * l.F;
        if (iso.max_abs() > 1e3 * tol.residual_abs)
            throw domain_error("lagrangian frame: not isotropic, defect " + std::to_string(iso.max_abs()));
        l.refresh_chart(tol);
        return l;
    }

    static LagrangianFrame from_chart(const RMat& z, const ToleranceProfile& tol = default_tolerances()) {
        const int n = z.rows;
        if (symmetry_defect(z) > tol.residual_abs * std::max(1.0, z.max_abs()))
            throw domain_error("lagrangian chart: not symmetric");
        LagrangianFrame l = from_frame(vcat(z, RMat::identity(n)), tol);
        l.chart = symmetrized(z);
        return l;
    }

    static LagrangianFrame infinity(int n) {
        LagrangianFrame l;
        l.n = n;
        l.F = vcat(RMat::identity(n), RMat::zero(n, n));
        l.at_infinity = true;
        return l;
    }

    static LagrangianFrame zero(int n) { return from_chart(RMat::zero(n, n)); }

    void refresh_chart(const ToleranceProfile& tol = default_tolerances()) {
        chart.reset();
        RMat bottom = F.block(n, 0, n, n);
        at_infinity = bottom.max_abs() <= tol.residual_abs;
        if (smallest_singular_value(bottom) > 1e-6) {
            RMat z = solve(bottom.transpose(), F.block(0, 0, n, n).transpose()).transpose();
            chart = symmetrized(z);
        }
    }

    // Chart under the weaker pd_margin transversality threshold; for callers
    // that have already established transversality to l_infinity.
    RMat forced_chart(const ToleranceProfile& tol = default_tolerances()) const {
        if (chart) return *chart;
        RMat bottom = F.block(n, 0, n, n);
        if (smallest_singular_value(bottom) <= tol.pd_margin)
            throw numerical_error("lagrangian frame: no affine chart (at infinity)");
        RMat z = solve(bottom.transpose(), F.block(0, 0, n, n).transpose()).transpose();
        return symmetrized(z);
    }

    // Projector onto the subspace; basis-free, used for comparisons.
    RMat projector() const { return F * F.transpose(); }

    // Canonical dedup key: chart rounded to 1e-6 when available, otherwise
    // the projector rounded the same way.
    std::vector<long long> canonical_key() const {
        std::vector<long long> key;
        const RMat& m = chart ? *chart : projector();
        key.push_back(chart ? 1 : 0);
        for (double v : m.a) key.push_back(std::llround(v * 1e6));
        return key;
    }
};

inline bool frames_equal(const LagrangianFrame& a, const LagrangianFrame& b, double tol = 1e-7) {
    return (a.projector() - b.projector()).max_abs() < tol;
}

inline bool transverse(const LagrangianFrame& a, const LagrangianFrame& b,
                       const ToleranceProfile& tol = default_tolerances()) {
    if (a.n != b.n) throw domain_error("transverse: rank mismatch");
    return smallest_singular_value(hcat(a.F, b.F)) > tol.pd_margin;
}

inline LagrangianFrame act(const SymplecticElement& g, const LagrangianFrame& l,
                           const ToleranceProfile& tol = default_tolerances()) {
    return LagrangianFrame::from_frame(g.g * l.F, tol);
}

// Action of a non-symplectic matrix (tube involutions) on a frame.
inline LagrangianFrame apply_matrix(const RMat& m, const LagrangianFrame& l,
                                    const ToleranceProfile& tol = default_tolerances()) {
    return LagrangianFrame::from_frame(m * l.F, tol);
}

// ---------------------------------------------------------------------------
// Upper half-space point Z = X + iY, Y positive definite.
// ---------------------------------------------------------------------------
struct SiegelPoint {
    int n = 0;
    RMat X, Y;

    SiegelPoint() = default;
    SiegelPoint(RMat x, RMat y, const ToleranceProfile& tol = default_tolerances())
        : n(x.rows), X(std::move(x)), Y(std::move(y)) {
        if (symmetry_defect(X) > 1e3 * tol.residual_abs * std::max(1.0, X.max_abs()) ||
            symmetry_defect(Y) > 1e3 * tol.residual_abs * std::max(1.0, Y.max_abs()))
            throw domain_error("siegel point: parts not symmetric");
        X = symmetrized(X);
        Y = symmetrized(Y);
        if (!is_positive_definite(Y, tol))
            throw domain_error("siegel point: imaginary part not positive definite");
    }

    static SiegelPoint purely_imaginary(const RMat& y) { return {RMat::zero(y.rows, y.cols), y}; }

    CMat chart() const { return complex_of(X, Y); }
    CMat chart_conj() const { return complex_of(X, Y * -1.0); }
};

// ---------------------------------------------------------------------------
// Cross-ratio R(l1, l2, l3, l4) = p^{l2-parallel}_{l1} o p^{l3-parallel}_{l4}
// restricted to l1. In the affine chart this is
// (X1-X2)^{-1} (X4-X2) (X4-X3)^{-1} (X1-X3).
// ---------------------------------------------------------------------------

template <class T>
Mat<T> cross_ratio_chart(const Mat<T>& x1, const Mat<T>& x2, const Mat<T>& x3, const Mat<T>& x4) {
    return solve(x1 - x2, x4 - x2) * solve(x4 - x3, x1 - x3);
}

namespace detail {

template <class T>
Mat<T> cross_ratio_frames(const Mat<T>& f1, const Mat<T>& f2, const Mat<T>& f3, const Mat<T>& f4,
                          const ToleranceProfile& tol) {
    const int n = f1.cols;
    Mat<T> m43 = hcat(f4, f3);
    Mat<T> m12 = hcat(f1, f2);
    if (pivot_condition(m43) > tol.condition_cap || pivot_condition(m12) > tol.condition_cap)
        throw numerical_error("cross-ratio: frames too close to degenerate");
    Mat<T> coeff = solve(m43, f1);
    Mat<T> proj = f4 * coeff.block(0, 0, n, n);
    Mat<T> res = solve(m12, proj);
    return res.block(0, 0, n, n);
}

} // namespace detail

// The matrix is expressed in the basis (chart over Id) when l1 carries a
// chart, so that it literally matches the affine-chart formula; otherwise in
// l1's orthonormal frame basis. Eigenvalues and determinant never depend on
// the choice.
inline RMat cross_ratio(const LagrangianFrame& l1, const LagrangianFrame& l2,
                        const LagrangianFrame& l3, const LagrangianFrame& l4,
                        const ToleranceProfile& tol = default_tolerances()) {
    if (!transverse(l1, l2, tol) || !transverse(l3, l4, tol))
        throw domain_error("cross-ratio: transversality failure");
    RMat f1 = l1.chart ? vcat(*l1.chart, RMat::identity(l1.n)) : l1.F;
    return detail::cross_ratio_frames(f1, l2.F, l3.F, l4.F, tol);
}

// Complex cross-ratio of Siegel points against real Lagrangian endpoints,
// R(a, Z, conj(Z), b); used for tube membership.
inline CMat cross_ratio_tube(const LagrangianFrame& a, const SiegelPoint& z, const LagrangianFrame& b,
                             const ToleranceProfile& tol = default_tolerances()) {
    const int n = a.n;
    CMat f1 = a.chart ? to_complex(vcat(*a.chart, RMat::identity(n))) : to_complex(a.F);
    CMat fz = vcat(z.chart(), CMat::identity(n));
    CMat fzc = vcat(z.chart_conj(), CMat::identity(n));
    return detail::cross_ratio_frames(f1, fz, fzc, to_complex(b.F), tol);
}

// ---------------------------------------------------------------------------
// Maximality.
// ---------------------------------------------------------------------------

inline SymplecticElement standardize_pair(const LagrangianFrame& a, const LagrangianFrame& b,
                                          const ToleranceProfile& tol = default_tolerances());

// (l1, l2, l3) maximal iff, transported so that l1 = l_inf and l2 = 0, the
// chart of l3 is positive definite.
inline bool is_maximal_triple(const LagrangianFrame& l1, const LagrangianFrame& l2,
                              const LagrangianFrame& l3,
                              const ToleranceProfile& tol = default_tolerances()) {
    if (!transverse(l1, l2, tol) || !transverse(l1, l3, tol) || !transverse(l2, l3, tol))
        throw domain_error("maximal triple: tuple is not pairwise transverse");
    SymplecticElement g = standardize_pair(l2, l1);
    LagrangianFrame t3 = act(g, l3, tol);
    return is_positive_definite(t3.forced_chart(tol), tol);
}

inline bool is_maximal_tuple(const std::vector<LagrangianFrame>& ls,
                             const ToleranceProfile& tol = default_tolerances()) {
    const int m = static_cast<int>(ls.size());
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (!transverse(ls[i], ls[j], tol))
                throw domain_error("maximal tuple: entries not pairwise transverse");
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            for (int k = j + 1; k < m; ++k)
                if (!is_maximal_triple(ls[i], ls[j], ls[k], tol)) return false;
    return true;
}

// g with g a = 0 and g b = l_inf. Output is unique only up to the GL(n)
// stabilizer of the pair; consumers must depend on stabilizer-invariant data.
inline SymplecticElement standardize_pair(const LagrangianFrame& a, const LagrangianFrame& b,
                                          const ToleranceProfile& tol) {
    if (!transverse(a, b, tol)) throw domain_error("standardize_pair: frames not transverse");
    const int n = a.n;
    RMat m = a.F.transpose() * symplectic_form(n) * b.F;
    if (smallest_singular_value(m) <= tol.pd_margin)
        throw domain_error("standardize_pair: symplectic pairing degenerate");
    // Rescale the frame of b so that a^T J b' = -Id; then [b' | a] is
    // symplectic and sends (l_inf, 0) to (b, a).
    RMat bp = b.F * (inverse(m) * -1.0);
    SymplecticElement s(n, hcat(bp, a.F), tol);
    return s.inverse();
}

// Transport a maximal 4-tuple to (-Id, -L, L, Id) with L diagonal, entries
// in (0, 1): first to (X1, 0, X3, l_inf), then X1 -> -Id, then diagonalize,
// then the per-eigenvalue Moebius block map (-1, 0, d, inf) -> (-1, -l, l, 1).
struct Normalized4Tuple {
    SymplecticElement g;
    RMat lambda; // diagonal, entries descending in (0,1)
};

inline Normalized4Tuple normalize_maximal_4tuple(const LagrangianFrame& l1, const LagrangianFrame& l2,
                                                 const LagrangianFrame& l3, const LagrangianFrame& l4,
                                                 const ToleranceProfile& tol = default_tolerances()) {
    if (!is_maximal_tuple({l1, l2, l3, l4}, tol))
        throw domain_error("normalize_maximal_4tuple: tuple is not maximal");
    const int n = l1.n;
    SymplecticElement g1 = standardize_pair(l2, l4, tol);
    LagrangianFrame t1 = act(g1, l1, tol), t3 = act(g1, l3, tol);
    if (!t1.chart || !t3.chart) throw numerical_error("normalize_maximal_4tuple: missing chart");
    RMat x1 = *t1.chart; // negative definite
    if (!is_positive_definite(x1 * -1.0, tol))
        throw numerical_error("normalize_maximal_4tuple: transported l1 not negative definite");

    RMat a = sym_function(x1 * -1.0, [](double t) { return 1.0 / std::sqrt(t); }, tol);
    SymplecticElement g2 = block_diagonal_symplectic(n, a);
    RMat dmat = symmetrized(a * (*t3.chart) * a);
    SymEigen ed = sym_eigen(dmat, tol);
    SymplecticElement g3 = block_diagonal_symplectic(n, ed.vectors.transpose());

    RMat da(n, n), db(n, n), dc(n, n), dd(n, n), lambda(n, n);
    for (int i = 0; i < n; ++i) {
        double d = ed.values[i];
        if (d <= tol.pd_margin) throw numerical_error("normalize_maximal_4tuple: degenerate diagonal");
        double s = std::sqrt(1.0 + d);
        double l = (s - 1.0) / (s + 1.0);
        if (l <= tol.pd_margin || l >= 1.0 - tol.pd_margin)
            throw numerical_error("normalize_maximal_4tuple: lambda outside (0,1)");
        double alpha = std::sqrt((1.0 - l) / (2.0 * (1.0 + l)));
        da(i, i) = alpha;
        db(i, i) = -2.0 * alpha * l / (1.0 - l);
        dc(i, i) = alpha;
        dd(i, i) = 2.0 * alpha / (1.0 - l);
        lambda(i, i) = l;
    }
    SymplecticElement g4(n, from_blocks(da, db, dc, dd), tol);
    SymplecticElement g = g4 * g3 * g2 * g1;

    LagrangianFrame targets[4] = {LagrangianFrame::from_chart(RMat::identity(n) * -1.0),
                                  LagrangianFrame::from_chart(lambda * -1.0),
                                  LagrangianFrame::from_chart(lambda),
                                  LagrangianFrame::from_chart(RMat::identity(n))};
    const LagrangianFrame* src[4] = {&l1, &l2, &l3, &l4};
    for (int i = 0; i < 4; ++i)
        if (!frames_equal(act(g, *src[i], tol), targets[i], 1e-6))
            throw numerical_error("normalize_maximal_4tuple: postcondition failed");
    return {g, lambda};
}

// ---------------------------------------------------------------------------
// Fractional linear action and the three invariant distances.
// ---------------------------------------------------------------------------

inline SiegelPoint act(const SymplecticElement& g, const SiegelPoint& z,
                       const ToleranceProfile& tol = default_tolerances()) {
    if (g.n != z.n) throw domain_error("act: rank mismatch");
    CMat zc = z.chart();
    CMat den = to_complex(g.block_c()) * zc + to_complex(g.block_d());
    if (pivot_condition(den) > tol.condition_cap)
        throw numerical_error("act: CZ + D too ill-conditioned");
    CMat num = to_complex(g.block_a()) * zc + to_complex(g.block_b());
    CMat w = solve(den.transpose(), num.transpose()).transpose();
    if (symmetry_defect(w) > 1e-7 * std::max(1.0, w.max_abs()))
        throw numerical_error("act: image chart not symmetric");
    w = symmetrized(w);
    return {real_part(w), imag_part(w), tol};
}

// Siegel's theorem: the vectorial distance comes from the eigenvalues of the
// complex cross-ratio R(Z1, conj Z2, Z2, conj Z1); they are real in [0, 1).
inline WeylVector vectorial_distance(const SiegelPoint& z1, const SiegelPoint& z2,
                                     const ToleranceProfile& tol = default_tolerances()) {
    if (z1.n != z2.n) throw domain_error("distance: rank mismatch");
    CMat r = cross_ratio_chart(z1.chart(), z2.chart_conj(), z2.chart(), z1.chart_conj());
    std::vector<cplx> ev = general_eigenvalues(r);
    std::vector<double> comps;
    for (const cplx& e : ev) {
        if (std::abs(e.imag()) >= 1e-8)
            throw numerical_error("vectorial distance: eigenvalue has imaginary residue");
        double rr = e.real();
        if (rr < 0 && rr > -1e-10) rr = 0;
        if (rr < 0 || rr > 1.0 - tol.pd_margin)
            throw numerical_error("vectorial distance: eigenvalue outside [0,1)");
        double sq = std::sqrt(rr);
        comps.push_back(std::log((1.0 + sq) / (1.0 - sq)));
    }
    std::sort(comps.rbegin(), comps.rend());
    return WeylVector(comps, tol);
}

inline double riemannian_distance(const SiegelPoint& a, const SiegelPoint& b,
                                  const ToleranceProfile& tol = default_tolerances()) {
    return vectorial_distance(a, b, tol).riemannian();
}

inline double finsler_distance(const SiegelPoint& a, const SiegelPoint& b,
                               const ToleranceProfile& tol = default_tolerances()) {
    return vectorial_distance(a, b, tol).finsler();
}

} // namespace siegelort
