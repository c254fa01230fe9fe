#pragma once

#include <algorithm>
#include <functional>
#include <limits>

#include "matrix.hpp"

namespace siegelort {

// ---------------------------------------------------------------------------
// LU with partial pivoting. Matrices here are at most 12x12, so plain O(n^3)
// with full copies is the right tradeoff.
// ---------------------------------------------------------------------------

template <class T>
struct LU {
    Mat<T> lu;
    std::vector<int> perm;
    int sign = 1;
    bool singular = false;
    double min_pivot = 0, max_pivot = 0;
};

template <class T>
LU<T> lu_factor(Mat<T> m) {
    const int n = m.rows;
    LU<T> f;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;
    f.min_pivot = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(m(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > best) { best = std::abs(m(i, k)); p = i; }
        if (best == 0.0) { f.singular = true; f.min_pivot = 0; break; }
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            std::swap(f.perm[k], f.perm[p]);
            f.sign = -f.sign;
        }
        f.min_pivot = std::min(f.min_pivot, best);
        f.max_pivot = std::max(f.max_pivot, best);
        for (int i = k + 1; i < n; ++i) {
            T l = m(i, k) / m(k, k);
            m(i, k) = l;
            for (int j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
        }
    }
    f.lu = std::move(m);
    return f;
}

template <class T>
Mat<T> lu_solve(const LU<T>& f, const Mat<T>& b) {
    if (f.singular) throw numerical_error("singular matrix in solve");
    const int n = f.lu.rows, m = b.cols;
    Mat<T> x(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) x(i, j) = b(f.perm[i], j);
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i)
            for (int j = 0; j < m; ++j) x(i, j) -= f.lu(i, k) * x(k, j);
    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j < m; ++j) x(k, j) /= f.lu(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < m; ++j) x(i, j) -= f.lu(i, k) * x(k, j);
    }
    return x;
}

template <class T>
Mat<T> solve(const Mat<T>& a, const Mat<T>& b) {
    return lu_solve(lu_factor(a), b);
}

template <class T>
Mat<T> inverse(const Mat<T>& a) {
    return solve(a, Mat<T>::identity(a.rows));
}

template <class T>
T determinant(const Mat<T>& a) {
    LU<T> f = lu_factor(a);
    if (f.singular) return T(0);
    T d = T(f.sign);
    for (int i = 0; i < a.rows; ++i) d *= f.lu(i, i);
    return d;
}

// Condition estimate from the pivot spread; cheap and adequate as a guard
// against feeding nearly dependent frames into solves.
template <class T>
double pivot_condition(const Mat<T>& a) {
    LU<T> f = lu_factor(a);
    if (f.singular || f.min_pivot == 0) return std::numeric_limits<double>::infinity();
    return f.max_pivot / f.min_pivot;
}

// ---------------------------------------------------------------------------
// Orthonormalization (modified Gram-Schmidt, one re-orthogonalization pass).
// ---------------------------------------------------------------------------

template <class T>
Mat<T> orthonormal_columns(const Mat<T>& f, double rank_tol = 1e-12) {
    Mat<T> q = f;
    const int r = f.rows, c = f.cols;
    double scale = f.frobenius();
    if (scale == 0) throw numerical_error("zero frame");
    for (int j = 0; j < c; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < j; ++k) {
                T dot = T(0);
                for (int i = 0; i < r; ++i) dot += conj_scalar(q(i, k)) * q(i, j);
                for (int i = 0; i < r; ++i) q(i, j) -= dot * q(i, k);
            }
        }
        double nrm = 0;
        for (int i = 0; i < r; ++i) nrm += abs2(q(i, j));
        nrm = std::sqrt(nrm);
        if (nrm < rank_tol * scale) throw numerical_error("rank-deficient frame");
        for (int i = 0; i < r; ++i) q(i, j) = q(i, j) * T(1.0 / nrm);
    }
    return q;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver: cyclic Jacobi. Deterministic sweep order, quadratic
// convergence; plenty for n <= 12.
// ---------------------------------------------------------------------------

struct SymEigen {
    std::vector<double> values; // descending
    RMat vectors;               // orthogonal, columns match values
};

inline SymEigen sym_eigen(const RMat& m_in, const ToleranceProfile& tol = default_tolerances()) {
    if (!m_in.is_square()) throw domain_error("sym_eigen: not square");
    if (symmetry_defect(m_in) > tol.residual_abs * std::max(1.0, m_in.max_abs()))
        throw domain_error("sym_eigen: symmetry violation: " + m_in.str());
    const int n = m_in.rows;
    RMat a = symmetrized(m_in);
    RMat v = RMat::identity(n);
    double scale = std::max(a.frobenius(), 1e-300);

    auto off_norm = [&]() {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2 * s);
    };

    for (int sweep = 0; sweep < 60; ++sweep) {
        if (off_norm() <= 1e-15 * scale) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    if (off_norm() > tol.residual_abs * scale)
        throw numerical_error("Jacobi iteration did not converge: " + m_in.str());

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
    SymEigen e;
    e.values.resize(n);
    e.vectors = RMat(n, n);
    for (int j = 0; j < n; ++j) {
        e.values[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) e.vectors(i, j) = v(i, order[j]);
    }
    return e;
}

// Strict PD test: eigenvalues in (0, pd_margin] count as not positive
// definite, so that downstream (lambda - 1)-type divisions stay safe.
inline bool is_positive_definite(const RMat& m, const ToleranceProfile& tol = default_tolerances()) {
    return sym_eigen(m, tol).values.back() > tol.pd_margin;
}

inline double min_eigenvalue(const RMat& m, const ToleranceProfile& tol = default_tolerances()) {
    return sym_eigen(m, tol).values.back();
}

// Apply fn to the spectrum of a symmetric matrix.
inline RMat sym_function(const RMat& m, const std::function<double(double)>& fn,
                         const ToleranceProfile& tol = default_tolerances()) {
    SymEigen e = sym_eigen(m, tol);
    const int n = m.rows;
    RMat d(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = fn(e.values[i]);
    return e.vectors * d * e.vectors.transpose();
}

inline RMat sym_sqrt(const RMat& m, const ToleranceProfile& tol = default_tolerances()) {
    SymEigen e = sym_eigen(m, tol);
    if (e.values.back() <= tol.pd_margin)
        throw domain_error("sym_sqrt: matrix is not positive definite: " + m.str());
    const int n = m.rows;
    RMat d(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = std::sqrt(e.values[i]);
    return e.vectors * d * e.vectors.transpose();
}

inline double smallest_singular_value(const RMat& m) {
    SymEigen e = sym_eigen(symmetrized(m.transpose() * m));
    return std::sqrt(std::max(0.0, e.values.back()));
}

// Congruence by the diagonal 1/sqrt(m_ii); heavily unbalanced PD matrices
// (block scales orders of magnitude apart) become well conditioned for the
// spectral work below, and pencil spectra and definiteness are congruence
// invariants.
inline bool jacobi_equilibrate(RMat& m) {
    const int n = m.rows;
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) {
        if (!(m(i, i) > 0)) return false;
        d[i] = 1.0 / std::sqrt(m(i, i));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) *= d[i] * d[j];
    return true;
}

// Eigenvalues of x^{-1} y for symmetric PD x, y via the congruent symmetric
// problem x^{-1/2} y x^{-1/2}; descending, guaranteed real.
inline std::vector<double> pd_pencil_eigenvalues(const RMat& x_in, const RMat& y_in,
                                                 const ToleranceProfile& tol = default_tolerances()) {
    const int n = x_in.rows;
    RMat x = symmetrized(x_in), y = symmetrized(y_in);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) {
        if (!(x(i, i) > 0)) throw domain_error("pd_pencil: left matrix not positive definite");
        d[i] = 1.0 / std::sqrt(x(i, i));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            x(i, j) *= d[i] * d[j];
            y(i, j) *= d[i] * d[j];
        }
    SymEigen ex = sym_eigen(x, tol);
    if (ex.values.back() <= tol.pd_margin)
        throw domain_error("pd_pencil: left matrix not positive definite");
    RMat s(n, n);
    for (int i = 0; i < n; ++i) s(i, i) = 1.0 / std::sqrt(ex.values[i]);
    RMat xi = ex.vectors * s * ex.vectors.transpose();
    return sym_eigen(symmetrized(xi * y * xi), tol).values;
}

// ---------------------------------------------------------------------------
// Complex Schur decomposition: Givens Hessenberg reduction followed by
// shifted QR, unitary factor accumulated. Serves general eigenvalues and
// (after reordering) invariant subspaces.
// ---------------------------------------------------------------------------

struct ComplexSchur {
    CMat q; // unitary
    CMat t; // upper triangular, a = q t q^H
};

namespace detail {

// G = [[c, s], [-conj(s), c]] with real c >= 0 and G [f; g] = [r; 0].
struct Givens {
    double c;
    cplx s;
};

inline Givens make_givens(cplx f, cplx g) {
    double fa = std::abs(f), ga = std::abs(g);
    if (ga == 0) return {1.0, cplx(0, 0)};
    if (fa == 0) return {0.0, std::conj(g) / ga};
    double h = std::hypot(fa, ga);
    return {fa / h, (f / fa) * std::conj(g) / h};
}

// rows (i, k) <- G * rows
inline void rot_rows(CMat& m, int i, int k, const Givens& g, int j0 = 0) {
    for (int j = j0; j < m.cols; ++j) {
        cplx a = m(i, j), b = m(k, j);
        m(i, j) = g.c * a + g.s * b;
        m(k, j) = -std::conj(g.s) * a + g.c * b;
    }
}

// cols (i, k) <- cols * G^H
inline void rot_cols(CMat& m, int i, int k, const Givens& g, int i1 = -1) {
    if (i1 < 0) i1 = m.rows;
    for (int r = 0; r < i1; ++r) {
        cplx u = m(r, i), v = m(r, k);
        m(r, i) = u * g.c + v * std::conj(g.s);
        m(r, k) = -u * g.s + v * g.c;
    }
}

} // namespace detail

inline ComplexSchur complex_schur(const CMat& a_in) {
    using namespace detail;
    if (!a_in.is_square()) throw domain_error("schur: not square");
    const int n = a_in.rows;
    CMat h = a_in;
    CMat q = CMat::identity(n);

    for (int j = 0; j < n - 2; ++j)
        for (int i = n - 1; i > j + 1; --i) {
            if (std::abs(h(i, j)) == 0) continue;
            Givens g = make_givens(h(i - 1, j), h(i, j));
            rot_rows(h, i - 1, i, g, j);
            rot_cols(h, i - 1, i, g);
            rot_cols(q, i - 1, i, g);
            h(i, j) = 0;
        }

    const double eps = 1e-15;
    const double scale = std::max(h.frobenius(), 1e-300);
    int hi = n - 1;
    int iter = 0, iter_total = 0;
    while (hi > 0) {
        if (++iter_total > 100 * n)
            throw numerical_error("QR iteration did not converge: " + a_in.str());
        int lo = hi;
        while (lo > 0) {
            double sub = std::abs(h(lo, lo - 1));
            double diag = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (diag == 0) diag = scale;
            if (sub <= eps * diag) { h(lo, lo - 1) = 0; break; }
            --lo;
        }
        if (lo == hi) { --hi; iter = 0; continue; }

        cplx shift;
        if (++iter % 20 == 0) {
            shift = h(hi, hi) + cplx(std::abs(h(hi, hi - 1)), 0); // exceptional
        } else {
            cplx a = h(hi - 1, hi - 1), b = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
            cplx t2 = (a - d) * 0.5;
            cplx disc = std::sqrt(t2 * t2 + b * c);
            cplx den = (std::abs(t2 + disc) > std::abs(t2 - disc)) ? t2 + disc : t2 - disc;
            shift = (std::abs(den) > 0) ? d - b * c / den : d;
        }

        cplx x = h(lo, lo) - shift, y = h(lo + 1, lo);
        for (int k = lo; k < hi; ++k) {
            Givens g = make_givens(x, y);
            rot_rows(h, k, k + 1, g, std::max(0, k - 1));
            rot_cols(h, k, k + 1, g, std::min(n, k + 3));
            rot_cols(q, k, k + 1, g);
            if (k + 1 < hi) {
                x = h(k + 1, k);
                y = h(k + 2, k);
            }
        }
    }

    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) h(i, j) = 0;
    return {q, h};
}

// Swap the adjacent diagonal pair (i-1, i) of the triangular factor. The
// similarity is the rotation whose first column is the eigenvector of the
// 2x2 block for the lower eigenvalue; coincident pairs need no move.
inline void schur_swap(ComplexSchur& s, int i) {
    using namespace detail;
    CMat& t = s.t;
    cplx a = t(i - 1, i - 1), b = t(i - 1, i), c = t(i, i);
    if (std::abs(c - a) <= 1e-14 * (std::abs(a) + std::abs(c))) return;
    Givens g = make_givens(b, c - a);
    rot_rows(t, i - 1, i, g);
    rot_cols(t, i - 1, i, g);
    rot_cols(s.q, i - 1, i, g);
    t(i, i - 1) = 0;
    t(i - 1, i - 1) = c;
    t(i, i) = a;
}

// Stable-partition the Schur form so eigenvalues with pred true come first;
// returns how many satisfy pred. Callers must re-check the diagonal if the
// predicate classes can collide numerically.
inline int schur_order(ComplexSchur& s, const std::function<bool(cplx)>& pred) {
    const int n = s.t.rows;
    int count = 0;
    for (int i = 0; i < n; ++i)
        if (pred(s.t(i, i))) ++count;
    for (int pass = 0; pass < n; ++pass) {
        bool moved = false;
        for (int i = 1; i < n; ++i)
            if (pred(s.t(i, i)) && !pred(s.t(i - 1, i - 1))) {
                schur_swap(s, i);
                moved = true;
            }
        if (!moved) break;
    }
    return count;
}

// Bubble-sort a diagonal range of the Schur form with adjacent swaps.
inline void schur_sort_range(ComplexSchur& s, int begin, int end,
                             const std::function<bool(cplx, cplx)>& before) {
    for (int pass = 0; pass < end - begin; ++pass) {
        bool moved = false;
        for (int i = begin + 1; i < end; ++i)
            if (before(s.t(i, i), s.t(i - 1, i - 1)) &&
                !before(s.t(i - 1, i - 1), s.t(i, i))) {
                schur_swap(s, i);
                moved = true;
            }
        if (!moved) break;
    }
}

inline std::vector<cplx> general_eigenvalues(const CMat& m) {
    ComplexSchur s = complex_schur(m);
    std::vector<cplx> ev(m.rows);
    for (int i = 0; i < m.rows; ++i) ev[i] = s.t(i, i);
    std::sort(ev.begin(), ev.end(), [](const cplx& a, const cplx& b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return ev;
}

// Eigenvalues of a real matrix, descending modulus, with a characteristic
// polynomial residual check per returned eigenvalue.
inline std::vector<cplx> general_eigenvalues(const RMat& m,
                                             const ToleranceProfile& tol = default_tolerances()) {
    if (!m.is_square()) throw domain_error("general_eigenvalues: not square");
    (void)tol;
    std::vector<cplx> ev = general_eigenvalues(to_complex(m));
    const int n = m.rows;
    double scale = std::max(1.0, m.max_abs());
    for (int k = 0; k < n; ++k) {
        CMat shifted = to_complex(m);
        for (int i = 0; i < n; ++i) shifted(i, i) -= ev[k];
        double gaps = 1.0;
        for (int i = 0; i < n; ++i)
            if (i != k) gaps *= std::max(std::abs(ev[i] - ev[k]), 1e-2 * scale);
        if (std::abs(determinant(shifted)) > 1e-7 * n * scale * gaps)
            throw numerical_error("eigenvalue residual too large for: " + m.str());
    }
    return ev;
}

} // namespace siegelort
