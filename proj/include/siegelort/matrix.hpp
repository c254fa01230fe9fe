#pragma once

#include <cmath>
#include <complex>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <vector>

#include "tolerances.hpp"

namespace siegelort {

using cplx = std::complex<double>;

inline double abs2(double x) { return x * x; }
inline double abs2(const cplx& z) { return std::norm(z); }
inline double conj_scalar(double x) { return x; }
inline cplx conj_scalar(const cplx& z) { return std::conj(z); }

// Dense row-major matrix over double or std::complex<double>. Everything in
// this library is at most 2n x 2n with n <= 6, so values are cheap to copy
// and no expression templates are needed.
template <class T>
struct Mat {
    int rows = 0, cols = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, T(0)) {}
    Mat(int r, int c, std::initializer_list<T> vals) : rows(r), cols(c), a(vals) {
        if (static_cast<int>(a.size()) != r * c) throw domain_error("matrix initializer size mismatch");
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }
    static Mat zero(int r, int c) { return Mat(r, c); }

    T& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    bool is_square() const { return rows == cols; }

    bool all_finite() const {
        for (const T& x : a)
            if (!std::isfinite(std::abs(x))) return false;
        return true;
    }

    Mat transpose() const {
        Mat m(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    Mat conjugate() const {
        Mat m(rows, cols);
        for (size_t k = 0; k < a.size(); ++k) m.a[k] = conj_scalar(a[k]);
        return m;
    }

    Mat adjoint() const { return conjugate().transpose(); }

    Mat operator+(const Mat& o) const {
        Mat m(rows, cols);
        for (size_t k = 0; k < a.size(); ++k) m.a[k] = a[k] + o.a[k];
        return m;
    }
    Mat operator-(const Mat& o) const {
        Mat m(rows, cols);
        for (size_t k = 0; k < a.size(); ++k) m.a[k] = a[k] - o.a[k];
        return m;
    }
    Mat operator-() const {
        Mat m(rows, cols);
        for (size_t k = 0; k < a.size(); ++k) m.a[k] = -a[k];
        return m;
    }
    Mat operator*(const Mat& o) const {
        Mat m(rows, o.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                T aik = (*this)(i, k);
                if (aik == T(0)) continue;
                for (int j = 0; j < o.cols; ++j) m(i, j) += aik * o(k, j);
            }
        return m;
    }
    Mat operator*(const T& s) const {
        Mat m(rows, cols);
        for (size_t k = 0; k < a.size(); ++k) m.a[k] = a[k] * s;
        return m;
    }

    double frobenius() const {
        double s = 0;
        for (const T& x : a) s += abs2(x);
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0;
        for (const T& x : a) s = std::max(s, std::abs(x));
        return s;
    }

    Mat block(int i0, int j0, int r, int c) const {
        Mat m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = (*this)(i0 + i, j0 + j);
        return m;
    }

    void set_block(int i0, int j0, const Mat& m) {
        for (int i = 0; i < m.rows; ++i)
            for (int j = 0; j < m.cols; ++j) (*this)(i0 + i, j0 + j) = m(i, j);
    }

    Mat col(int j) const { return block(0, j, rows, 1); }

    friend Mat hcat(const Mat& l, const Mat& r) {
        Mat m(l.rows, l.cols + r.cols);
        m.set_block(0, 0, l);
        m.set_block(0, l.cols, r);
        return m;
    }
    friend Mat vcat(const Mat& t, const Mat& b) {
        Mat m(t.rows + b.rows, t.cols);
        m.set_block(0, 0, t);
        m.set_block(t.rows, 0, b);
        return m;
    }

    friend std::ostream& operator<<(std::ostream& os, const Mat& m) {
        for (int i = 0; i < m.rows; ++i) {
            os << (i ? "; " : "[");
            for (int j = 0; j < m.cols; ++j) os << (j ? ", " : "") << m(i, j);
        }
        return os << "]";
    }

    std::string str() const {
        std::ostringstream os;
        os << *this;
        return os.str();
    }
};

using RMat = Mat<double>;
using CMat = Mat<cplx>;

inline CMat to_complex(const RMat& m) {
    CMat c(m.rows, m.cols);
    for (size_t k = 0; k < m.a.size(); ++k) c.a[k] = cplx(m.a[k], 0.0);
    return c;
}

inline RMat real_part(const CMat& m) {
    RMat r(m.rows, m.cols);
    for (size_t k = 0; k < m.a.size(); ++k) r.a[k] = m.a[k].real();
    return r;
}

inline RMat imag_part(const CMat& m) {
    RMat r(m.rows, m.cols);
    for (size_t k = 0; k < m.a.size(); ++k) r.a[k] = m.a[k].imag();
    return r;
}

inline CMat complex_of(const RMat& re, const RMat& im) {
    CMat c(re.rows, re.cols);
    for (size_t k = 0; k < re.a.size(); ++k) c.a[k] = cplx(re.a[k], im.a[k]);
    return c;
}

template <class T>
double symmetry_defect(const Mat<T>& m) {
    return (m - m.transpose()).max_abs();
}

template <class T>
Mat<T> symmetrized(const Mat<T>& m) {
    return (m + m.transpose()) * T(0.5);
}

// J_n = [[0, Id], [-Id, 0]], the standard symplectic form.
inline RMat symplectic_form(int n) {
    RMat j(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        j(i, n + i) = 1.0;
        j(n + i, i) = -1.0;
    }
    return j;
}

} // namespace siegelort
