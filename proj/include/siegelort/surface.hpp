#pragma once

#include "tubes.hpp"
#include "words.hpp"

namespace siegelort {

// ---------------------------------------------------------------------------
// Shilov hyperbolic elements: spectrum off the unit circle, attracting and
// repelling Lagrangians extracted from the modulus-ordered Schur form.
// ---------------------------------------------------------------------------
struct ShilovData {
    LagrangianFrame attract; // Lambda^+
    LagrangianFrame repel;   // Lambda^-
    std::vector<double> top_moduli; // |eigenvalues| > 1, descending
};

namespace detail {

// Real basis of the conjugation-invariant span of the leading k complex
// Schur columns. The basis is taken incrementally along the Schur flag, so
// with the eigenvalues sorted by modulus the columns are aligned with the
// contraction rates; such frames stay well conditioned under long word
// transports, where a generic basis of the same subspace would collapse
// onto the slowest direction.
inline LagrangianFrame invariant_frame(const CMat& q, int k, const ToleranceProfile& tol) {
    const int dim = q.rows;
    RMat basis(dim, k);
    int have = 0;
    for (int j = 0; j < k && have < k; ++j) {
        for (int part = 0; part < 2 && have < k; ++part) {
            std::vector<double> w(dim);
            for (int i = 0; i < dim; ++i)
                w[i] = part == 0 ? q(i, j).real() : q(i, j).imag();
            for (int pass = 0; pass < 2; ++pass)
                for (int c = 0; c < have; ++c) {
                    double dot = 0;
                    for (int i = 0; i < dim; ++i) dot += basis(i, c) * w[i];
                    for (int i = 0; i < dim; ++i) w[i] -= dot * basis(i, c);
                }
            double nrm = 0;
            for (double x : w) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm < 1e-6) continue;
            for (int i = 0; i < dim; ++i) basis(i, have) = w[i] / nrm;
            ++have;
        }
    }
    if (have < k) throw numerical_error("invariant subspace is not conjugation-invariant");
    // consistency: the flag basis must span the same space as Re(Q1 Q1^H)
    CMat q1 = q.block(0, 0, dim, k);
    RMat proj = real_part(q1 * q1.adjoint());
    if ((proj - basis * (basis.transpose() * proj)).max_abs() > 1e-7)
        throw numerical_error("invariant subspace is not conjugation-invariant");
    return LagrangianFrame::from_frame(basis, tol);
}

} // namespace detail

inline ShilovData shilov_data(const SymplecticElement& g,
                              const ToleranceProfile& tol = default_tolerances()) {
    const int n = g.n;
    ComplexSchur s = complex_schur(to_complex(g.g));
    for (int i = 0; i < 2 * n; ++i)
        if (std::abs(std::abs(s.t(i, i)) - 1.0) <= tol.pd_margin)
            throw not_shilov_hyperbolic("eigenvalue modulus within margin of one: " +
                                        std::to_string(std::abs(s.t(i, i))));
    ComplexSchur s_plus = s;
    int above = schur_order(s_plus, [](cplx l) { return std::abs(l) > 1.0; });
    if (above != n)
        throw not_shilov_hyperbolic("expected n expanding eigenvalues, got " + std::to_string(above));
    ComplexSchur s_minus = s;
    schur_order(s_minus, [](cplx l) { return std::abs(l) < 1.0; });
    // Sort each half by ascending modulus so the extracted real flag is
    // aligned with the contraction rates (see invariant_frame).
    auto asc = [](cplx a, cplx b) { return std::abs(a) < std::abs(b); };
    schur_sort_range(s_plus, 0, n, asc);
    schur_sort_range(s_minus, 0, n, asc);

    ShilovData d;
    d.attract = detail::invariant_frame(s_plus.q, n, tol);
    d.repel = detail::invariant_frame(s_minus.q, n, tol);
    d.top_moduli.resize(n);
    for (int i = 0; i < n; ++i) d.top_moduli[i] = std::abs(s_plus.t(i, i));
    std::sort(d.top_moduli.rbegin(), d.top_moduli.rend());
    for (double m : d.top_moduli)
        if (m <= 1.0 + tol.pd_margin)
            throw not_shilov_hyperbolic("top modulus too close to one");

    if (!transverse(d.attract, d.repel, tol))
        throw not_shilov_hyperbolic("fixed Lagrangians are not transverse");
    auto invariance = [&](const LagrangianFrame& l) {
        RMat img = g.g * l.F;
        RMat residual = img - l.F * (l.F.transpose() * img);
        return residual.max_abs() / std::max(1.0, img.max_abs());
    };
    if (invariance(d.attract) > 1e-7 || invariance(d.repel) > 1e-7)
        throw numerical_error("fixed Lagrangians are not invariant");
    return d;
}

inline RTube invariant_tube(const ShilovData& d, const ToleranceProfile& tol = default_tolerances()) {
    return {d.attract, d.repel, tol};
}

struct TranslationLengths {
    WeylVector vect; // (2 log a_1, ..., 2 log a_n)
    double finsler = 0;
    double riemannian = 0;
};

inline TranslationLengths translation_lengths(const ShilovData& d,
                                              const ToleranceProfile& tol = default_tolerances()) {
    TranslationLengths t;
    std::vector<double> comps;
    double sum = 0, sq = 0;
    for (double a : d.top_moduli) {
        double la = std::log(a);
        comps.push_back(2 * la);
        sum += la;
        sq += la * la;
    }
    t.vect = WeylVector(comps, tol);
    t.finsler = sum;
    t.riemannian = 2 * std::sqrt(sq);
    return t;
}

inline TranslationLengths translation_lengths(const SymplecticElement& g,
                                              const ToleranceProfile& tol = default_tolerances()) {
    return translation_lengths(shilov_data(g, tol), tol);
}

// ---------------------------------------------------------------------------
// Representation of the pair-of-pants group with Shilov hyperbolic boundary.
// ---------------------------------------------------------------------------
struct Representation {
    int n = 0;
    SurfaceSpec spec;
    std::vector<SymplecticElement> images; // one per generator
    ToleranceProfile tol;
    std::vector<ShilovData> peripheral_data; // aligned with spec.peripherals

    Representation(int rank, std::vector<SymplecticElement> gen_images,
                   SurfaceSpec surface = SurfaceSpec::pair_of_pants(),
                   ToleranceProfile t = default_tolerances())
        : n(rank), spec(std::move(surface)), images(std::move(gen_images)), tol(t) {
        if (static_cast<int>(images.size()) != spec.generators)
            throw domain_error("representation: generator arity mismatch");
        for (const auto& g : images)
            if (g.n != n) throw domain_error("representation: rank mismatch");
        for (const auto& w : spec.peripherals) peripheral_data.push_back(shilov_data(evaluate(w), tol));
    }

    SymplecticElement evaluate(const FreeWord& w) const {
        SymplecticElement g = SymplecticElement::identity(n);
        for (int l : w.letters) {
            const SymplecticElement& im = images[std::abs(l) - 1];
            g = g * (l > 0 ? im : im.inverse());
        }
        return g;
    }

    int boundary_count() const { return static_cast<int>(spec.peripherals.size()); }
    const FreeWord& peripheral_word(int i) const { return spec.peripherals[i]; }
    SymplecticElement peripheral_image(int i) const { return evaluate(spec.peripherals[i]); }
    const ShilovData& peripheral_shilov(int i) const { return peripheral_data[i]; }
    RTube peripheral_tube(int i) const { return invariant_tube(peripheral_data[i], tol); }
};

// ---------------------------------------------------------------------------
// Builders.
// ---------------------------------------------------------------------------

// Orthogeodesic length between cuffs i and j of a hyperbolic pair of pants,
// k the remaining cuff (right-angled hexagon trigonometry).
inline double pants_orthogeodesic_length(double li, double lj, double lk) {
    double c = (std::cosh(lk / 2) + std::cosh(li / 2) * std::cosh(lj / 2)) /
               (std::sinh(li / 2) * std::sinh(lj / 2));
    return std::acosh(c);
}

// SL(2,R) pair of pants with prescribed cuff lengths. The boundary traces
// are 2 cosh(cuff/2) up to the lift sign; the sign of tr(rho(gamma0)) is
// chosen so that the attracting fixed points of the three peripherals form a
// maximal (positively oriented) triple.
inline Representation build_pants_fuchsian(double l0, double l1, double l2,
                                           const ToleranceProfile& tol = default_tolerances()) {
    if (!(l0 > 0) || !(l1 > 0) || !(l2 > 0)) throw builder_error("cuff lengths must be positive");
    double m = std::exp(l1 / 2), p = std::exp(l2 / 2);
    RMat a(2, 2, {m, 1, 0, 1 / m});
    for (double sign : {-1.0, 1.0}) {
        double q = sign * 2 * std::cosh(l0 / 2) - m * p - 1 / (m * p);
        RMat b(2, 2, {p, 0, q, 1 / p});
        try {
            Representation rho(1, {SymplecticElement(1, a, tol), SymplecticElement(1, b, tol)},
                               SurfaceSpec::pair_of_pants(), tol);
            if (is_maximal_triple(rho.peripheral_shilov(0).attract, rho.peripheral_shilov(1).attract,
                                  rho.peripheral_shilov(2).attract, tol))
                return rho;
        } catch (const error&) {
            // try the other lift sign
        }
    }
    throw builder_error("pair of pants builder: no lift sign gives a maximal configuration");
}

// Closed form from the hexagon relation: the cuff length l for which the
// orthogeodesic between the cuff-0 boundary (length L) and cuff 1 has
// 2 log coth(length/2) = L - eps.
struct CuffSolution {
    double l0, l1, l2;
    double ortho_length;
};

inline CuffSolution solve_cuff_for_target_ortho(double big_l, double eps, double l_free = -1,
                                                const ToleranceProfile& tol = default_tolerances()) {
    (void)tol;
    if (!(eps > 0) || !(eps < big_l))
        throw builder_error("solve_cuff_for_target_ortho: need 0 < eps < L");
    double e = std::exp((big_l - eps) / 2);
    double target = std::log((e + 1) / (e - 1));
    double l2 = l_free > 0 ? l_free : big_l;
    auto f = [&](double l1) {
        return pants_orthogeodesic_length(big_l, l1, l2) - target;
    };
    double lo = 1e-8, hi = 1.0;
    if (f(lo) < 0) throw builder_error("solve_cuff_for_target_ortho: no bracket at L=" +
                                       std::to_string(big_l) + ", eps=" + std::to_string(eps));
    while (f(hi) > 0) {
        hi *= 2;
        if (hi > 1e6)
            throw builder_error("solve_cuff_for_target_ortho: no bracket at L=" +
                                std::to_string(big_l) + ", eps=" + std::to_string(eps));
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    double l1 = 0.5 * (lo + hi);
    return {big_l, l1, l2, pants_orthogeodesic_length(big_l, l1, l2)};
}

// Diagonal embedding of a rank-1 representation, optionally twisted by an
// O(n) character: gamma -> Delta(rho0(gamma)) diag(X_gamma, X_gamma).
inline Representation diagonal_embed(const Representation& rho0, int n,
                                     const std::vector<RMat>& twists = {},
                                     const ToleranceProfile& tol = default_tolerances()) {
    if (rho0.n != 1) throw domain_error("diagonal_embed: base representation must have rank 1");
    if (!twists.empty() && static_cast<int>(twists.size()) != rho0.spec.generators)
        throw domain_error("diagonal_embed: one twist per generator required");
    for (const RMat& x : twists)
        if ((x.transpose() * x - RMat::identity(n)).max_abs() > tol.residual_abs)
            throw domain_error("diagonal_embed: twist is not orthogonal");
    std::vector<SymplecticElement> imgs;
    for (size_t k = 0; k < rho0.images.size(); ++k) {
        const RMat& g = rho0.images[k].g;
        RMat big = from_blocks(RMat::identity(n) * g(0, 0), RMat::identity(n) * g(0, 1),
                               RMat::identity(n) * g(1, 0), RMat::identity(n) * g(1, 1));
        if (!twists.empty()) {
            RMat tw = from_blocks(twists[k], RMat::zero(n, n), RMat::zero(n, n), twists[k]);
            big = big * tw;
        }
        imgs.emplace_back(n, big, tol);
    }
    return Representation(n, std::move(imgs), rho0.spec, tol);
}

// Interleaved block assembly of n rank-1 representations on the same
// surface: entrywise diagonal blocks diag(a_i), diag(b_i), ...
inline Representation product_of_fuchsians(const std::vector<Representation>& factors,
                                           const ToleranceProfile& tol = default_tolerances()) {
    if (factors.empty()) throw domain_error("product_of_fuchsians: no factors");
    const int n = static_cast<int>(factors.size());
    for (const auto& f : factors) {
        if (f.n != 1) throw domain_error("product_of_fuchsians: factors must have rank 1");
        if (!(f.spec == factors[0].spec)) throw domain_error("product_of_fuchsians: spec mismatch");
    }
    std::vector<SymplecticElement> imgs;
    for (int k = 0; k < factors[0].spec.generators; ++k) {
        RMat a(n, n), b(n, n), c(n, n), d(n, n);
        for (int i = 0; i < n; ++i) {
            const RMat& g = factors[i].images[k].g;
            a(i, i) = g(0, 0);
            b(i, i) = g(0, 1);
            c(i, i) = g(1, 0);
            d(i, i) = g(1, 1);
        }
        imgs.emplace_back(n, from_blocks(a, b, c, d), tol);
    }
    return Representation(n, std::move(imgs), factors[0].spec, tol);
}

// ---------------------------------------------------------------------------
// Holomorphic double. For the pair of pants the double is a closed genus-2
// group presented on j0(Gamma), j1(Gamma), x1, x2 with relations
// j0(c0) j1(c0)^{-1} and j0(gamma_i)^{-1} x_i j1(gamma_i) x_i^{-1}.
// ---------------------------------------------------------------------------
struct DoubledRepresentation {
    RMat sigma_rho;                    // involution of the tube of rho(gamma0)
    std::vector<RMat> sigma_peripheral; // involutions for gamma1, gamma2
    std::vector<SymplecticElement> j0, j1; // generator images on both halves
    std::vector<SymplecticElement> x;      // arc classes x_1, x_2
    double max_relation_residual = 0;
};

inline DoubledRepresentation double_representation(const Representation& rho) {
    const ToleranceProfile& tol = rho.tol;
    const int n = rho.n;
    DoubledRepresentation d;
    d.sigma_rho = involution_matrix(rho.peripheral_tube(0), tol);
    for (int i = 1; i < rho.boundary_count(); ++i)
        d.sigma_peripheral.push_back(involution_matrix(rho.peripheral_tube(i), tol));
    for (int k = 0; k < rho.spec.generators; ++k) {
        d.j0.push_back(rho.images[k]);
        d.j1.emplace_back(n, d.sigma_rho * rho.images[k].g * d.sigma_rho, tol);
    }
    for (const RMat& s : d.sigma_peripheral) d.x.emplace_back(n, s * d.sigma_rho, tol);

    auto eval = [&](const std::vector<SymplecticElement>& gens, const FreeWord& w) {
        SymplecticElement g = SymplecticElement::identity(n);
        for (int l : w.letters) g = g * (l > 0 ? gens[l - 1] : gens[-l - 1].inverse());
        return g;
    };
    auto residual = [&](const SymplecticElement& g) {
        return (g.g - RMat::identity(2 * n)).max_abs();
    };

    const FreeWord& c0 = rho.spec.peripherals[0];
    double worst = residual(eval(d.j0, c0) * eval(d.j1, c0).inverse());
    std::string worst_name = "j0(c0) j1(c0)^-1";
    for (int i = 1; i < rho.boundary_count(); ++i) {
        const FreeWord& gi = rho.spec.peripherals[i];
        SymplecticElement rel = eval(d.j0, gi).inverse() * d.x[i - 1] * eval(d.j1, gi) *
                                d.x[i - 1].inverse();
        double r = residual(rel);
        if (r > worst) {
            worst = r;
            worst_name = "j0(g" + std::to_string(i) + ")^-1 x j1(g" + std::to_string(i) + ") x^-1";
        }
    }
    d.max_relation_residual = worst;
    if (worst > 1e-7)
        throw numerical_error("double construction: relation " + worst_name +
                              " has residual " + std::to_string(worst));
    return d;
}

// Image of the doubled arc class: sigma_{rho(delta)} sigma_rho for the
// peripheral conjugate delta indexing an orthotube from the gamma0 side.
inline SymplecticElement doubled_ortho_element(const Representation& rho,
                                               const DoubledRepresentation& d,
                                               const FreeWord& delta_word) {
    ShilovData sd = shilov_data(rho.evaluate(delta_word), rho.tol);
    RMat sigma_delta = involution_matrix(invariant_tube(sd, rho.tol), rho.tol);
    return SymplecticElement(rho.n, sigma_delta * d.sigma_rho, rho.tol);
}

// Collar width from the Riemannian translation length:
// sqrt(n) arccoth(exp(ellR / (2 sqrt(n)))).
inline double collar_width(double ell_r, int n) {
    if (!(ell_r > 0)) throw domain_error("collar_width: length must be positive");
    double x = std::exp(ell_r / (2 * std::sqrt(double(n))));
    return std::sqrt(double(n)) * 0.5 * std::log((x + 1) / (x - 1));
}

} // namespace siegelort
