#pragma once

#include <map>
#include <unordered_map>

#include "surface.hpp"

namespace siegelort {

inline double log_coth(double x) {
    if (!(x > 0)) throw domain_error("log_coth: argument must be positive");
    // log coth x = log(e^{2x}+1) - log(e^{2x}-1), stable for large x via expm1
    double e = std::exp(-2 * x);
    return std::log1p(e) - std::log1p(-e);
}

inline double arccoth(double x) {
    if (!(x > 1)) throw domain_error("arccoth: argument must exceed one");
    return 0.5 * std::log((x + 1) / (x - 1));
}

// ---------------------------------------------------------------------------
// One term of a Basmajian sum: a peripheral conjugate delta, reduced modulo
// <gamma> into the fundamental theta-window, with its orthotube lengths.
// ---------------------------------------------------------------------------
struct OrthotubeRecord {
    FreeWord delta_word;     // <gamma>-reduced representative
    int boundary_class = 0;  // index of the underlying peripheral c
    bool same_boundary = false; // delta conjugate to gamma's own boundary class
    int depth = 0;           // smallest conjugator length that produced it
    LagrangianFrame delta_plus, delta_minus;
    double theta_plus = 0, theta_minus = 0; // interval in [0, ellF(gamma))
    WeylVector ell_vect;
    double ell_f = 0, ell_r = 0;
    double df_term = 0;    // theta_minus - theta_plus = (1/2) sum log mu_i
    double lower_term = 0; // n log coth(ellF(alpha)/n)
    double upper_term = 0; // n log coth(ell_vect_n / 2)
};

struct SpectrumReport {
    FreeWord gamma_word;
    int boundary_index = -1; // -1 when gamma is a general peripheral conjugate
    int depth = 0;
    std::string basepoint; // description of the theta origin
    WeylVector gamma_vect;
    double gamma_ell_f = 0, gamma_ell_r = 0;
    std::vector<OrthotubeRecord> records; // sorted by theta_plus
    double identity_sum = 0, lower_sum = 0, upper_sum = 0;
    double identity_residual = 0; // ellF(gamma) - identity_sum, >= -tol
    long long candidates_seen = 0;
    long long rejected_candidates = 0;
    long long degenerate_skipped = 0; // orthotubes too long to resolve at pd_margin
};

// ---------------------------------------------------------------------------
// Normalized boundary context: gamma's pair carried to (0, l_inf) and a
// basepoint on the limit set carried to Id, so that the theta-coordinate is
// (1/2) log det of the transported chart.
// ---------------------------------------------------------------------------
struct BoundaryContext {
    FreeWord gamma_word;
    ShilovData gamma;
    TranslationLengths lengths;
    SymplecticElement norm;     // repel -> 0, attract -> l_inf, basepoint -> Id
    SymplecticElement norm_inv;
    std::string basepoint_desc;
};

namespace detail {

inline std::optional<SymplecticElement> window_normalization(const ShilovData& gd,
                                                             const LagrangianFrame& base,
                                                             const ToleranceProfile& tol) {
    try {
        if (!is_maximal_triple(gd.repel, base, gd.attract, tol)) return std::nullopt;
        SymplecticElement g0 = standardize_pair(gd.repel, gd.attract, tol);
        RMat b = act(g0, base, tol).forced_chart(tol);
        if (!is_positive_definite(b, tol)) return std::nullopt;
        RMat a = sym_function(b, [](double t) { return 1.0 / std::sqrt(t); }, tol);
        return block_diagonal_symplectic(base.n, a) * g0;
    } catch (const error&) {
        return std::nullopt;
    }
}

} // namespace detail

inline BoundaryContext make_boundary_context(const Representation& rho, const FreeWord& gamma_word) {
    const ToleranceProfile& tol = rho.tol;
    BoundaryContext ctx;
    ctx.gamma_word = gamma_word;
    ctx.gamma = shilov_data(rho.evaluate(gamma_word), tol);
    ctx.lengths = translation_lengths(ctx.gamma, tol);

    // Basepoint: attracting/repelling Lagrangian of a short peripheral
    // conjugate that lands in the window ((repel, attract)).
    std::vector<FreeWord> conjugators{FreeWord()};
    for (int l : {1, -1, 2, -2}) conjugators.push_back(FreeWord(std::vector<int>{l}));
    for (const FreeWord& v : conjugators)
        for (int c = 0; c < rho.boundary_count(); ++c) {
            FreeWord cand = v * rho.peripheral_word(c) * v.inverse();
            if (cand == gamma_word || cand == gamma_word.inverse()) continue;
            SymplecticElement gv = rho.evaluate(v);
            const ShilovData& sd = rho.peripheral_shilov(c);
            int side = 0;
            for (const LagrangianFrame* f : {&sd.attract, &sd.repel}) {
                LagrangianFrame moved = v.empty() ? *f : act(gv, *f, tol);
                auto norm = detail::window_normalization(ctx.gamma, moved, tol);
                ++side;
                if (norm) {
                    ctx.norm = *norm;
                    ctx.norm_inv = ctx.norm.inverse();
                    ctx.basepoint_desc =
                        std::string(side == 1 ? "attract(" : "repel(") + cand.str() + ")";
                    return ctx;
                }
            }
        }
    throw numerical_error("boundary context: no basepoint found in the window");
}

// Finsler arc-length coordinate along the gamma tube; zero at the basepoint,
// ellF(gamma) at its gamma-translate, monotone on maximal chains.
inline double theta_coordinate(const BoundaryContext& ctx, const LagrangianFrame& l,
                               const ToleranceProfile& tol = default_tolerances()) {
    RMat c = act(ctx.norm, l, tol).forced_chart(tol);
    if (!is_positive_definite(c, tol))
        throw domain_error("theta_coordinate: Lagrangian outside the window");
    double det = determinant(c);
    return 0.5 * std::log(det);
}

// ---------------------------------------------------------------------------
// Orthotube construction per the normal form: carry (delta+, delta-) to
// (0, l_inf) and gamma's pair to (-Id, Lambda) with Lambda diagonal negative;
// the unique common orthogonal is Y_{-A, A} with A = sqrt(-Lambda).
// ---------------------------------------------------------------------------

namespace detail {

struct OrientedPair {
    const LagrangianFrame *plus, *minus;
};

// Orient delta so that (gamma-, delta+, delta-, gamma+) is maximal.
inline OrientedPair orient_delta(const ShilovData& g, const ShilovData& d,
                                 const ToleranceProfile& tol) {
    for (bool swap : {false, true}) {
        const LagrangianFrame* dp = swap ? &d.repel : &d.attract;
        const LagrangianFrame* dm = swap ? &d.attract : &d.repel;
        try {
            if (is_maximal_tuple({g.repel, *dp, *dm, g.attract}, tol)) return {dp, dm};
        } catch (const domain_error&) {
        }
    }
    throw domain_error("orthotube: no orientation of delta makes the 4-tuple maximal");
}

} // namespace detail

inline RTube orthotube_for_pair(const ShilovData& gamma, const ShilovData& delta,
                                const ToleranceProfile& tol = default_tolerances()) {
    if (frames_equal(gamma.attract, delta.attract, 1e-9) ||
        frames_equal(gamma.attract, delta.repel, 1e-9))
        throw domain_error("orthotube: coinciding peripheral axes");
    auto [dp, dm] = detail::orient_delta(gamma, delta, tol);
    const int n = gamma.attract.n;
    SymplecticElement g = standardize_pair(*dp, *dm, tol); // delta pair -> (0, l_inf)
    RMat u = act(g, gamma.attract, tol).forced_chart(tol);
    if (!is_positive_definite(u * -1.0, tol))
        throw numerical_error("orthotube: transported gamma+ not negative definite");
    RMat a1 = sym_function(u * -1.0, [](double t) { return 1.0 / std::sqrt(t); }, tol);
    SymplecticElement g2 = block_diagonal_symplectic(n, a1);
    RMat w = act(g2 * g, gamma.repel, tol).forced_chart(tol);
    SymEigen ew = sym_eigen(symmetrized(w), tol);
    SymplecticElement g3 = block_diagonal_symplectic(n, ew.vectors.transpose());
    SymplecticElement total = g3 * g2 * g;
    RMat aa(n, n);
    for (int i = 0; i < n; ++i) {
        double lam = -ew.values[i]; // Lambda entries in (0, 1)
        if (lam <= tol.pd_margin || lam >= 1.0 - tol.pd_margin)
            throw numerical_error("orthotube: normalized Lambda outside (0,1)");
        aa(i, i) = std::sqrt(lam);
    }
    SymplecticElement back = total.inverse();
    RTube tube{act(back, LagrangianFrame::from_chart(aa * -1.0, tol), tol),
               act(back, LagrangianFrame::from_chart(aa, tol), tol)};
    double r1 = orthogonality_residual(tube, RTube(gamma.attract, gamma.repel, tol), tol);
    double r2 = orthogonality_residual(tube, RTube(*dp, *dm, tol), tol);
    if (r1 > 1e-7 || r2 > 1e-7)
        throw numerical_error("orthotube: orthogonality residual too large: " +
                              std::to_string(std::max(r1, r2)));
    return tube;
}

// Vectorial orthotube length from the eigenvalues mu_i of
// R(gamma-, delta+, delta-, gamma+): components 2 arccoth(sqrt(mu)),
// cross-checked against the distance between the intersection points of the
// orthotube with the two peripheral tubes.
inline WeylVector orthotube_lengths(const ShilovData& gamma, const ShilovData& delta,
                                    const ToleranceProfile& tol = default_tolerances()) {
    auto [dp, dm] = detail::orient_delta(gamma, delta, tol);
    SymplecticElement g = standardize_pair(gamma.repel, gamma.attract, tol);
    RMat cp = act(g, *dp, tol).forced_chart(tol);
    RMat cm = act(g, *dm, tol).forced_chart(tol);
    std::vector<double> mu = pd_pencil_eigenvalues(cp, cm, tol);
    std::vector<double> comps;
    for (auto it = mu.rbegin(); it != mu.rend(); ++it) {
        if (*it <= 1.0 + tol.pd_margin)
            throw numerical_error("orthotube_lengths: degenerate tube configuration (mu <= 1)");
        comps.push_back(2 * arccoth(std::sqrt(*it)));
    }
    WeylVector lengths(comps, tol);

    RTube ortho = orthotube_for_pair(gamma, delta, tol);
    SiegelPoint on_gamma = intersect_tubes(ortho, invariant_tube(gamma, tol), tol);
    SiegelPoint on_delta = intersect_tubes(ortho, invariant_tube(delta, tol), tol);
    WeylVector via_points = vectorial_distance(on_gamma, on_delta, tol);
    for (int i = 0; i < lengths.n(); ++i)
        if (std::abs(lengths.x[i] - via_points.x[i]) > 1e-6 * (1 + lengths.x[i]))
            throw numerical_error("orthotube_lengths: cross-check against intersection points failed");
    return lengths;
}

// ---------------------------------------------------------------------------
// Enumeration of Ort(gamma) by depth-first search over conjugators, reduced
// modulo <gamma> into the window [0, ellF) by the theta-coordinate of
// delta+, deduplicated on the rounded theta-interval.
// ---------------------------------------------------------------------------

namespace detail {

struct EnumState {
    const Representation* rho;
    const BoundaryContext* ctx;
    ToleranceProfile tol;
    int n;
    double ell_f;
    std::vector<RMat> gen_mats;      // images of a, A, b, B
    std::vector<RMat> frames_plus;   // orthonormal frames per peripheral class
    std::vector<RMat> frames_minus;
    RMat window_block;               // A-block of N rho(gamma) N^{-1}
    std::map<long long, RMat> gamma_powers;  // rho(gamma)^k
    std::map<long long, RMat> window_powers; // window_block^k
    std::unordered_map<long long, std::vector<size_t>> grid;
    std::vector<OrthotubeRecord> records;
    std::vector<RMat> record_chart_plus; // normalized reduced chart per record
    long long seen = 0, rejected = 0, degenerate = 0;

    const RMat& gamma_power(long long k) {
        auto it = gamma_powers.find(k);
        if (it != gamma_powers.end()) return it->second;
        RMat base = rho->evaluate(ctx->gamma_word).g;
        RMat acc = RMat::identity(2 * n);
        long long a = std::llabs(k);
        RMat step = k >= 0 ? base : SymplecticElement(n, base).inverse().g;
        for (long long i = 0; i < a; ++i) acc = acc * step;
        return gamma_powers.emplace(k, std::move(acc)).first->second;
    }

    const RMat& window_power(long long k) {
        auto it = window_powers.find(k);
        if (it != window_powers.end()) return it->second;
        RMat acc = RMat::identity(n);
        RMat step = k >= 0 ? window_block : inverse(window_block);
        for (long long i = 0; i < std::llabs(k); ++i) acc = acc * step;
        return window_powers.emplace(k, std::move(acc)).first->second;
    }
};

inline long long grid_key(long long a, long long b) { return a * 2000003LL + b; }

inline double min_eig_small(const RMat& m, const ToleranceProfile& tol) {
    if (m.rows == 1) return m(0, 0);
    if (m.rows == 2) {
        double tr = m(0, 0) + m(1, 1);
        double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
        return tr / 2 - disc;
    }
    return sym_eigen(m, tol).values.back();
}

// Scale-free PD test: equilibrate to unit diagonal first so that charts with
// wildly different block scales are judged by their angular degeneracy.
inline bool pd_balanced(RMat m, const ToleranceProfile& tol) {
    if (!jacobi_equilibrate(m)) return false;
    return min_eig_small(m, tol) > tol.pd_margin;
}

// Chart of the 2n x n column span (top * bottom^{-1}); empty when the bottom
// block is numerically singular. Columns are rescaled first; long conjugator
// words squeeze the raw frame columns by orders of magnitude.
inline std::optional<RMat> chart_of_raw(const RMat& f_in, const ToleranceProfile& tol) {
    const int n = f_in.cols;
    RMat f = f_in;
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int i = 0; i < 2 * n; ++i) s += f(i, j) * f(i, j);
        s = std::sqrt(s);
        if (s == 0) return std::nullopt;
        for (int i = 0; i < 2 * n; ++i) f(i, j) /= s;
    }
    RMat bottom = f.block(n, 0, n, n);
    LU<double> lu = lu_factor(bottom.transpose());
    if (lu.singular || lu.min_pivot < 1e-13 * std::max(1.0, lu.max_pivot)) return std::nullopt;
    RMat z = lu_solve(lu, f.block(0, 0, n, n).transpose()).transpose();
    if (symmetry_defect(z) > 1e-6 * std::max(1.0, z.max_abs())) return std::nullopt;
    (void)tol;
    return symmetrized(z);
}

inline bool ends_with(const FreeWord& w, const FreeWord& suffix) {
    if (suffix.length() == 0 || w.length() < suffix.length()) return false;
    return std::equal(suffix.letters.begin(), suffix.letters.end(),
                      w.letters.end() - suffix.length());
}

inline void consider_candidate(EnumState& st, const FreeWord& w, const RMat& nw, int cls,
                               int depth) {
    const ToleranceProfile& tol = st.tol;
    // Conjugators ending in c^{+-1} repeat the candidate of a shorter prefix,
    // and multiplying a frame of Lambda(c) by a power of c cancels
    // catastrophically; both reasons say skip.
    const FreeWord& core = st.rho->peripheral_word(cls);
    if (ends_with(w, core) || ends_with(w, core.inverse())) return;
    ++st.seen;
    FreeWord delta = w * core * w.inverse();
    if (delta.empty() || delta == st.ctx->gamma_word || delta == st.ctx->gamma_word.inverse())
        return;

    // Orient so that, in the normalized window, 0 < c_plus < c_minus.
    RMat fp = nw * st.frames_plus[cls];
    RMat fm = nw * st.frames_minus[cls];
    std::optional<RMat> cp = chart_of_raw(fp, tol), cm = chart_of_raw(fm, tol);
    auto oriented = [&]() -> bool {
        if (!cp || !cm) return false;
        if (!pd_balanced(*cp, tol) || !pd_balanced(*cm, tol)) return false;
        return pd_balanced(symmetrized(*cm - *cp), tol);
    };
    if (!oriented()) {
        std::swap(cp, cm);
        std::swap(fp, fm);
        if (!oriented()) {
            ++st.rejected;
            return;
        }
    }

    double tp_raw = 0.5 * std::log(determinant(*cp));
    double tm_raw = 0.5 * std::log(determinant(*cm));
    long long k = static_cast<long long>(std::floor(tp_raw / st.ell_f));
    double tp = tp_raw - double(k) * st.ell_f;
    double tm = tm_raw - double(k) * st.ell_f;
    // A tie at the window boundary: the interval starts at a lattice point of
    // the basepoint orbit and belongs to zero; genuine intervals never
    // straddle the boundary, so the test is whether theta_minus passes it.
    if (tm > st.ell_f + 1e-12 * std::max(1.0, st.ell_f)) {
        k += 1;
        tp -= st.ell_f;
        tm -= st.ell_f;
    }
    if (tp < 0) tp = 0;
    if (tm < tp) tm = tp;

    // Normalized chart of the <gamma>-reduced delta+, the dedup invariant.
    RMat wk = st.window_power(-k);
    RMat chart_red = symmetrized(wk * (*cp) * wk.transpose());

    // Duplicate detection: the 1e-6 grid is a spatial index; equality itself
    // is decided at 1e-8 on the interval with the chart as witness. Distinct
    // Lagrangians inside the same 1e-8 ball escalate instead of merging.
    const double dup_tol = 1e-8 * std::max(1.0, st.ell_f);
    const double band = 2e-6;
    long long ka = std::llround(tp * 1e6), kb = std::llround(tm * 1e6);
    std::vector<std::pair<double, double>> images{{tp, tm}};
    if (tp < band) images.push_back({tp + st.ell_f, tm + st.ell_f});
    if (tp > st.ell_f - band) images.push_back({tp - st.ell_f, tm - st.ell_f});
    size_t found = SIZE_MAX;
    for (auto [ip, im] : images) {
        long long ia = std::llround(ip * 1e6), ib = std::llround(im * 1e6);
        for (long long da = -1; da <= 1 && found == SIZE_MAX; ++da)
            for (long long db = -1; db <= 1 && found == SIZE_MAX; ++db) {
                auto it = st.grid.find(grid_key(ia + da, ib + db));
                if (it == st.grid.end()) continue;
                for (size_t idx : it->second) {
                    const OrthotubeRecord& r = st.records[idx];
                    if (std::abs(r.theta_plus - ip) > dup_tol ||
                        std::abs(r.theta_minus - im) > dup_tol)
                        continue;
                    double scale = std::max(1.0, st.record_chart_plus[idx].max_abs());
                    if ((st.record_chart_plus[idx] - chart_red).max_abs() > 1e-5 * scale)
                        throw dedup_ambiguity("distinct orthotubes share a theta key: " +
                                              r.delta_word.str() + " vs " + delta.str());
                    found = idx;
                    break;
                }
            }
        if (found != SIZE_MAX) break;
    }

    if (found != SIZE_MAX) {
        st.records[found].depth = std::min(st.records[found].depth, depth);
        return;
    }

    // Lengths from the pencil eigenvalues of the normalized charts. Records
    // whose smallest eigenvalue sits within pd_margin of 1 correspond to
    // orthotubes too long to resolve; they are dropped and counted, which
    // only sharpens every truncated bound.
    std::vector<double> mu = pd_pencil_eigenvalues(*cp, *cm, tol);
    if (mu.back() <= 1.0 + tol.pd_margin) {
        ++st.degenerate;
        return;
    }
    std::vector<double> comps;
    double df = 0;
    for (auto it = mu.rbegin(); it != mu.rend(); ++it) {
        comps.push_back(2 * arccoth(std::sqrt(*it)));
        df += 0.5 * std::log(*it);
    }

    OrthotubeRecord rec;
    FreeWord gpow; // gamma^{-k} delta gamma^{k}
    for (long long i = 0; i < std::llabs(k); ++i)
        gpow = gpow * (k > 0 ? st.ctx->gamma_word.inverse() : st.ctx->gamma_word);
    rec.delta_word = gpow * delta * gpow.inverse();
    rec.boundary_class = cls;
    rec.depth = depth;
    RMat red = st.gamma_power(-k) * st.ctx->norm_inv.g;
    rec.delta_plus = LagrangianFrame::from_frame(red * fp, tol);
    rec.delta_minus = LagrangianFrame::from_frame(red * fm, tol);
    rec.theta_plus = tp;
    rec.theta_minus = tm;
    rec.ell_vect = WeylVector(comps, tol);
    rec.ell_f = rec.ell_vect.finsler();
    rec.ell_r = rec.ell_vect.riemannian();
    rec.df_term = df;
    if (std::abs(df - (tm - tp)) > 1e-6 * (1 + std::abs(df))) {
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "orthotube record %s (w=%s cls=%d): theta interval and pencil term disagree: "
                      "df=%.12g interval=%.12g (tp_raw=%.12g tm_raw=%.12g k=%lld) cp=%s cm=%s",
                      rec.delta_word.str().c_str(), w.str().c_str(), cls, df, tm - tp, tp_raw,
                      tm_raw, k, cp->str().c_str(), cm->str().c_str());
        throw numerical_error(buf);
    }
    const int n = st.n;
    rec.lower_term = n * log_coth(rec.ell_f / n);
    rec.upper_term = n * log_coth(rec.ell_vect.smallest() / 2);

    st.grid[grid_key(ka, kb)].push_back(st.records.size());
    st.record_chart_plus.push_back(std::move(chart_red));
    st.records.push_back(std::move(rec));
}

inline void dfs_words(EnumState& st, FreeWord& w, const RMat& nw, int last, int depth,
                      int max_depth) {
    for (int c = 0; c < st.rho->boundary_count(); ++c) consider_candidate(st, w, nw, c, depth);
    if (depth == max_depth) return;
    for (int letter : {1, -1, 2, -2}) {
        if (last != 0 && letter == -last) continue;
        w.letters.push_back(letter);
        int gi = (letter == 1) ? 0 : (letter == -1) ? 1 : (letter == 2) ? 2 : 3;
        RMat next = nw * st.gen_mats[gi];
        dfs_words(st, w, next, letter, depth + 1, max_depth);
        w.letters.pop_back();
    }
}

} // namespace detail

inline SpectrumReport orthospectrum(const Representation& rho, const FreeWord& gamma_word,
                                    int depth, int boundary_index = -1) {
    const ToleranceProfile& tol = rho.tol;
    BoundaryContext ctx = make_boundary_context(rho, gamma_word);

    detail::EnumState st;
    st.rho = &rho;
    st.ctx = &ctx;
    st.tol = tol;
    st.n = rho.n;
    st.ell_f = ctx.lengths.finsler;
    for (int k = 0; k < rho.spec.generators; ++k) { // order matches letters 1,-1,2,-2
        st.gen_mats.push_back(rho.images[k].g);
        st.gen_mats.push_back(rho.images[k].inverse().g);
    }
    for (int c = 0; c < rho.boundary_count(); ++c) {
        st.frames_plus.push_back(rho.peripheral_shilov(c).attract.F);
        st.frames_minus.push_back(rho.peripheral_shilov(c).repel.F);
    }
    // In the normalized window rho(gamma) is block diagonal; its A-block
    // transports charts across window translates.
    RMat gw = ctx.norm.g * rho.evaluate(gamma_word).g * ctx.norm_inv.g;
    {
        double off = std::max(gw.block(0, rho.n, rho.n, rho.n).max_abs(),
                              gw.block(rho.n, 0, rho.n, rho.n).max_abs());
        if (off > 1e-7 * std::max(1.0, gw.max_abs()))
            throw numerical_error("orthospectrum: normalized gamma is not block diagonal");
    }
    st.window_block = gw.block(0, 0, rho.n, rho.n);

    FreeWord w;
    detail::dfs_words(st, w, ctx.norm.g, 0, 0, depth);

    SpectrumReport rep;
    rep.gamma_word = gamma_word;
    rep.boundary_index = boundary_index;
    rep.depth = depth;
    rep.basepoint = ctx.basepoint_desc;
    rep.gamma_vect = ctx.lengths.vect;
    rep.gamma_ell_f = ctx.lengths.finsler;
    rep.gamma_ell_r = ctx.lengths.riemannian;
    rep.records = std::move(st.records);
    rep.candidates_seen = st.seen;
    rep.rejected_candidates = st.rejected;
    rep.degenerate_skipped = st.degenerate;

    // flag orthotubes running from gamma's boundary component back to itself
    if (boundary_index >= 0)
        for (auto& r : rep.records) r.same_boundary = (r.boundary_class == boundary_index);

    std::sort(rep.records.begin(), rep.records.end(),
              [](const OrthotubeRecord& a, const OrthotubeRecord& b) {
                  return a.theta_plus < b.theta_plus;
              });
    for (const auto& r : rep.records) {
        rep.identity_sum += r.df_term;
        rep.lower_sum += r.lower_term;
        rep.upper_sum += r.upper_term;
    }
    rep.identity_residual = rep.gamma_ell_f - rep.identity_sum;
    if (rep.identity_residual < -tol.compare_rel * std::max(1.0, rep.gamma_ell_f))
        throw numerical_error("orthospectrum: partial identity sum exceeds ellF(gamma)");
    // intervals must be pairwise disjoint: sorted by theta_plus, each must
    // start past the previous end
    for (size_t i = 1; i < rep.records.size(); ++i)
        if (rep.records[i].theta_plus <
            rep.records[i - 1].theta_minus - tol.compare_rel * std::max(1.0, rep.gamma_ell_f)) {
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "orthospectrum: overlapping theta intervals [%0.12f, %0.12f] (%s) vs "
                          "[%0.12f, %0.12f] (%s)",
                          rep.records[i - 1].theta_plus, rep.records[i - 1].theta_minus,
                          rep.records[i - 1].delta_word.str().c_str(), rep.records[i].theta_plus,
                          rep.records[i].theta_minus, rep.records[i].delta_word.str().c_str());
            throw numerical_error(buf);
        }
    return rep;
}

inline SpectrumReport orthospectrum(const Representation& rho, int boundary_index, int depth) {
    return orthospectrum(rho, rho.peripheral_word(boundary_index), depth, boundary_index);
}

// ---------------------------------------------------------------------------
// Verifiers.
// ---------------------------------------------------------------------------

inline std::vector<double> cumulative_by_depth(const SpectrumReport& rep,
                                               double OrthotubeRecord::*term) {
    std::vector<double> sums(static_cast<size_t>(rep.depth) + 1, 0.0);
    for (const auto& r : rep.records)
        for (int d = r.depth; d <= rep.depth; ++d) sums[d] += r.*term;
    return sums;
}

enum class Metric { finsler, riemannian };

struct InequalityBoundary {
    int boundary = 0;
    double ell = 0;             // ellF or ellR of gamma
    double lower_sum = 0;       // truncated right-hand side
    double upper_sum = 0;       // truncated left-hand side (not a bound when truncated)
    double lower_margin = 0;    // ell - lower_sum
    bool lower_ok_every_depth = true;
    bool chain_ok = true;       // upper_term >= df_term >= lower_term per record
    double min_upper_gap = 0;   // min over records of upper - df
    double min_lower_gap = 0;   // min over records of df - lower
    double max_upper_gap = 0;   // max over records of upper - lower (strictness witness)
    bool riemannian_route_ok = true; // ellR >= 2 ellF / sqrt(n)
    int record_count = 0;
};

struct InequalityReport {
    Metric metric = Metric::finsler;
    int depth = 0;
    std::vector<InequalityBoundary> boundaries;
    bool pass = true;
};

inline InequalityReport verify_inequalities(const Representation& rho, Metric metric, int depth,
                                            int only_boundary = -1) {
    InequalityReport rep;
    rep.metric = metric;
    rep.depth = depth;
    const double slack = 1e-9;
    const int n = rho.n;
    for (int b = 0; b < rho.boundary_count(); ++b) {
        if (only_boundary >= 0 && b != only_boundary) continue;
        SpectrumReport sp = orthospectrum(rho, b, depth);
        InequalityBoundary tb;
        tb.boundary = b;
        tb.record_count = static_cast<int>(sp.records.size());
        tb.min_upper_gap = std::numeric_limits<double>::infinity();
        tb.min_lower_gap = std::numeric_limits<double>::infinity();

        auto lower_of = [&](const OrthotubeRecord& r) {
            if (metric == Metric::finsler) return r.lower_term;
            return 2 * std::sqrt(double(n)) * log_coth(r.ell_r / (2 * std::sqrt(double(n))));
        };
        auto upper_of = [&](const OrthotubeRecord& r) {
            double u = r.upper_term; // n log coth(ell_vect_n / 2)
            if (metric == Metric::finsler) return u;
            return 2.0 / std::sqrt(double(n)) * u;
        };
        auto df_of = [&](const OrthotubeRecord& r) {
            if (metric == Metric::finsler) return r.df_term;
            return 2.0 / std::sqrt(double(n)) * r.df_term;
        };

        tb.ell = (metric == Metric::finsler) ? sp.gamma_ell_f : sp.gamma_ell_r;
        std::vector<double> by_depth(static_cast<size_t>(depth) + 1, 0.0);
        for (const auto& r : sp.records) {
            double lo = lower_of(r), up = upper_of(r), mid = df_of(r);
            tb.lower_sum += lo;
            tb.upper_sum += up;
            tb.min_upper_gap = std::min(tb.min_upper_gap, up - mid);
            tb.min_lower_gap = std::min(tb.min_lower_gap, mid - lo);
            tb.max_upper_gap = std::max(tb.max_upper_gap, up - lo);
            if (up < mid - slack || mid < lo - slack) tb.chain_ok = false;
            for (int d = r.depth; d <= depth; ++d) by_depth[d] += lo;
        }
        for (double s : by_depth)
            if (s > tb.ell + 1e-7 * (1 + tb.ell)) tb.lower_ok_every_depth = false;
        tb.lower_margin = tb.ell - tb.lower_sum;
        if (metric == Metric::riemannian)
            tb.riemannian_route_ok =
                sp.gamma_ell_r >= 2 * sp.gamma_ell_f / std::sqrt(double(n)) - 1e-9;
        rep.boundaries.push_back(tb);
        rep.pass = rep.pass && tb.lower_ok_every_depth && tb.chain_ok && tb.riemannian_route_ok &&
                   tb.lower_margin > -1e-7 * (1 + tb.ell);
    }
    return rep;
}

struct IdentityReport {
    int boundary = 0;
    int depth = 0;
    double ell_b = 0;          // 2 ellF(gamma)
    double period_value = 0;   // log |det R(gamma-, y, gamma y, gamma+)|
    double period_residual = 0;
    double term_pairing_max = 0; // max |term - 2 df_term|
    double partial_sum = 0;
    std::vector<double> residual_by_depth;
    double final_residual = 0;
    double rel_residual = 0;
    bool pass = true;
};

inline IdentityReport verify_identity(const Representation& rho, int boundary, int depth) {
    const ToleranceProfile& tol = rho.tol;
    SpectrumReport sp = orthospectrum(rho, boundary, depth);
    IdentityReport rep;
    rep.boundary = boundary;
    rep.depth = depth;
    rep.ell_b = 2 * sp.gamma_ell_f;

    const ShilovData& gd = rho.peripheral_shilov(boundary);
    // Labourie period: pick y = the basepoint Lagrangian of another boundary
    const ShilovData& od = rho.peripheral_shilov((boundary + 1) % rho.boundary_count());
    LagrangianFrame y = od.attract;
    if (!is_maximal_triple(gd.repel, y, gd.attract, tol)) y = od.repel;
    LagrangianFrame gy = act(rho.peripheral_image(boundary), y, tol);
    RMat r = cross_ratio(gd.repel, y, gy, gd.attract, tol);
    rep.period_value = std::log(std::abs(determinant(r)));
    rep.period_residual = std::abs(rep.period_value - rep.ell_b);

    std::vector<double> term_by_depth(static_cast<size_t>(depth) + 1, 0.0);
    for (const auto& rec : sp.records) {
        // independent route: determinant of the actual cross-ratio matrix
        RMat cr = cross_ratio(gd.repel, rec.delta_plus, rec.delta_minus, gd.attract, tol);
        double term = std::log(std::abs(determinant(cr)));
        rep.term_pairing_max = std::max(rep.term_pairing_max, std::abs(term - 2 * rec.df_term));
        rep.partial_sum += term;
        for (int d = rec.depth; d <= depth; ++d) term_by_depth[d] += term;
    }
    for (int d = 0; d <= depth; ++d) rep.residual_by_depth.push_back(rep.ell_b - term_by_depth[d]);
    rep.final_residual = rep.ell_b - rep.partial_sum;
    rep.rel_residual = rep.final_residual / rep.ell_b;
    rep.pass = rep.period_residual < 1e-7 * (1 + rep.ell_b) && rep.term_pairing_max < 1e-7 &&
               rep.final_residual > -1e-7;
    return rep;
}

struct GapReport {
    double big_l = 0, eta = 0, eps = 0;
    int depth = 0;
    double ell_f = 0, ell_r = 0;
    double ell_f_expected = 0, ell_r_expected = 0;
    std::vector<double> design_residuals; // |2 log coth(l(alpha_i)/2) - (L - eps)|
    double a1_lower_sum = 0, a2_lower_sum = 0;
    bool pass = true;
};

// Representation with long boundary but arbitrarily small right-hand sums:
// n pairs of pants glued along the lengths solved for 2 log coth = L - eps.
inline GapReport gap_experiment(double big_l, double eta, int depth, int n = 2,
                                const ToleranceProfile& tol = default_tolerances()) {
    if (n != 2)
        throw domain_error("gap_experiment: only n = 2 is supported (the surface is a pair of pants)");
    GapReport rep;
    rep.big_l = big_l;
    rep.eta = eta;
    rep.eps = eta / (n * n);
    rep.depth = depth;
    // The free cuff controls how far the non-designed orthotubes are: a thin
    // free cuff pushes the cross-factor orthogeodesics out, which is what
    // keeps the right-hand sums of the product below eta. Thin it until the
    // two designed records alone account for at most eta / 4.
    double free_cuff = big_l;
    CuffSolution s = solve_cuff_for_target_ortho(big_l, rep.eps, free_cuff, tol);
    for (int tries = 0; tries < 60; ++tries) {
        double cross = pants_orthogeodesic_length(s.l0, s.l2, s.l1);
        double designed = n * n * log_coth((s.ortho_length + cross) / (2 * n));
        if (designed <= eta / 4) break;
        free_cuff /= 2;
        if (free_cuff < 1e-6)
            throw builder_error("gap_experiment: cannot thin the free cuff far enough");
        s = solve_cuff_for_target_ortho(big_l, rep.eps, free_cuff, tol);
    }
    Representation f1 = build_pants_fuchsian(s.l0, s.l1, s.l2, tol);
    Representation f2 = build_pants_fuchsian(s.l0, s.l2, s.l1, tol);
    Representation prod = product_of_fuchsians({f1, f2}, tol);

    TranslationLengths t0 = translation_lengths(prod.peripheral_shilov(0), tol);
    rep.ell_f = t0.finsler;
    rep.ell_r = t0.riemannian;
    rep.ell_f_expected = n * big_l / 2;
    rep.ell_r_expected = std::sqrt(double(n)) * big_l;

    // designed orthogeodesics, measured geometrically in each rank-1 factor:
    // in factor i the seam between cuff 0 and cuff i hits the target
    for (int i = 1; i <= 2; ++i) {
        const Representation& f = (i == 1) ? f1 : f2;
        WeylVector ol = orthotube_lengths(f.peripheral_shilov(0), f.peripheral_shilov(i), tol);
        rep.design_residuals.push_back(std::abs(2 * log_coth(ol.riemannian() / 2) -
                                                (big_l - rep.eps)));
    }

    InequalityReport a1 = verify_inequalities(prod, Metric::finsler, depth, 0);
    InequalityReport a2 = verify_inequalities(prod, Metric::riemannian, depth, 0);
    rep.a1_lower_sum = a1.boundaries[0].lower_sum;
    rep.a2_lower_sum = a2.boundaries[0].lower_sum;

    rep.pass = std::abs(rep.ell_f - rep.ell_f_expected) < 1e-6 &&
               std::abs(rep.ell_r - rep.ell_r_expected) < 1e-6 && a1.pass && a2.pass &&
               rep.a1_lower_sum < eta && rep.a2_lower_sum < eta;
    for (double d : rep.design_residuals) rep.pass = rep.pass && d < 1e-7;
    return rep;
}

struct DoubleCheckRecord {
    std::string delta;
    double ell_f_alpha = 0;
    double ell_f_doubled = 0;
    double length_residual = 0; // |2 ellF(alpha) - ellF(D alpha)|
    bool endpoints_match = false;
};

struct DoubleCheckReport {
    double relation_residual = 0;
    std::vector<DoubleCheckRecord> records;
    bool pass = true;
};

// Double consistency: relations of the doubled presentation and
// 2 ellF(alpha) = ellF(D alpha) on the shortest records of the gamma0 sum.
inline DoubleCheckReport verify_double(const Representation& rho, int depth, int max_records = 10) {
    const ToleranceProfile& tol = rho.tol;
    DoubleCheckReport rep;
    DoubledRepresentation d = double_representation(rho);
    rep.relation_residual = d.max_relation_residual;

    SpectrumReport sp = orthospectrum(rho, 0, depth);
    std::vector<const OrthotubeRecord*> recs;
    for (const auto& r : sp.records) recs.push_back(&r);
    std::sort(recs.begin(), recs.end(),
              [](const OrthotubeRecord* a, const OrthotubeRecord* b) { return a->ell_f < b->ell_f; });
    if (static_cast<int>(recs.size()) > max_records) recs.resize(max_records);

    const ShilovData& gd = rho.peripheral_shilov(0);
    for (const OrthotubeRecord* r : recs) {
        DoubleCheckRecord dr;
        dr.delta = r->delta_word.str();
        dr.ell_f_alpha = r->ell_f;
        SymplecticElement da = doubled_ortho_element(rho, d, r->delta_word);
        TranslationLengths tl = translation_lengths(da, tol);
        dr.ell_f_doubled = tl.finsler;
        dr.length_residual = std::abs(2 * r->ell_f - tl.finsler);

        ShilovData delta_data = shilov_data(rho.evaluate(r->delta_word), tol);
        RTube ortho = orthotube_for_pair(gd, delta_data, tol);
        ShilovData da_data = shilov_data(da, tol);
        dr.endpoints_match = (frames_equal(da_data.attract, ortho.a, 1e-6) &&
                              frames_equal(da_data.repel, ortho.b, 1e-6)) ||
                             (frames_equal(da_data.attract, ortho.b, 1e-6) &&
                              frames_equal(da_data.repel, ortho.a, 1e-6));
        rep.pass = rep.pass && dr.length_residual < 1e-7 * (1 + dr.ell_f_doubled) &&
                   dr.endpoints_match;
        rep.records.push_back(dr);
    }
    rep.pass = rep.pass && rep.relation_residual < 1e-7;
    return rep;
}

} // namespace siegelort
