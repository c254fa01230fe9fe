#pragma once

#include <stdexcept>
#include <string>

namespace siegelort {

// Shared tolerance policy. Every comparison between computed reals goes
// through rel_close(); PD and transversality tests use pd_margin as an
// absolute floor so that near-degenerate configurations are rejected
// instead of silently perturbed.
struct ToleranceProfile {
    double residual_abs = 1e-9;
    double compare_rel = 1e-7;
    double pd_margin = 1e-9;
    double condition_cap = 1e12;

    bool rel_close(double a, double b) const {
        double scale = std::max(std::abs(a), std::abs(b));
        return std::abs(a - b) <= std::max(residual_abs, compare_rel * scale);
    }
};

inline const ToleranceProfile& default_tolerances() {
    static const ToleranceProfile t{};
    return t;
}

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition violations: non-transverse frames, non-maximal tuples,
// invalid builder parameters.
struct domain_error : error {
    explicit domain_error(const std::string& msg) : error(msg) {}
};

// Iteration failures, conditioning blowups, spectra outside guaranteed
// ranges; carries a short description of the offending data.
struct numerical_error : error {
    explicit numerical_error(const std::string& msg) : error(msg) {}
};

struct not_shilov_hyperbolic : error {
    explicit not_shilov_hyperbolic(const std::string& msg) : error(msg) {}
};

struct disjoint_tubes : error {
    explicit disjoint_tubes(const std::string& msg) : error(msg) {}
};

struct builder_error : error {
    explicit builder_error(const std::string& msg) : error(msg) {}
};

struct dedup_ambiguity : error {
    explicit dedup_ambiguity(const std::string& msg) : error(msg) {}
};

} // namespace siegelort
