#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hhcert/gauss.hpp"
#include "hhcert/rational.hpp"
#include "hhcert/rng.hpp"

namespace hhcert {

/// Which measure a simplex point lives under: the solid region
/// {c >= 0, sum c <= 1} with n-dimensional Lebesgue measure, or the
/// probability face {c >= 0, sum c = 1} with the flat Dirichlet law.
enum class SimplexMode { Solid, Face };

inline const char* to_string(SimplexMode mode) {
    return mode == SimplexMode::Solid ? "solid" : "face";
}

// Absolute tolerance for the support invariants below; covers
// double-precision normalization error in the samplers.
inline constexpr double kSupportTol = 1e-12;

struct SimplexPoint {
    std::vector<double> coords;
    SimplexMode mode = SimplexMode::Solid;

    bool satisfies_invariants(double tol = kSupportTol) const {
        double sum = 0.0;
        for (double c : coords) {
            if (!(c >= 0.0)) return false;
            sum += c;
        }
        if (mode == SimplexMode::Solid) return sum <= 1.0 + tol;
        return std::abs(sum - 1.0) <= tol;
    }
};

/// Simplex anchored at the origin with positive side lengths a^1..a^n:
/// {c >= 0 : c^1/a^1 + ... + c^n/a^n <= 1}.
struct ScaledSimplex {
    std::vector<double> sides;

    explicit ScaledSimplex(std::vector<double> s) : sides(std::move(s)) {
        if (sides.empty()) throw std::domain_error("simplex needs at least one side");
        for (double a : sides)
            if (!(a > 0.0)) throw std::domain_error("simplex sides must be strictly positive");
    }
};

/// Exact volume (prod a^i) / n! of the scaled simplex.
inline Rational simplex_volume(std::span<const Rational> sides) {
    if (sides.empty()) throw std::domain_error("simplex needs at least one side");
    Rational prod = 1;
    for (const Rational& a : sides) {
        if (a <= 0) throw std::domain_error("simplex sides must be strictly positive");
        prod *= a;
    }
    return prod / Rational(factorial(static_cast<unsigned>(sides.size())));
}

inline Rational simplex_volume(std::initializer_list<Rational> sides) {
    return simplex_volume(std::span<const Rational>(sides.begin(), sides.size()));
}

/// Reference measure mass for each mode at dimension n: 1/n! for the solid
/// simplex, 1/(n-1)! for the face parametrized by its first n-1 coordinates
/// (a single point of mass 1 when n = 1). Callers use this to normalize the
/// unnormalized integrals reported by integrate_simplex.
inline double mode_volume(int n, SimplexMode mode) {
    if (n < 1) throw std::domain_error("dimension must be >= 1");
    const unsigned k = mode == SimplexMode::Solid ? static_cast<unsigned>(n)
                                                  : static_cast<unsigned>(n - 1);
    return 1.0 / to_double(Rational(factorial(k)));
}

/// Uniform sample from the solid simplex: n+1 exponentials normalized to
/// sum 1, last coordinate dropped. Rejection-free in any dimension.
inline SimplexPoint sample_solid(int n, RandomStream& rng) {
    if (n < 1) throw std::domain_error("dimension must be >= 1");
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    double sum = 0.0;
    for (double& v : e) {
        v = rng.exponential();
        sum += v;
    }
    std::vector<double> coords(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) coords[i] = e[i] / sum;
    return SimplexPoint{std::move(coords), SimplexMode::Solid};
}

/// Flat-Dirichlet sample from the probability face: n exponentials
/// normalized to sum 1.
inline SimplexPoint sample_face(int n, RandomStream& rng) {
    if (n < 1) throw std::domain_error("dimension must be >= 1");
    std::vector<double> coords(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& v : coords) {
        v = rng.exponential();
        sum += v;
    }
    for (double& v : coords) v /= sum;
    return SimplexPoint{std::move(coords), SimplexMode::Face};
}

inline SimplexPoint sample_point(int n, SimplexMode mode, RandomStream& rng) {
    return mode == SimplexMode::Solid ? sample_solid(n, rng) : sample_face(n, rng);
}

/// Thrown when an integrand produces a non-finite value; carries the point.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, std::vector<double> point)
        : std::runtime_error(what + " at point " + format(point)), point_(std::move(point)) {}

    const std::vector<double>& point() const { return point_; }

private:
    static std::string format(const std::vector<double>& p) {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
        os << ")";
        return os.str();
    }

    std::vector<double> point_;
};

enum class Scheme { Deterministic, MonteCarlo };

struct IntegralEstimate {
    double value = 0.0;  // UNNORMALIZED integral; divide by mode_volume to average
    double error = 0.0;  // quadrature error estimate, or Monte Carlo standard error
    long long evaluations = 0;
};

/// Options for the deterministic scheme.
struct QuadOptions {
    std::vector<double> sides;  // empty => unit sides
    // Split the 1-D panel on `axis` at the absolute coordinate `value`;
    // restores fast convergence across |.|-style kinks (e.g. c^1 = 1/n).
    std::vector<std::pair<int, double>> axis_splits;
};

namespace detail {

template <class F>
double nested_solid(const F& f, const std::vector<double>& sides,
                    const std::vector<std::vector<double>>& splits, const GaussRule& rule,
                    std::vector<double>& point, int axis, double remaining_frac,
                    long long& evals) {
    const int n = static_cast<int>(sides.size());
    const double upper = sides[axis] * std::max(0.0, remaining_frac);
    auto integrand = [&](double c) -> double {
        point[axis] = c;
        if (axis == n - 1) {
            ++evals;
            const double v = f(std::span<const double>(point.data(), point.size()));
            if (!std::isfinite(v)) throw EvaluationError("integrand is non-finite", point);
            return v;
        }
        return nested_solid(f, sides, splits, rule, point, axis + 1,
                            remaining_frac - c / sides[axis], evals);
    };
    if (upper <= 0.0) return 0.0;
    return gl_split(integrand, 0.0, upper, splits[axis], rule);
}

template <class F>
double deterministic_pass(const F& f, int n, SimplexMode mode, int order,
                          const QuadOptions& opts, long long& evals) {
    std::vector<double> sides = opts.sides;
    if (sides.empty()) sides.assign(static_cast<std::size_t>(n), 1.0);
    if (static_cast<int>(sides.size()) != n)
        throw std::domain_error("sides length must match dimension");
    sides = ScaledSimplex(std::move(sides)).sides;  // validates positivity

    const GaussRule& rule = gauss_rule(order);

    if (mode == SimplexMode::Face) {
        // The face is parametrized by its first n-1 coordinates over the
        // (n-1)-dimensional solid simplex, with c^n = 1 - sum of the rest.
        if (n == 1) {
            ++evals;
            std::vector<double> point{1.0};
            const double v = f(std::span<const double>(point.data(), 1));
            if (!std::isfinite(v)) throw EvaluationError("integrand is non-finite", point);
            return v;
        }
        std::vector<std::vector<double>> splits(static_cast<std::size_t>(n - 1));
        for (const auto& [axis, value] : opts.axis_splits)
            if (axis >= 0 && axis < n - 1) splits[axis].push_back(value);
        for (auto& s : splits) std::sort(s.begin(), s.end());
        std::vector<double> reduced(static_cast<std::size_t>(n - 1), 1.0);
        std::vector<double> point(static_cast<std::size_t>(n - 1));
        std::vector<double> full(static_cast<std::size_t>(n));
        auto lifted = [&](std::span<const double> p) {
            double sum = 0.0;
            for (int i = 0; i < n - 1; ++i) {
                full[i] = p[i];
                sum += p[i];
            }
            full[n - 1] = 1.0 - sum;
            return f(std::span<const double>(full.data(), full.size()));
        };
        return nested_solid(lifted, reduced, splits, rule, point, 0, 1.0, evals);
    }

    std::vector<std::vector<double>> splits(static_cast<std::size_t>(n));
    for (const auto& [axis, value] : opts.axis_splits)
        if (axis >= 0 && axis < n) splits[axis].push_back(value);
    for (auto& s : splits) std::sort(s.begin(), s.end());
    std::vector<double> point(static_cast<std::size_t>(n));
    return nested_solid(f, sides, splits, rule, point, 0, 1.0, evals);
}

}  // namespace detail

/// Integrates f over the simplex in the given mode.
///
/// Deterministic: nested Gauss-Legendre panels mapped onto the triangular
/// limits; `budget` is the per-axis order (default headroom at 32); the error
/// estimate is the difference against an order+8 pass. MonteCarlo: `budget`
/// samples from the mode's sampler; the error is the standard error.
///
/// Both schemes report the UNNORMALIZED integral; divide by
/// mode_volume(n, mode) for the average.
template <class F>
IntegralEstimate integrate_simplex(F&& f, int n, SimplexMode mode, long long budget,
                                   Scheme scheme, std::uint64_t seed = kDefaultSeed,
                                   const QuadOptions& opts = {}) {
    if (n < 1) throw std::domain_error("dimension must be >= 1");
    if (budget <= 0) throw std::domain_error("budget must be positive");

    IntegralEstimate est;
    if (scheme == Scheme::Deterministic) {
        const int order = static_cast<int>(std::clamp<long long>(budget, 2, 64));
        const double coarse = detail::deterministic_pass(f, n, mode, order, opts, est.evaluations);
        const double fine = detail::deterministic_pass(f, n, mode, order + 8, opts, est.evaluations);
        est.value = fine;
        est.error = std::abs(fine - coarse);
        return est;
    }

    RandomStream rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (long long i = 0; i < budget; ++i) {
        SimplexPoint p = sample_point(n, mode, rng);
        const double v = f(std::span<const double>(p.coords.data(), p.coords.size()));
        if (!std::isfinite(v)) throw EvaluationError("integrand is non-finite", p.coords);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(budget);
    const double volume = mode_volume(n, mode);
    double se = 0.0;
    if (budget > 1) {
        const double ss = std::max(0.0, sumsq - static_cast<double>(budget) * mean * mean);
        se = std::sqrt(ss / static_cast<double>(budget - 1)) / std::sqrt(static_cast<double>(budget));
    }
    est.value = mean * volume;
    est.error = se * volume;
    est.evaluations = budget;
    return est;
}

}  // namespace hhcert
