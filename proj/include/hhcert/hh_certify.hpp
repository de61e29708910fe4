#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hhcert/circulant.hpp"
#include "hhcert/expr.hpp"
#include "hhcert/gauss.hpp"
#include "hhcert/rng.hpp"
#include "hhcert/simplex.hpp"

namespace hhcert {

/// One-variable test function: a named builtin or a parsed expression.
struct Function1D {
    std::string name;
    std::function<double(double)> fn;
};

/// Builtins: square, reciprocal, exponential, logarithm, sqrtAbs.
inline Function1D builtin_function(const std::string& name) {
    if (name == "square") return {"square", [](double x) { return x * x; }};
    if (name == "reciprocal") return {"reciprocal", [](double x) { return 1.0 / x; }};
    if (name == "exponential") return {"exponential", [](double x) { return std::exp(x); }};
    if (name == "logarithm") return {"logarithm", [](double x) { return std::log(x); }};
    if (name == "sqrtAbs") return {"sqrtAbs", [](double x) { return std::sqrt(std::abs(x)); }};
    throw std::domain_error("unknown builtin function: " + name);
}

inline Function1D function_from_expression(const std::string& text) {
    expr::ExprPtr ast = expr::parse(text, 1);
    return {text, [ast](double x) {
                expr::EvalEnv env{1, {x}};
                return expr::eval(*ast, env);
            }};
}

/// Symmetric n-variable test function.
struct FunctionND {
    std::string name;
    int arity = 1;
    std::function<double(std::span<const double>)> fn;
};

inline FunctionND function_from_expression_nd(const std::string& text, int arity) {
    expr::ExprPtr ast = expr::parse(text, arity);
    return {text, arity, [ast, arity](std::span<const double> x) {
                expr::EvalEnv env{arity, std::vector<double>(x.begin(), x.end())};
                return expr::eval(*ast, env);
            }};
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline std::vector<double> linspace(Interval dom, int count) {
    if (count < 2) throw std::domain_error("grid needs at least 2 points");
    if (!(dom.lo < dom.hi)) throw std::domain_error("domain must satisfy lo < hi");
    std::vector<double> pts(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        pts[static_cast<std::size_t>(i)] =
            dom.lo + (dom.hi - dom.lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return pts;
}

// ---------------------------------------------------------------------------
// Triangle quadrature
// ---------------------------------------------------------------------------

namespace detail {

// Number of geometric u-panels toward the s+t -> 0 corner. The Duffy
// transform makes the corner behavior of the relevant integrands mild
// (u log u, u^{3/2}, or constant); dyadic grading then lets a small fixed
// rule resolve them to near machine precision.
inline constexpr int kDuffyLevels = 20;
inline constexpr int kDuffyOrderU = 12;

/// Integral of F(s, t) over the triangle {s, t >= 0, s + t <= 1} through the
/// Duffy substitution s = u(1 - v), t = u v (Jacobian u). `v_splits` are
/// interior kink lines: v = 1/2 is the s = t diagonal and zero crossings of
/// the pulled-back segment values land on fixed v as well.
template <class F>
double triangle_integral(F&& f, int order_v, std::vector<double> v_splits) {
    const GaussRule& rv = gauss_rule(order_v);
    const GaussRule& ru = gauss_rule(kDuffyOrderU);

    std::sort(v_splits.begin(), v_splits.end());
    std::vector<double> v_edges{0.0};
    for (double s : v_splits)
        if (s > v_edges.back() + 1e-14 && s < 1.0 - 1e-14) v_edges.push_back(s);
    v_edges.push_back(1.0);

    std::vector<double> u_edges;
    u_edges.reserve(kDuffyLevels + 2);
    u_edges.push_back(0.0);
    for (int k = kDuffyLevels; k >= 1; --k) u_edges.push_back(std::ldexp(1.0, -k));
    u_edges.push_back(1.0);

    double total = 0.0;
    for (std::size_t pv = 0; pv + 1 < v_edges.size(); ++pv) {
        const double va = v_edges[pv], vb = v_edges[pv + 1];
        const double vmid = 0.5 * (va + vb), vhalf = 0.5 * (vb - va);
        for (std::size_t i = 0; i < rv.nodes.size(); ++i) {
            const double v = vmid + vhalf * rv.nodes[i];
            auto u_integrand = [&](double u) { return f(u * (1.0 - v), u * v) * u; };
            double inner = 0.0;
            for (std::size_t pu = 0; pu + 1 < u_edges.size(); ++pu)
                inner += gl_panel(u_integrand, u_edges[pu], u_edges[pu + 1], ru);
            total += rv.weights[i] * vhalf * inner;
        }
    }
    return total;
}

// v where the pulled-back value (1-v) a + v b crosses zero, if interior.
inline std::optional<double> value_zero_crossing(double a, double b) {
    if (a == b) return std::nullopt;
    const double v0 = a / (a - b);
    if (v0 > 0.0 && v0 < 1.0) return v0;
    return std::nullopt;
}

}  // namespace detail

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // difference against an order+8 pass
};

/// The double integral over {s, t >= 0, s + t <= 1} of g(s x1 + t x2).
inline QuadResult hh_lhs(const Function1D& g, double x1, double x2, int quad_order = 32) {
    auto F = [&](double s, double t) {
        const double v = g.fn(s * x1 + t * x2);
        if (!std::isfinite(v))
            throw EvaluationError(g.name + " is non-finite inside the integration triangle",
                                  {s, t, s * x1 + t * x2});
        return v;
    };
    std::vector<double> splits;
    if (auto v0 = detail::value_zero_crossing(x1, x2)) splits.push_back(*v0);
    const double coarse = detail::triangle_integral(F, quad_order, splits);
    const double fine = detail::triangle_integral(F, quad_order + 8, splits);
    return {fine, std::abs(fine - coarse)};
}

/// Half the integral of max{g(s x1 + t x2), g(t x1 + s x2)} over the same
/// triangle; the max introduces a kink along s = t, which the v = 1/2 split
/// absorbs.
inline QuadResult quasi_lhs(const Function1D& g, double x1, double x2, int quad_order = 32) {
    auto F = [&](double s, double t) {
        const double a = g.fn(s * x1 + t * x2);
        const double b = g.fn(t * x1 + s * x2);
        if (!std::isfinite(a) || !std::isfinite(b))
            throw EvaluationError(g.name + " is non-finite inside the integration triangle",
                                  {s, t});
        return std::max(a, b);
    };
    std::vector<double> splits{0.5};
    if (auto v0 = detail::value_zero_crossing(x1, x2)) splits.push_back(*v0);
    if (auto v0 = detail::value_zero_crossing(x2, x1)) splits.push_back(*v0);
    const double coarse = 0.5 * detail::triangle_integral(F, quad_order, splits);
    const double fine = 0.5 * detail::triangle_integral(F, quad_order + 8, splits);
    return {fine, std::abs(fine - coarse)};
}

// ---------------------------------------------------------------------------
// Certification reports
// ---------------------------------------------------------------------------

enum class CertProperty { Convex, QuasiConvex, StrongConvex, NDPremise, JensenConclusion };

inline const char* to_string(CertProperty p) {
    switch (p) {
        case CertProperty::Convex: return "convex";
        case CertProperty::QuasiConvex: return "quasi-convex";
        case CertProperty::StrongConvex: return "strongly-convex";
        case CertProperty::NDPremise: return "nd-premise";
        case CertProperty::JensenConclusion: return "jensen-conclusion";
    }
    return "?";
}

enum class Verdict { Pass, Fail };

struct PairRecord {
    double x1 = 0, x2 = 0, lhs = 0, rhs = 0, margin = 0;
};

struct PointRecord {
    std::vector<double> x;
    double lhs = 0, rhs = 0, margin = 0;
};

struct ExclusionRecord {
    double x1 = 0, x2 = 0;
    std::string reason;
};

/// A grid certification result. Pass means "no violation found at this
/// resolution and tolerance" -- evidence, not a proof. When the premise
/// passes, `conclusion` holds the midpoint cross-check on the same grid, and
/// `finding` flags the combination premise-Pass/conclusion-Fail.
struct CertificateReport {
    CertProperty property = CertProperty::Convex;
    double modulus = 0.0;
    std::string function_name;
    std::string domain;
    std::string grid_spec;
    double tol = 1e-9;
    std::vector<PairRecord> margins;         // ordered by grid index
    std::vector<PointRecord> point_margins;  // n-dimensional runs
    std::vector<ExclusionRecord> excluded;
    std::vector<std::string> warnings;
    double min_margin = std::numeric_limits<double>::infinity();
    Verdict verdict = Verdict::Pass;
    std::optional<PairRecord> witness;
    std::optional<PointRecord> point_witness;
    double quad_error_bound = 0.0;
    std::shared_ptr<const CertificateReport> conclusion;
    bool finding = false;
};

namespace detail {

inline std::string format_interval(Interval dom) {
    std::ostringstream os;
    os << "[" << dom.lo << ", " << dom.hi << "]";
    return os.str();
}

// A pair is excluded when g is non-finite at a grid endpoint or at a probe
// strictly inside the value hull conv{0, x1, x2}. The hull's own endpoints
// (the s + t -> 0 corner in particular) are deliberately not probed: endpoint
// singularities like log or 1/x there are integrable and the graded
// quadrature handles them.
inline std::string exclusion_reason(const Function1D& g, double x1, double x2) {
    if (!std::isfinite(g.fn(x1))) return "function non-finite at x1";
    if (!std::isfinite(g.fn(x2))) return "function non-finite at x2";
    const double lo = std::min({0.0, x1, x2});
    const double hi = std::max({0.0, x1, x2});
    if (lo < 0.0 && hi > 0.0 && !std::isfinite(g.fn(0.0)))
        return "function non-finite at 0 inside the value hull";
    for (int k = 1; k <= 7; ++k) {
        const double p = lo + (hi - lo) * k / 8.0;
        if (p <= lo || p >= hi) continue;
        if (!std::isfinite(g.fn(p))) return "function non-finite inside the value hull";
    }
    return {};
}

struct MidpointForm {
    // lhs and rhs of the midpoint inequality for the parent property.
    static PairRecord evaluate(CertProperty parent, const Function1D& g, double modulus,
                               double x1, double x2) {
        PairRecord rec;
        rec.x1 = x1;
        rec.x2 = x2;
        const double mid = 0.5 * (x1 + x2);
        const double g1 = g.fn(x1), g2 = g.fn(x2), gm = g.fn(mid);
        switch (parent) {
            case CertProperty::QuasiConvex:
                rec.lhs = gm;
                rec.rhs = std::max(g1, g2);
                break;
            case CertProperty::StrongConvex:
                rec.lhs = gm;
                rec.rhs = 0.5 * (g1 + g2) - 0.25 * modulus * (x1 - x2) * (x1 - x2);
                break;
            default:  // split-sum Jensen form
                rec.lhs = 2.0 * gm;
                rec.rhs = g1 + g2;
                break;
        }
        rec.margin = rec.rhs - rec.lhs;
        return rec;
    }
};

inline void finalize_pairs(CertificateReport& rep) {
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& m : rep.margins)
        if (m.margin < rep.min_margin) {
            rep.min_margin = m.margin;
            rep.witness = m;
        }
    if (rep.margins.empty()) {
        rep.min_margin = 0.0;
        rep.warnings.push_back("no pairs were evaluated; verdict is vacuous");
    }
    rep.verdict = rep.min_margin >= -rep.tol ? Verdict::Pass : Verdict::Fail;
    if (rep.verdict == Verdict::Pass) rep.witness.reset();
}

inline CertificateReport midpoint_report(CertProperty parent, const Function1D& g, double modulus,
                                         const std::vector<std::pair<double, double>>& pairs,
                                         double tol) {
    CertificateReport rep;
    rep.property = CertProperty::JensenConclusion;
    rep.modulus = modulus;
    rep.function_name = g.name;
    rep.tol = tol;
    for (const auto& [x1, x2] : pairs) {
        PairRecord rec = MidpointForm::evaluate(parent, g, modulus, x1, x2);
        if (!std::isfinite(rec.lhs) || !std::isfinite(rec.rhs)) {
            rep.excluded.push_back({x1, x2, "midpoint form non-finite"});
            continue;
        }
        rep.margins.push_back(rec);
    }
    finalize_pairs(rep);
    return rep;
}

template <class LhsFn, class RhsFn>
CertificateReport certify_grid(CertProperty property, const Function1D& g, double modulus,
                               Interval dom, int grid_points, int quad_order, double tol,
                               LhsFn&& lhs_fn, RhsFn&& rhs_fn) {
    CertificateReport rep;
    rep.property = property;
    rep.modulus = modulus;
    rep.function_name = g.name;
    rep.domain = format_interval(dom);
    rep.tol = tol;
    {
        std::ostringstream os;
        os << grid_points << " points per axis, endpoints included, quad order " << quad_order;
        rep.grid_spec = os.str();
    }

    const std::vector<double> grid = linspace(dom, grid_points);
    std::vector<std::pair<double, double>> included;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i; j < grid.size(); ++j) {
            const double x1 = grid[i], x2 = grid[j];
            const std::string reason = exclusion_reason(g, x1, x2);
            if (!reason.empty()) {
                rep.excluded.push_back({x1, x2, reason});
                continue;
            }
            QuadResult q;
            try {
                q = lhs_fn(x1, x2, quad_order);
            } catch (const EvaluationError& err) {
                throw EvaluationError(std::string(err.what()) + " while certifying pair",
                                      {x1, x2});
            }
            PairRecord rec;
            rec.x1 = x1;
            rec.x2 = x2;
            rec.lhs = q.value;
            rec.rhs = rhs_fn(x1, x2);
            rec.margin = rec.rhs - rec.lhs;
            rep.quad_error_bound = std::max(rep.quad_error_bound, q.error);
            rep.margins.push_back(rec);
            included.emplace_back(x1, x2);
        }
    }
    finalize_pairs(rep);

    if (rep.verdict == Verdict::Pass && !included.empty()) {
        rep.conclusion = std::make_shared<const CertificateReport>(
            midpoint_report(property, g, modulus, included, tol));
        rep.finding = rep.conclusion->verdict == Verdict::Fail;
    }
    return rep;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public certifiers
// ---------------------------------------------------------------------------

inline CertificateReport certify_convex(const Function1D& g, Interval dom, int grid_points = 33,
                                        int quad_order = 32, double tol = 1e-9) {
    return detail::certify_grid(
        CertProperty::Convex, g, 0.0, dom, grid_points, quad_order, tol,
        [&](double x1, double x2, int order) { return hh_lhs(g, x1, x2, order); },
        [&](double x1, double x2) { return g.fn(x1) + g.fn(x2); });
}

inline CertificateReport certify_quasiconvex(const Function1D& g, Interval dom,
                                             int grid_points = 33, int quad_order = 32,
                                             double tol = 1e-9) {
    return detail::certify_grid(
        CertProperty::QuasiConvex, g, 0.0, dom, grid_points, quad_order, tol,
        [&](double x1, double x2, int order) { return quasi_lhs(g, x1, x2, order); },
        [&](double x1, double x2) { return std::max(g.fn(x1), g.fn(x2)); });
}

inline CertificateReport certify_strong_convex(const Function1D& g, double modulus, Interval dom,
                                               int grid_points = 33, int quad_order = 32,
                                               double tol = 1e-9) {
    if (modulus < 0) throw std::domain_error("strong convexity modulus must be >= 0");
    return detail::certify_grid(
        CertProperty::StrongConvex, g, modulus, dom, grid_points, quad_order, tol,
        [&](double x1, double x2, int order) { return hh_lhs(g, x1, x2, order); },
        [&](double x1, double x2) {
            return g.fn(x1) + g.fn(x2) +
                   modulus / 48.0 * (x1 * x2 - 11.0 * x1 * x1 - 11.0 * x2 * x2);
        });
}

/// Midpoint Jensen check in the split-sum form 2 g((x1+x2)/2) <= g(x1)+g(x2).
inline CertificateReport jensen_midpoint_check(const Function1D& g,
                                               const std::vector<std::pair<double, double>>& pairs,
                                               double tol = 1e-9) {
    return detail::midpoint_report(CertProperty::Convex, g, 0.0, pairs, tol);
}

/// n-dimensional Jensen check f(mean, ..., mean) <= f(x).
inline CertificateReport jensen_midpoint_check_nd(const FunctionND& f,
                                                  const std::vector<std::vector<double>>& points,
                                                  double tol = 1e-9) {
    CertificateReport rep;
    rep.property = CertProperty::JensenConclusion;
    rep.function_name = f.name;
    rep.tol = tol;
    for (const auto& x : points) {
        if (static_cast<int>(x.size()) != f.arity)
            throw std::domain_error("point dimension does not match function arity");
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        std::vector<double> bary(x.size(), mean);
        PointRecord rec;
        rec.x = x;
        rec.lhs = f.fn(std::span<const double>(bary.data(), bary.size()));
        rec.rhs = f.fn(std::span<const double>(x.data(), x.size()));
        if (!std::isfinite(rec.lhs) || !std::isfinite(rec.rhs))
            throw EvaluationError(f.name + " is non-finite in the midpoint check", x);
        rec.margin = rec.rhs - rec.lhs;
        rep.point_margins.push_back(rec);
    }
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& m : rep.point_margins)
        if (m.margin < rep.min_margin) {
            rep.min_margin = m.margin;
            rep.point_witness = m;
        }
    if (rep.point_margins.empty()) rep.min_margin = 0.0;
    rep.verdict = rep.min_margin >= -tol ? Verdict::Pass : Verdict::Fail;
    if (rep.verdict == Verdict::Pass) rep.point_witness.reset();
    return rep;
}

/// Checks the n-dimensional averaging premise at each supplied point: the
/// normalized simplex average of f(circ(c) x) against f(x). Symmetry of f is
/// the caller's claim; random permutation spot checks are reported as
/// warnings, never errors. Deterministic quadrature for n <= 3, Monte Carlo
/// otherwise.
inline CertificateReport certify_nd_premise(const FunctionND& f,
                                            const std::vector<std::vector<double>>& points,
                                            SimplexMode mode, long long budget,
                                            double tol = 1e-9,
                                            std::uint64_t seed = kDefaultSeed) {
    if (budget <= 0) throw std::domain_error("budget must be positive");
    const int n = f.arity;
    if (n < 1) throw std::domain_error("dimension must be >= 1");

    CertificateReport rep;
    rep.property = CertProperty::NDPremise;
    rep.function_name = f.name;
    rep.tol = tol;
    {
        std::ostringstream os;
        os << points.size() << " point(s), n = " << n << ", " << to_string(mode) << " mode, "
           << (n <= 3 ? "deterministic" : "monte-carlo") << " budget " << budget;
        rep.grid_spec = os.str();
        rep.domain = "point list";
    }

    RandomStream perm_rng(RandomStream::derive_seed(seed, 0x5f5f));
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        const auto& x = points[pi];
        if (static_cast<int>(x.size()) != n)
            throw std::domain_error("point dimension does not match function arity");

        const double fx = f.fn(std::span<const double>(x.data(), x.size()));
        if (!std::isfinite(fx)) throw EvaluationError(f.name + " is non-finite at a test point", x);

        // Symmetry spot check: f should be invariant under coordinate
        // permutations; violations are reported, not fatal.
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<double> shuffled = x;
            for (std::size_t k = shuffled.size(); k > 1; --k)
                std::swap(shuffled[k - 1],
                          shuffled[static_cast<std::size_t>(perm_rng.next_below(k))]);
            const double fp = f.fn(std::span<const double>(shuffled.data(), shuffled.size()));
            if (std::abs(fp - fx) > 1e-9 * std::max(1.0, std::abs(fx))) {
                std::ostringstream os;
                os << "symmetry spot check failed at point index " << pi << " (|"
                   << fp << " - " << fx << "|)";
                rep.warnings.push_back(os.str());
                break;
            }
        }

        auto integrand = [&](std::span<const double> c) {
            CirculantGenerator gen{std::vector<double>(c.begin(), c.end())};
            const std::vector<double> y = circ_apply(gen, x);
            return f.fn(std::span<const double>(y.data(), y.size()));
        };

        IntegralEstimate est;
        if (n <= 3) {
            const long long order = std::clamp<long long>(budget, 8, 64);
            est = integrate_simplex(integrand, n, mode, order, Scheme::Deterministic);
        } else {
            est = integrate_simplex(integrand, n, mode, budget, Scheme::MonteCarlo,
                                    RandomStream::derive_seed(seed, pi));
        }
        PointRecord rec;
        rec.x = x;
        rec.lhs = est.value / mode_volume(n, mode);
        rec.rhs = fx;
        rec.margin = rec.rhs - rec.lhs;
        rep.quad_error_bound = std::max(rep.quad_error_bound, est.error / mode_volume(n, mode));
        rep.point_margins.push_back(rec);
    }

    rep.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& m : rep.point_margins)
        if (m.margin < rep.min_margin) {
            rep.min_margin = m.margin;
            rep.point_witness = m;
        }
    if (rep.point_margins.empty()) {
        rep.min_margin = 0.0;
        rep.warnings.push_back("no points were evaluated; verdict is vacuous");
    }
    rep.verdict = rep.min_margin >= -tol ? Verdict::Pass : Verdict::Fail;
    if (rep.verdict == Verdict::Pass) {
        rep.point_witness.reset();
        if (!points.empty()) {
            rep.conclusion = std::make_shared<const CertificateReport>(
                jensen_midpoint_check_nd(f, points, tol));
            rep.finding = rep.conclusion->verdict == Verdict::Fail;
        }
    }
    return rep;
}

}  // namespace hhcert
