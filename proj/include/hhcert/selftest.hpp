#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef _WIN32
#include <sys/wait.h>
#include <unistd.h>
#endif

#include "hhcert/closed_forms.hpp"
#include "hhcert/expr.hpp"
#include "hhcert/hh_certify.hpp"
#include "hhcert/korovkin.hpp"
#include "hhcert/simplex.hpp"

namespace hhcert::selftest {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Random expression tree for round-trip property tests; literals are
/// nonnegative so the printed form reparses to an identical tree.
inline expr::ExprPtr random_expr(RandomStream& rng, int arity, int max_depth) {
    auto leaf = [&]() -> expr::ExprPtr {
        if (rng.next_below(2) == 0)
            return expr::make_literal(static_cast<double>(rng.next_below(200)) / 8.0);
        const int idx = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(arity)));
        return expr::make_variable(idx, arity == 1 ? "x" : "x" + std::to_string(idx + 1));
    };
    if (max_depth <= 0) return leaf();
    switch (rng.next_below(6)) {
        case 0:
        case 1: return leaf();
        case 2: return expr::make_negate(random_expr(rng, arity, max_depth - 1));
        case 3: {
            const expr::BinOp ops[] = {expr::BinOp::Add, expr::BinOp::Sub, expr::BinOp::Mul,
                                       expr::BinOp::Div, expr::BinOp::Pow};
            return expr::make_binary(ops[rng.next_below(5)],
                                     random_expr(rng, arity, max_depth - 1),
                                     random_expr(rng, arity, max_depth - 1));
        }
        case 4: {
            const expr::Func fs[] = {expr::Func::Abs, expr::Func::Sqrt, expr::Func::Exp,
                                     expr::Func::Log};
            return expr::make_call(fs[rng.next_below(4)], {random_expr(rng, arity, max_depth - 1)});
        }
        default: {
            const expr::Func fs[] = {expr::Func::Min, expr::Func::Max, expr::Func::Pow};
            return expr::make_call(fs[rng.next_below(3)],
                                   {random_expr(rng, arity, max_depth - 1),
                                    random_expr(rng, arity, max_depth - 1)});
        }
    }
}

namespace detail {

using Clock = std::chrono::steady_clock;

struct Check {
    bool ok = true;
    std::ostringstream why;

    void require(bool cond, const std::string& message) {
        if (!cond && ok) {
            ok = false;
            why << message;
        }
    }
};

inline int exec(const std::string& command) {
    const int rc = std::system(command.c_str());
#ifdef _WIN32
    return rc;
#else
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
#endif
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string data_rows(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out << line << "\n";
    return out.str();
}

inline std::string quoted(const std::string& s) { return "\"" + s + "\""; }

// --- criterion bodies -------------------------------------------------------

inline Check contraction_bound() {
    Check c;
    for (int n = 1; n <= 12; ++n) {
        const ContractionRecord rec = contraction_factor(n);
        c.require(rec.rho < 1, "rho_" + std::to_string(n) + " is not < 1");
        c.require(rec.deviation_integral > 0, "deviation integral not positive");
    }
    c.require(contraction_factor(1).rho == Rational{1, 2}, "rho_1 != 1/2");
    c.require(contraction_factor(2).rho == Rational{1, 2}, "rho_2 != 1/2");
    c.require(contraction_factor(3).rho == Rational{59, 108}, "rho_3 != 59/108");
    // Independent oracle for the n = 2 ingredient: 2-D quadrature of
    // |c1 - 1/2| over the unit triangle, kink split at 1/2.
    QuadOptions opts;
    opts.axis_splits = {{0, 0.5}};
    const auto est = integrate_simplex(
        [](std::span<const double> p) { return std::abs(p[0] - 0.5); }, 2, SimplexMode::Solid,
        32, Scheme::Deterministic, kDefaultSeed, opts);
    c.require(std::abs(est.value - 0.125) <= 1e-10, "triangle quadrature oracle disagrees with 1/8");
    c.require(abs_deviation_integral(2) == Rational{1, 8}, "exact integral != 1/8");
    return c;
}

inline Check closed_form_identities() {
    Check c;
    for (int n = 1; n <= 12; ++n) {
        const Rational inv_fact{BigInt(1), factorial(static_cast<unsigned>(n))};
        const Rational inv_fact1{BigInt(1), factorial(static_cast<unsigned>(n + 1))};
        c.require(slab_volume(n, 1) == inv_fact, "slab volume at s=1 != 1/n!");
        c.require(slab_first_moment(n, 1) == inv_fact1, "slab moment at s=1 != 1/(n+1)!");
        c.require(scaled_simplex_first_moment(n, 1) == inv_fact1,
                  "scaled moment at s=1 != 1/(n+1)!");
        // contraction_factor computes rho both ways and throws on mismatch.
        contraction_factor(n);
    }
    return c;
}

inline Check quadrature_consistency() {
    Check c;
    for (int n = 1; n <= 4 && c.ok; ++n) {
        const std::vector<Rational> cuts{Rational{1, 5}, Rational{1, n}, Rational{9, 10}};
        for (const Rational& s : cuts) {
            const double sd = to_double(s);
            QuadOptions cut;
            cut.axis_splits = {{0, sd}};
            const auto iq = integrate_simplex(
                [&](std::span<const double> p) { return p[0] <= sd ? 1.0 : 0.0; }, n,
                SimplexMode::Solid, 24, Scheme::Deterministic, kDefaultSeed, cut);
            c.require(std::abs(iq.value - to_double(slab_volume(n, s))) <= 1e-9,
                      "slab volume quadrature mismatch at n=" + std::to_string(n));
            const auto jq = integrate_simplex(
                [&](std::span<const double> p) { return p[0] <= sd ? p[0] : 0.0; }, n,
                SimplexMode::Solid, 24, Scheme::Deterministic, kDefaultSeed, cut);
            c.require(std::abs(jq.value - to_double(slab_first_moment(n, s))) <= 1e-9,
                      "slab moment quadrature mismatch at n=" + std::to_string(n));
            QuadOptions scaled;
            scaled.sides.assign(static_cast<std::size_t>(n), sd);
            const auto kq = integrate_simplex([](std::span<const double> p) { return p[0]; }, n,
                                              SimplexMode::Solid, 24, Scheme::Deterministic,
                                              kDefaultSeed, scaled);
            c.require(std::abs(kq.value - to_double(scaled_simplex_first_moment(n, s))) <= 1e-9,
                      "scaled moment quadrature mismatch at n=" + std::to_string(n));
        }
    }
    return c;
}

inline Check product_row_vs_multiply() {
    Check c;
    RandomStream rng(20240917);
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n)
        for (int m = 2; m <= 5; ++m)
            for (int trial = 0; trial < 50; ++trial) {
                std::vector<CirculantGenerator> gens;
                gens.reserve(static_cast<std::size_t>(m));
                for (int j = 0; j < m; ++j) {
                    auto p = sample_face(n, rng);
                    gens.push_back(CirculantGenerator{std::move(p.coords)});
                }
                CirculantGenerator iterated = gens[0];
                for (int j = 1; j < m; ++j) iterated = circ_multiply(iterated, gens[j]);
                const CirculantGenerator direct =
                    product_row_formula(std::span<const CirculantGenerator>(gens));
                for (int k = 0; k < n; ++k)
                    worst = std::max(worst, std::abs(iterated.row[static_cast<std::size_t>(k)] -
                                                     direct.row[static_cast<std::size_t>(k)]));
            }
    c.require(worst <= 1e-12, "max deviation " + std::to_string(worst) + " exceeds 1e-12");
    return c;
}

inline Check face_decay_n2() {
    Check c;
    const DecaySeries series =
        decay_experiment(barycenter_l1, 2, 10, 100000, SimplexMode::Face, kDefaultSeed, 2);
    for (const auto& e : series.estimates) {
        const double exact = std::ldexp(1.0, -e.m);
        c.require(std::abs(e.mean - exact) <= 3.0 * e.std_error,
                  "depth " + std::to_string(e.m) + " estimate misses 2^-m by over 3 SE");
    }
    c.require(series.fitted && std::abs(series.fitted_ratio - 0.5) <= 0.05,
              "fitted ratio not within 0.05 of 1/2");
    return c;
}

inline Check face_decay_n34() {
    Check c;
    for (int n : {3, 4}) {
        const DecaySeries series =
            decay_experiment(barycenter_l1, n, 10, 100000, SimplexMode::Face, kDefaultSeed, 2);
        const double bound = face_decay_bound(n);
        c.require(series.fitted && series.fitted_ratio <= bound + 0.05,
                  "fitted ratio exceeds face bound + 0.05 at n=" + std::to_string(n));
        for (const auto& e : series.estimates)
            if (e.m >= 8)
                c.require(e.mean < 0.05,
                          "depth " + std::to_string(e.m) + " mean not below 0.05 at n=" +
                              std::to_string(n));
    }
    return c;
}

inline Check solid_mode_exhibit() {
    Check c;
    const DecaySeries series =
        decay_experiment(barycenter_l1, 2, 10, 100000, SimplexMode::Solid, kDefaultSeed, 2);
    const auto& est = series.estimates;
    for (std::size_t i = 1; i + 1 < est.size(); ++i) {
        const double combined =
            std::sqrt(est[i].std_error * est[i].std_error +
                      est[i + 1].std_error * est[i + 1].std_error);
        c.require(est[i + 1].mean >= est[i].mean - 3.0 * combined,
                  "solid-mode means are not monotone within 3 SE at m=" + std::to_string(est[i].m));
    }
    c.require(est.back().mean > 0.9, "solid-mode means do not approach 1");
    c.require(est.back().mean > est[1].mean, "solid-mode means do not increase");
    return c;
}

inline Check section5_goldens() {
    Check c;
    const Function1D sq = builtin_function("square");
    for (int i = 0; i < 5 && c.ok; ++i)
        for (int j = 0; j < 5 && c.ok; ++j) {
            const double a = -2.0 + i, b = -2.0 + j;
            const double closed = (a * a + b * b + a * b) / 12.0;
            c.require(std::abs(hh_lhs(sq, a, b).value - closed) <= 1e-10,
                      "x^2 double integral misses the closed form");
        }
    const Function1D lg = builtin_function("logarithm");
    for (double x : {0.5, 1.0, 2.0, 4.0})
        c.require(std::abs(quasi_lhs(lg, x, x).value - (-0.125 + 0.25 * std::log(x))) <= 1e-8,
                  "log quasi integral misses -1/8 + (1/4) log x");
    for (double x : {1.0, 4.0, -2.25}) {
        const double bound_integral = 0.5 * hhcert::detail::triangle_integral(
            [&](double s, double t) { return std::sqrt(s + t) * std::sqrt(std::abs(x)); }, 32, {});
        c.require(std::abs(bound_integral - std::sqrt(std::abs(x)) / 5.0) <= 1e-8,
                  "sqrt bounding integrand misses sqrt|x|/5");
    }
    const CertificateReport strong =
        certify_strong_convex(builtin_function("reciprocal"), 1.0 / 8.0, {1.0, 2.0}, 33, 32, 1e-9);
    c.require(strong.verdict == Verdict::Pass && !strong.finding,
              "1/x does not certify strongly convex with modulus 1/b^3 on [1,2]");
    return c;
}

inline Check premise_implies_midpoint() {
    Check c;
    struct Run {
        std::string label;
        CertificateReport report;
    };
    std::vector<Run> positives;
    positives.push_back({"convex x^2", certify_convex(builtin_function("square"), {-2, 2}, 21)});
    positives.push_back(
        {"convex 1/x", certify_convex(builtin_function("reciprocal"), {1, 2}, 21)});
    positives.push_back(
        {"quasi log", certify_quasiconvex(builtin_function("logarithm"), {1, 4}, 21)});
    positives.push_back(
        {"quasi sqrtAbs", certify_quasiconvex(builtin_function("sqrtAbs"), {-4, 4}, 21)});
    positives.push_back({"strong 1/x", certify_strong_convex(builtin_function("reciprocal"),
                                                             1.0 / 8.0, {1, 2}, 21)});
    for (const auto& run : positives) {
        c.require(run.report.verdict == Verdict::Pass, run.label + ": premise did not pass");
        c.require(run.report.conclusion && run.report.conclusion->verdict == Verdict::Pass,
                  run.label + ": conclusion did not pass");
        c.require(!run.report.finding, run.label + ": unexpected premise/conclusion finding");
    }

    // The averaging premise is sufficient, not necessary: for log it genuinely
    // fails on diagonal pairs below e^{-1/6}, so a domain reaching down to 1/2
    // must produce a witnessed Fail (the conclusion itself still holds there).
    const CertificateReport low_log =
        certify_quasiconvex(builtin_function("logarithm"), {0.5, 4}, 21);
    c.require(low_log.verdict == Verdict::Fail && low_log.witness.has_value(),
              "quasi log premise unexpectedly held below e^{-1/6}");

    const Function1D neg_square{"neg-square", [](double x) { return -x * x; }};
    const CertificateReport nc = certify_convex(neg_square, {-2, 2}, 21);
    c.require(nc.verdict == Verdict::Fail && nc.witness.has_value(),
              "-x^2 did not fail with a witness");
    const Function1D neg_abs{"neg-abs", [](double x) { return -std::abs(x); }};
    const CertificateReport nq = certify_quasiconvex(neg_abs, {-1, 1}, 21);
    c.require(nq.verdict == Verdict::Fail && nq.witness.has_value(),
              "-|x| did not fail with a witness");
    return c;
}

inline Check cli_determinism(const std::string& cli_path) {
    Check c;
    if (cli_path.empty()) {
        c.require(false, "CLI path not provided");
        return c;
    }
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("hhcert-selftest-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string cli = quoted(cli_path);
    auto path = [&](const char* name) { return (dir / name).string(); };

    const std::string kor =
        " korovkin --n 2 --mode face --m-max 4 --samples 20000 --seed 7 --output ";
    c.require(exec(cli + kor + quoted(path("k1.csv"))) == 0, "korovkin run 1 failed");
    c.require(exec(cli + kor + quoted(path("k2.csv"))) == 0, "korovkin run 2 failed");
    c.require(slurp(path("k1.csv")) == slurp(path("k2.csv")),
              "korovkin output is not byte-identical across identical runs");
    c.require(!slurp(path("k1.csv")).empty(), "korovkin output is empty");

    c.require(exec(cli + kor + quoted(path("k3.csv")) + " --workers 3") == 0,
              "korovkin worker run failed");
    c.require(data_rows(slurp(path("k1.csv"))) == data_rows(slurp(path("k3.csv"))),
              "korovkin results change with worker count");

    const std::string cert =
        " certify convex --g \"x^2\" --domain -2:2 --grid 9 --format json --output ";
    c.require(exec(cli + cert + quoted(path("c1.json"))) == 0, "certify run 1 failed");
    c.require(exec(cli + cert + quoted(path("c2.json"))) == 0, "certify run 2 failed");
    c.require(slurp(path("c1.json")) == slurp(path("c2.json")),
              "certify output is not byte-identical across identical runs");
    c.require(!slurp(path("c1.json")).empty(), "certify output is empty");

    std::error_code ec;
    fs::remove_all(dir, ec);
    return c;
}

inline Check parser_goldens() {
    Check c;
    struct Golden {
        const char* text;
        int arity;
        std::vector<double> env;
        double expected;
    };
    const std::vector<Golden> goldens = {
        {"2+3*4", 1, {0}, 14},
        {"2^3^2", 1, {0}, 512},
        {"-2^2", 1, {0}, -4},
        {"(2+3)*4", 1, {0}, 20},
        {"2-3-4", 1, {0}, -5},
        {"12/4/3", 1, {0}, 1},
        {"2*3^2", 1, {0}, 18},
        {"-2*-3", 1, {0}, 6},
        {"2^-1", 1, {0}, 0.5},
        {"abs(-3)+1", 1, {0}, 4},
        {"sqrt(abs(-16))", 1, {0}, 4},
        {"min(2,3)*max(4,5)", 1, {0}, 10},
        {"pow(2,10)", 1, {0}, 1024},
        {"exp(0)+log(1)", 1, {0}, 1},
        {"x^2+1", 1, {3}, 10},
        {"1/x1 + 1/x2", 2, {2, 4}, 0.75},
        {"-(x)", 1, {5}, -5},
        {"2e2+1", 1, {0}, 201},
        {"3.5*2", 1, {0}, 7},
        {"x1*x2^2", 2, {2, 3}, 18},
    };
    for (const auto& g : goldens) {
        const expr::ExprPtr e = expr::parse(g.text, g.arity);
        const expr::EvalEnv env{g.arity, g.env};
        c.require(std::abs(expr::eval(*e, env) - g.expected) <= 1e-12,
                  std::string("golden value mismatch for ") + g.text);
        const expr::ExprPtr round = expr::parse(expr::print(*e), g.arity);
        c.require(expr::structurally_equal(*e, *round),
                  std::string("print/parse round trip failed for ") + g.text);
    }
    RandomStream rng(991);
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        const int arity = 1 + static_cast<int>(rng.next_below(3));
        const expr::ExprPtr e = random_expr(rng, arity, 8);
        const expr::ExprPtr round = expr::parse(expr::print(*e), arity);
        c.require(expr::structurally_equal(*e, *round),
                  "random round trip failed at trial " + std::to_string(trial));
    }
    return c;
}

}  // namespace detail

inline std::vector<CriterionResult> run_all(const std::string& cli_path) {
    using detail::Check;
    struct Entry {
        int id;
        const char* name;
        double time_limit;
        std::function<Check()> body;
    };
    const std::vector<Entry> entries = {
        {1, "contraction bound rho_n < 1, n = 1..12", 1.0, [] { return detail::contraction_bound(); }},
        {2, "closed-form identities at s = 1", 1.0, [] { return detail::closed_form_identities(); }},
        {3, "closed forms vs simplex quadrature (1e-9, n <= 4)", 30.0,
         [] { return detail::quadrature_consistency(); }},
        {4, "product-row formula vs iterated multiply (1e-12, 1000 trials)", 30.0,
         [] { return detail::product_row_vs_multiply(); }},
        {5, "face-mode decay tracks 2^-m (n = 2)", 60.0, [] { return detail::face_decay_n2(); }},
        {6, "face-mode decay bounded (n = 3, 4)", 120.0, [] { return detail::face_decay_n34(); }},
        {7, "solid-mode averages rise toward 1 (n = 2)", 60.0,
         [] { return detail::solid_mode_exhibit(); }},
        {8, "one-variable integral goldens", 30.0, [] { return detail::section5_goldens(); }},
        {9, "premise pass implies midpoint pass; negative controls fail", 10.0,
         [] { return detail::premise_implies_midpoint(); }},
        {10, "CLI determinism and worker invariance", 60.0,
         [cli_path] { return detail::cli_determinism(cli_path); }},
        {11, "expression parser goldens and round trips", 10.0,
         [] { return detail::parser_goldens(); }},
    };

    std::vector<CriterionResult> results;
    results.reserve(entries.size());
    for (const auto& entry : entries) {
        CriterionResult r;
        r.id = entry.id;
        r.name = entry.name;
        const auto start = detail::Clock::now();
        try {
            Check c = entry.body();
            r.pass = c.ok;
            r.detail = c.why.str();
        } catch (const std::exception& ex) {
            r.pass = false;
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(detail::Clock::now() - start).count();
        if (r.pass && r.seconds > entry.time_limit) {
            r.pass = false;
            r.detail = "runtime limit exceeded";
        }
        results.push_back(std::move(r));
    }
    return results;
}

/// Prints one pass/fail line per criterion; returns the number of failures.
inline int run_and_print(const std::string& cli_path, std::ostream& os) {
    int failures = 0;
    for (const CriterionResult& r : run_all(cli_path)) {
        char line[160];
        std::snprintf(line, sizeof(line), "[%s] %2d. %s (%.2fs)",
                      r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
        os << line;
        if (!r.pass && !r.detail.empty()) os << " -- " << r.detail;
        os << "\n";
        if (!r.pass) ++failures;
    }
    return failures;
}

}  // namespace hhcert::selftest
