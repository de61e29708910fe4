#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <span>

#include "hhcert/simplex.hpp"

using namespace hhcert;
using Catch::Approx;

namespace {

// Brute-force midpoint-grid oracle for the area of {c >= 0, c1/a1 + c2/a2 <= 1}.
double grid_area_oracle(double a1, double a2, int cells) {
    double area = 0.0;
    const double hx = a1 / cells, hy = a2 / cells;
    for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j) {
            const double x = (i + 0.5) * hx, y = (j + 0.5) * hy;
            if (x / a1 + y / a2 <= 1.0) area += hx * hy;
        }
    return area;
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("simplex volume closed form") {
    REQUIRE(simplex_volume({Rational(1), Rational(1), Rational(1)}) == Rational{1, 6});
    REQUIRE(simplex_volume({Rational(1)}) == Rational(1));

    // 2-D quadrature oracle for sides (2, 3): expect 3 exactly.
    const double oracle = grid_area_oracle(2.0, 3.0, 2000);
    REQUIRE(oracle == Approx(3.0).margin(5e-3));
    REQUIRE(simplex_volume({Rational(2), Rational(3)}) == Rational(3));

    for (int n = 1; n <= 12; ++n) {
        std::vector<Rational> sides(static_cast<std::size_t>(n), Rational(1));
        const Rational v = simplex_volume(std::span<const Rational>(sides.data(), sides.size()));
        REQUIRE(v * Rational(factorial(static_cast<unsigned>(n))) == Rational(1));
    }
}

TEST_CASE("simplex volume rejects bad sides") {
    REQUIRE_THROWS_AS(simplex_volume({Rational(0), Rational(1)}), std::domain_error);
    REQUIRE_THROWS_AS(simplex_volume({Rational(-2)}), std::domain_error);
    REQUIRE_THROWS_AS(simplex_volume(std::span<const Rational>{}), std::domain_error);
}

TEST_CASE("solid sampling") {
    RandomStream rng(11);
    REQUIRE_THROWS_AS(sample_solid(0, rng), std::domain_error);

    SECTION("n = 1 lands in [0, 1]") {
        for (int i = 0; i < 1000; ++i) {
            const SimplexPoint p = sample_solid(1, rng);
            REQUIRE(p.coords.size() == 1);
            REQUIRE(p.coords[0] >= 0.0);
            REQUIRE(p.coords[0] <= 1.0);
        }
    }

    SECTION("n = 2 first-coordinate mean is 1/3") {
        const int samples = 100000;
        std::vector<double> c1;
        c1.reserve(samples);
        for (int i = 0; i < samples; ++i) c1.push_back(sample_solid(2, rng).coords[0]);
        const double mean = mean_of(c1);
        double ss = 0;
        for (double v : c1) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / (samples - 1)) / std::sqrt(double(samples));
        REQUIRE(std::abs(mean - 1.0 / 3.0) <= 3 * se);
    }

    SECTION("n = 3 support holds exactly") {
        for (int i = 0; i < 100000; ++i) {
            const SimplexPoint p = sample_solid(3, rng);
            double sum = 0;
            for (double c : p.coords) {
                REQUIRE(c >= 0.0);
                sum += c;
            }
            REQUIRE(sum <= 1.0 + kSupportTol);
        }
    }
}

TEST_CASE("face sampling") {
    RandomStream rng(12);
    REQUIRE_THROWS_AS(sample_face(0, rng), std::domain_error);

    SECTION("n = 1 is the single point 1") {
        const SimplexPoint p = sample_face(1, rng);
        REQUIRE(p.coords[0] == Approx(1.0).margin(1e-15));
    }

    SECTION("n = 2 mean |c1 - 1/2| is 1/4") {
        const int samples = 100000;
        std::vector<double> vals;
        vals.reserve(samples);
        for (int i = 0; i < samples; ++i)
            vals.push_back(std::abs(sample_face(2, rng).coords[0] - 0.5));
        const double mean = mean_of(vals);
        double ss = 0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / (samples - 1)) / std::sqrt(double(samples));
        REQUIRE(std::abs(mean - 0.25) <= 3 * se);
    }

    SECTION("coordinates sum to 1 within 1e-12") {
        for (int i = 0; i < 10000; ++i) {
            const SimplexPoint p = sample_face(4, rng);
            double sum = 0;
            for (double c : p.coords) sum += c;
            REQUIRE(std::abs(sum - 1.0) <= kSupportTol);
        }
    }
}

TEST_CASE("support invariants over one million draws per mode") {
    RandomStream rng(13);
    long long violations = 0;
    for (int i = 0; i < 1000000; ++i) {
        if (!sample_solid(3, rng).satisfies_invariants()) ++violations;
        if (!sample_face(3, rng).satisfies_invariants()) ++violations;
    }
    REQUIRE(violations == 0);
}

TEST_CASE("sampled coordinates are exchangeable") {
    RandomStream rng(14);
    const int samples = 100000;
    for (SimplexMode mode : {SimplexMode::Solid, SimplexMode::Face}) {
        double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
        for (int i = 0; i < samples; ++i) {
            const SimplexPoint p = sample_point(3, mode, rng);
            for (int k = 0; k < 3; ++k) {
                sum[k] += p.coords[k];
                sumsq[k] += p.coords[k] * p.coords[k];
            }
        }
        for (int k = 1; k < 3; ++k) {
            const double m0 = sum[0] / samples, mk = sum[k] / samples;
            const double v0 = sumsq[0] / samples - m0 * m0;
            const double vk = sumsq[k] / samples - mk * mk;
            const double se = std::sqrt((v0 + vk) / samples);
            REQUIRE(std::abs(m0 - mk) <= 4 * se);
        }
    }
}

TEST_CASE("deterministic integration examples") {
    auto one = [](std::span<const double>) { return 1.0; };
    auto first = [](std::span<const double> c) { return c[0]; };

    const auto v1 = integrate_simplex(one, 2, SimplexMode::Solid, 32, Scheme::Deterministic);
    REQUIRE(v1.value == Approx(0.5).margin(1e-13));

    const auto v2 = integrate_simplex(first, 2, SimplexMode::Solid, 32, Scheme::Deterministic);
    REQUIRE(v2.value == Approx(1.0 / 6.0).margin(1e-13));

    QuadOptions kink;
    kink.axis_splits = {{0, 0.5}};
    const auto v3 = integrate_simplex(
        [](std::span<const double> c) { return std::abs(c[0] - 0.5); }, 2, SimplexMode::Solid,
        32, Scheme::Deterministic, kDefaultSeed, kink);
    REQUIRE(v3.value == Approx(0.125).margin(1e-13));

    // Face mode: the parametrized reference mass is 1/(n-1)!.
    const auto f3 = integrate_simplex(one, 3, SimplexMode::Face, 32, Scheme::Deterministic);
    REQUIRE(f3.value == Approx(0.5).margin(1e-13));
    const auto f1 = integrate_simplex(first, 1, SimplexMode::Face, 8, Scheme::Deterministic);
    REQUIRE(f1.value == Approx(1.0).margin(1e-15));

    // Scaled sides: volume of S_2(2, 3) by quadrature.
    QuadOptions scaled;
    scaled.sides = {2.0, 3.0};
    const auto sv = integrate_simplex(one, 2, SimplexMode::Solid, 32, Scheme::Deterministic,
                                      kDefaultSeed, scaled);
    REQUIRE(sv.value == Approx(3.0).margin(1e-12));
}

TEST_CASE("deterministic and Monte Carlo schemes agree on smooth integrands") {
    auto poly = [](std::span<const double> c) {
        double s = 1.0;
        for (std::size_t i = 0; i < c.size(); ++i) s += (i + 1.0) * c[i];
        const double q = c[0] * c[0] * c[0] + (c.size() > 1 ? c[0] * c[1] : 0.0);
        return s + q;
    };
    for (int n = 1; n <= 4; ++n) {
        for (SimplexMode mode : {SimplexMode::Solid, SimplexMode::Face}) {
            const auto det = integrate_simplex(poly, n, mode, 24, Scheme::Deterministic);
            const auto mc = integrate_simplex(poly, n, mode, 200000, Scheme::MonteCarlo, 77);
            REQUIRE(std::abs(det.value - mc.value) <= 3.5 * mc.error + det.error + 1e-12);
        }
    }
}

TEST_CASE("integration surfaces non-finite integrands with the point") {
    auto bad = [](std::span<const double> c) {
        return c[0] > 0.2 ? std::numeric_limits<double>::infinity() : 1.0;
    };
    try {
        integrate_simplex(bad, 2, SimplexMode::Solid, 16, Scheme::Deterministic);
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        REQUIRE(e.point().size() == 2);
        REQUIRE(e.point()[0] > 0.2);
    }
    REQUIRE_THROWS_AS(
        integrate_simplex(bad, 2, SimplexMode::Solid, 1000, Scheme::MonteCarlo, 5),
        EvaluationError);
}

TEST_CASE("integration validates arguments") {
    auto one = [](std::span<const double>) { return 1.0; };
    REQUIRE_THROWS_AS(integrate_simplex(one, 0, SimplexMode::Solid, 8, Scheme::Deterministic),
                      std::domain_error);
    REQUIRE_THROWS_AS(integrate_simplex(one, 2, SimplexMode::Solid, 0, Scheme::Deterministic),
                      std::domain_error);
    QuadOptions bad;
    bad.sides = {1.0};
    REQUIRE_THROWS_AS(integrate_simplex(one, 2, SimplexMode::Solid, 8, Scheme::Deterministic,
                                        kDefaultSeed, bad),
                      std::domain_error);
}
