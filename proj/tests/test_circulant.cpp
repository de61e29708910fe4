#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hhcert/circulant.hpp"
#include "hhcert/simplex.hpp"

using namespace hhcert;
using Catch::Approx;

namespace {

// Dense-matrix oracle: multiply the implied matrices directly.
std::vector<std::vector<double>> dense_product(const CirculantGenerator& a,
                                               const CirculantGenerator& b) {
    const int n = a.size();
    const auto ma = a.to_dense();
    const auto mb = b.to_dense();
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) p[i][j] += ma[i][k] * mb[k][j];
    return p;
}

CirculantGenerator random_face_generator(int n, RandomStream& rng) {
    auto p = sample_face(n, rng);
    return CirculantGenerator{std::move(p.coords)};
}

}  // namespace

TEST_CASE("circulant multiply examples") {
    SECTION("2x2 expansion") {
        const CirculantGenerator a{{0.8, -0.3}};
        const CirculantGenerator b{{1.5, 0.2}};
        const auto r = circ_multiply(a, b);
        REQUIRE(r.row[0] == Approx(0.8 * 1.5 + (-0.3) * 0.2));
        REQUIRE(r.row[1] == Approx(0.8 * 0.2 + (-0.3) * 1.5));
    }
    SECTION("identity generator") {
        const CirculantGenerator id{{1.0, 0.0, 0.0, 0.0}};
        const CirculantGenerator b{{0.4, 0.3, 0.2, 0.1}};
        const auto r = circ_multiply(id, b);
        for (int k = 0; k < 4; ++k) REQUIRE(r.row[k] == Approx(b.row[k]).margin(1e-15));
    }
    SECTION("face example against the dense oracle") {
        const CirculantGenerator a{{0.3, 0.7}};
        const CirculantGenerator b{{0.6, 0.4}};
        const auto oracle = dense_product(a, b);
        const auto r = circ_multiply(a, b);
        REQUIRE(r.row[0] == Approx(0.46).margin(1e-15));
        REQUIRE(r.row[1] == Approx(0.54).margin(1e-15));
        REQUIRE(r.row[0] == Approx(oracle[0][0]).margin(1e-15));
        REQUIRE(r.row[1] == Approx(oracle[0][1]).margin(1e-15));
    }
    REQUIRE_THROWS_AS(circ_multiply(CirculantGenerator{{1.0}}, CirculantGenerator{{1.0, 0.0}}),
                      std::domain_error);
}

TEST_CASE("circulant apply examples") {
    SECTION("averaging generator gives the constant mean vector") {
        const CirculantGenerator avg{{0.25, 0.25, 0.25, 0.25}};
        const std::vector<double> x{1.0, 2.0, 3.0, 6.0};
        const auto y = circ_apply(avg, x);
        for (double v : y) REQUIRE(v == Approx(3.0).margin(1e-14));
    }
    SECTION("identity") {
        const CirculantGenerator id{{1.0, 0.0, 0.0}};
        const std::vector<double> x{4.0, -1.0, 2.5};
        const auto y = circ_apply(id, x);
        for (int k = 0; k < 3; ++k) REQUIRE(y[k] == Approx(x[k]).margin(1e-15));
    }
    SECTION("n = 3 hand-checkable layout") {
        // Rows of circ(1/2, 1/4, 1/4): (1/2,1/4,1/4), (1/4,1/2,1/4), (1/4,1/4,1/2).
        const CirculantGenerator a{{0.5, 0.25, 0.25}};
        const auto dense = a.to_dense();
        REQUIRE(dense[1][0] == Approx(0.25));
        REQUIRE(dense[1][1] == Approx(0.5));
        REQUIRE(dense[2][2] == Approx(0.5));
        const std::vector<double> x{1.0, 2.0, 3.0};
        const auto y = circ_apply(a, x);
        std::vector<double> oracle(3, 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) oracle[i] += dense[i][j] * x[j];
        REQUIRE(y[0] == Approx(7.0 / 4.0).margin(1e-15));
        REQUIRE(y[1] == Approx(2.0).margin(1e-15));
        REQUIRE(y[2] == Approx(9.0 / 4.0).margin(1e-15));
        for (int k = 0; k < 3; ++k) REQUIRE(y[k] == Approx(oracle[k]).margin(1e-15));
    }
    REQUIRE_THROWS_AS(circ_apply(CirculantGenerator{{1.0, 0.0}}, std::vector<double>{1.0}),
                      std::domain_error);
}

TEST_CASE("product row formula examples") {
    SECTION("m = 2 equals the multiply route") {
        std::vector<CirculantGenerator> gens{CirculantGenerator{{0.3, 0.7}},
                                             CirculantGenerator{{0.6, 0.4}}};
        const auto t = product_row_formula(gens);
        REQUIRE(t.row[0] == Approx(0.46).margin(1e-14));
        REQUIRE(t.row[1] == Approx(0.54).margin(1e-14));
    }
    SECTION("uniform generators are a fixed point") {
        std::vector<CirculantGenerator> gens(4, CirculantGenerator{{0.25, 0.25, 0.25, 0.25}});
        const auto t = product_row_formula(gens);
        for (double v : t.row) REQUIRE(v == Approx(0.25).margin(1e-14));
    }
    SECTION("matches iterated multiply over random face generators") {
        RandomStream rng(31);
        double worst = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 2 + static_cast<int>(rng.next_below(5));
            const int m = 2 + static_cast<int>(rng.next_below(4));
            std::vector<CirculantGenerator> gens;
            for (int j = 0; j < m; ++j) gens.push_back(random_face_generator(n, rng));
            CirculantGenerator iterated = gens[0];
            for (int j = 1; j < m; ++j) iterated = circ_multiply(iterated, gens[j]);
            const auto direct = product_row_formula(gens);
            for (int k = 0; k < n; ++k)
                worst = std::max(worst, std::abs(iterated.row[k] - direct.row[k]));
        }
        REQUIRE(worst <= 1e-12);
    }
    SECTION("1000 seeded trials at n = 3, m = 3") {
        RandomStream rng(34);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<CirculantGenerator> gens;
            for (int j = 0; j < 3; ++j) gens.push_back(random_face_generator(3, rng));
            CirculantGenerator iterated = circ_multiply(circ_multiply(gens[0], gens[1]), gens[2]);
            const auto direct = product_row_formula(gens);
            for (int k = 0; k < 3; ++k)
                worst = std::max(worst, std::abs(iterated.row[k] - direct.row[k]));
        }
        REQUIRE(worst <= 1e-12);
    }
    SECTION("rejects invalid inputs") {
        std::vector<CirculantGenerator> one{CirculantGenerator{{1.0, 0.0}}};
        REQUIRE_THROWS_AS(product_row_formula(one), std::domain_error);
        std::vector<CirculantGenerator> off_face{CirculantGenerator{{0.3, 0.3}},
                                                 CirculantGenerator{{0.5, 0.5}}};
        REQUIRE_THROWS_AS(product_row_formula(off_face), std::domain_error);
    }
}

TEST_CASE("stochasticity classification") {
    REQUIRE(classify_stochasticity(CirculantGenerator{{0.2, 0.8}}).cls ==
            StochClass::DoublyStochastic);
    const auto sub = classify_stochasticity(CirculantGenerator{{0.2, 0.3}});
    REQUIRE(sub.cls == StochClass::SubStochastic);
    REQUIRE(sub.row_sum == Approx(0.5));
    REQUIRE(classify_stochasticity(CirculantGenerator{{-0.1, 1.1}}).cls == StochClass::Neither);
    REQUIRE(classify_stochasticity(CirculantGenerator{{0.6, 0.6}}).cls == StochClass::Neither);
    REQUIRE_THROWS_AS(classify_stochasticity(CirculantGenerator{{0.5, 0.5}}, -1.0),
                      std::domain_error);
}

TEST_CASE("product of circulants is circulant (dense oracle)") {
    RandomStream rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        std::vector<double> ra(n), rb(n);
        for (double& v : ra) v = rng.uniform01() * 2.0 - 0.5;
        for (double& v : rb) v = rng.uniform01() * 2.0 - 0.5;
        const CirculantGenerator a{ra}, b{rb};
        const auto p = dense_product(a, b);
        const auto r = circ_multiply(a, b);
        const CirculantGenerator from_product{r.row};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                REQUIRE(std::abs(p[i][j] - from_product.entry(i, j)) <= 1e-13);
    }
}

TEST_CASE("row sums multiply and face classification is closed") {
    RandomStream rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(4));
        auto sp = sample_solid(n, rng);
        auto fp = sample_face(n, rng);
        const CirculantGenerator solid{sp.coords};
        const CirculantGenerator face{fp.coords};

        const auto mixed = circ_multiply(solid, face);
        REQUIRE(std::abs(mixed.row_sum() - solid.row_sum() * face.row_sum()) <= 1e-12);

        const CirculantGenerator face2{sample_face(n, rng).coords};
        const auto ff = circ_multiply(face, face2);
        REQUIRE(classify_stochasticity(ff).cls == StochClass::DoublyStochastic);
    }
}
