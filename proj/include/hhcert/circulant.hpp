#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace hhcert {

// Matches accumulated product error over a few dozen factors.
inline constexpr double kStochasticTol = 1e-9;
// Row sums must be exactly 1 up to normalization error for the product-row
// formula to be valid.
inline constexpr double kFaceRowSumTol = 1e-12;

/// A circulant matrix represented by its first row c^1..c^n. Row i of the
/// implied matrix is the first row cyclically shifted right i times, i.e.
/// entry (i, j) = row[(j - i) mod n] with 0-based indices.
struct CirculantGenerator {
    std::vector<double> row;

    int size() const { return static_cast<int>(row.size()); }

    double row_sum() const {
        double s = 0.0;
        for (double v : row) s += v;
        return s;
    }

    double entry(int i, int j) const {
        const int n = size();
        return row[static_cast<std::size_t>(((j - i) % n + n) % n)];
    }

    std::vector<std::vector<double>> to_dense() const {
        const int n = size();
        std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                           std::vector<double>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m[i][j] = entry(i, j);
        return m;
    }
};

namespace detail {
// All cyclic index arithmetic goes through this one reduction.
inline int cyclic(int k, int n) { return ((k % n) + n) % n; }

inline void require_generator(const CirculantGenerator& g) {
    if (g.row.empty()) throw std::domain_error("circulant generator must be nonempty");
}
}  // namespace detail

/// Generator of the matrix product circ(a) * circ(b): cyclic correlation
/// r[k] = sum_i a[i] * b[(k - i) mod n]. O(n^2); adequate at desk scale.
inline CirculantGenerator circ_multiply(const CirculantGenerator& a, const CirculantGenerator& b) {
    detail::require_generator(a);
    detail::require_generator(b);
    const int n = a.size();
    if (b.size() != n) throw std::domain_error("circulant generators must have equal length");
    std::vector<double> r(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            sum += a.row[static_cast<std::size_t>(i)] *
                   b.row[static_cast<std::size_t>(detail::cyclic(k - i, n))];
        r[static_cast<std::size_t>(k)] = sum;
    }
    return CirculantGenerator{std::move(r)};
}

/// Matrix-vector product circ(a) * x using the circulant layout.
inline std::vector<double> circ_apply(const CirculantGenerator& a, std::span<const double> x) {
    detail::require_generator(a);
    const int n = a.size();
    if (static_cast<int>(x.size()) != n)
        throw std::domain_error("vector length must match generator length");
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += a.entry(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = sum;
    }
    return y;
}

/// Product row of m >= 2 face generators by the explicit nested centered sum
///   t_m[k] = 1/n + sum over i_1..i_{m-1} of
///            (c_1[i_1] - 1/n)(c_2[i_2 - i_1] - 1/n)...(c_m[k - i_{m-1}] - 1/n),
/// all indices cyclic. This enumerates n^(m-1) terms per component and is the
/// independent route against iterated circ_multiply; it is only valid when
/// every generator has unit row sum, so off-face inputs are rejected.
inline CirculantGenerator product_row_formula(std::span<const CirculantGenerator> gens) {
    if (gens.size() < 2) throw std::domain_error("product row formula needs m >= 2 factors");
    const int n = gens[0].size();
    const int m = static_cast<int>(gens.size());
    double enumeration = 1.0;
    for (const auto& g : gens) {
        detail::require_generator(g);
        if (g.size() != n) throw std::domain_error("circulant generators must have equal length");
        if (std::abs(g.row_sum() - 1.0) > kFaceRowSumTol)
            throw std::domain_error("product row formula requires unit row sums");
        enumeration *= n;
    }
    if (enumeration / n > 1e8)
        throw std::domain_error("product row formula enumeration too large");

    const double center = 1.0 / n;
    std::vector<double> result(static_cast<std::size_t>(n), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(m > 1 ? m - 1 : 1), 0);

    for (int k = 0; k < n; ++k) {
        double total = 0.0;
        // Depth-first enumeration of (i_1, ..., i_{m-1}).
        auto recurse = [&](auto&& self, int level, double prefix) -> void {
            if (level == m - 1) {
                const int last = detail::cyclic(k - idx[static_cast<std::size_t>(m - 2)], n);
                total += prefix * (gens[static_cast<std::size_t>(m - 1)].row[static_cast<std::size_t>(last)] - center);
                return;
            }
            for (int i = 0; i < n; ++i) {
                idx[static_cast<std::size_t>(level)] = i;
                const int pos = level == 0 ? i : detail::cyclic(i - idx[static_cast<std::size_t>(level - 1)], n);
                const double factor = gens[static_cast<std::size_t>(level)].row[static_cast<std::size_t>(pos)] - center;
                self(self, level + 1, prefix * factor);
            }
        };
        recurse(recurse, 0, 1.0);
        result[static_cast<std::size_t>(k)] = center + total;
    }
    return CirculantGenerator{std::move(result)};
}

enum class StochClass { DoublyStochastic, SubStochastic, Neither };

inline const char* to_string(StochClass c) {
    switch (c) {
        case StochClass::DoublyStochastic: return "doubly-stochastic";
        case StochClass::SubStochastic: return "sub-stochastic";
        default: return "neither";
    }
}

struct StochasticityClass {
    StochClass cls = StochClass::Neither;
    double row_sum = 0.0;
};

/// For a circulant matrix every row and column has the same sum, so the whole
/// classification reduces to the generator's entries and its sum.
inline StochasticityClass classify_stochasticity(const CirculantGenerator& a,
                                                 double tol = kStochasticTol) {
    detail::require_generator(a);
    if (tol < 0) throw std::domain_error("tolerance must be nonnegative");
    bool nonnegative = true;
    for (double v : a.row)
        if (v < -tol) nonnegative = false;
    const double sum = a.row_sum();
    StochasticityClass out;
    out.row_sum = sum;
    if (nonnegative && std::abs(sum - 1.0) <= tol)
        out.cls = StochClass::DoublyStochastic;
    else if (nonnegative && sum < 1.0 - tol)
        out.cls = StochClass::SubStochastic;
    else
        out.cls = StochClass::Neither;
    return out;
}

}  // namespace hhcert
