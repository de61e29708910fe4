#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hhcert/circulant.hpp"
#include "hhcert/closed_forms.hpp"
#include "hhcert/gauss.hpp"
#include "hhcert/rng.hpp"
#include "hhcert/simplex.hpp"

namespace hhcert {

/// l1 distance of a generator row from the barycenter (1/n, ..., 1/n):
/// sum_j |t^j - 1/n|. Vanishes exactly at the barycenter, positive elsewhere.
inline double barycenter_l1(std::span<const double> t) {
    if (t.empty()) throw std::domain_error("dimension must be >= 1");
    const double center = 1.0 / static_cast<double>(t.size());
    double sum = 0.0;
    for (double v : t) sum += std::abs(v - center);
    return sum;
}

/// Monte-Carlo estimate of the depth-m averaged functional: the mean of
/// target(t_m) where t_m generates circ(c_1)...circ(c_m) and the c_j are
/// independent draws under the mode's measure.
struct OperatorEstimate {
    int m = 0;
    int n = 0;
    long long samples = 0;
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(samples)
    SimplexMode mode = SimplexMode::Solid;
    std::uint64_t seed = 0;
};

using GeneratorTarget = std::function<double(std::span<const double>)>;

namespace detail {

// Samples are partitioned into fixed blocks, one substream per block, and the
// per-block sums are reduced in block order. The result is therefore bitwise
// identical for any worker count.
inline constexpr long long kBlockSize = 4096;

struct BlockSums {
    double sum = 0.0;
    double sumsq = 0.0;
};

inline BlockSums run_block(const GeneratorTarget& target, int n, int m, long long count,
                           SimplexMode mode, RandomStream rng) {
    BlockSums acc;
    for (long long s = 0; s < count; ++s) {
        SimplexPoint first = sample_point(n, mode, rng);
        CirculantGenerator t{std::move(first.coords)};
        for (int j = 1; j < m; ++j) {
            SimplexPoint next = sample_point(n, mode, rng);
            t = circ_multiply(t, CirculantGenerator{std::move(next.coords)});
        }
        const double v = target(std::span<const double>(t.row.data(), t.row.size()));
        if (!std::isfinite(v)) throw EvaluationError("operator target is non-finite", t.row);
        acc.sum += v;
        acc.sumsq += v * v;
    }
    return acc;
}

}  // namespace detail

inline OperatorEstimate estimate_operator(const GeneratorTarget& target, int n, int m,
                                          long long samples, SimplexMode mode,
                                          std::uint64_t seed, int workers = 1) {
    if (n < 1) throw std::domain_error("dimension must be >= 1");
    if (m < 1) throw std::domain_error("depth must be >= 1");
    if (samples < 1) throw std::domain_error("sample count must be >= 1");

    const long long nblocks = (samples + detail::kBlockSize - 1) / detail::kBlockSize;
    std::vector<detail::BlockSums> blocks(static_cast<std::size_t>(nblocks));

    const RandomStream root(seed);
    auto block_job = [&](long long b) {
        const long long lo = b * detail::kBlockSize;
        const long long count = std::min(detail::kBlockSize, samples - lo);
        blocks[static_cast<std::size_t>(b)] = detail::run_block(
            target, n, m, count, mode, root.substream(static_cast<std::uint64_t>(b)));
    };

    if (workers <= 1 || nblocks == 1) {
        for (long long b = 0; b < nblocks; ++b) block_job(b);
    } else {
        std::atomic<long long> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                const long long b = next.fetch_add(1);
                if (b >= nblocks) return;
                try {
                    block_job(b);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const int count = static_cast<int>(std::min<long long>(workers, nblocks));
        pool.reserve(static_cast<std::size_t>(count));
        for (int w = 0; w < count; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    double sum = 0.0, sumsq = 0.0;
    for (const auto& b : blocks) {
        sum += b.sum;
        sumsq += b.sumsq;
    }
    OperatorEstimate est;
    est.m = m;
    est.n = n;
    est.samples = samples;
    est.mode = mode;
    est.seed = seed;
    est.mean = sum / static_cast<double>(samples);
    if (samples > 1) {
        const double ss = std::max(0.0, sumsq - static_cast<double>(samples) * est.mean * est.mean);
        est.std_error = std::sqrt(ss / static_cast<double>(samples - 1)) /
                        std::sqrt(static_cast<double>(samples));
    }
    return est;
}

/// Decay bound for face-mode experiments: n * E|c^1 - 1/n| where c^1 has the
/// flat-Dirichlet marginal density (n-1)(1-x)^(n-2) on [0, 1]. The face is a
/// single point when n = 1, so the bound is 0 there.
inline double face_decay_bound(int n) {
    if (n < 1) throw std::domain_error("dimension must be >= 1");
    if (n == 1) return 0.0;
    const double center = 1.0 / n;
    auto integrand = [&](double x) {
        return std::abs(x - center) * (n - 1) * std::pow(1.0 - x, n - 2);
    };
    // The integrand is polynomial on each side of the kink, so a split rule
    // is exact up to roundoff.
    const GaussRule& rule = gauss_rule(48);
    const double ev = gl_panel(integrand, 0.0, center, rule) + gl_panel(integrand, center, 1.0, rule);
    return n * ev;
}

/// Per-depth estimates plus a least-squares geometric decay fit.
struct DecaySeries {
    std::vector<OperatorEstimate> estimates;  // ordered by m = 1..m_max
    bool fitted = false;
    double fitted_ratio = 0.0;  // exp of the OLS slope of (m, log mean)
    double bound = 0.0;         // face decay bound in Face mode, rho_n in Solid mode
    double contraction_rho = 0.0;  // rho_n, reported in both modes
};

inline DecaySeries decay_experiment(const GeneratorTarget& target, int n, int m_max,
                                    long long samples, SimplexMode mode, std::uint64_t seed,
                                    int workers = 1) {
    if (m_max < 2) throw std::domain_error("decay experiment needs m_max >= 2");
    DecaySeries series;
    series.estimates.reserve(static_cast<std::size_t>(m_max));
    for (int m = 1; m <= m_max; ++m) {
        const std::uint64_t m_seed = RandomStream::derive_seed(seed, 0x6d00 + static_cast<std::uint64_t>(m));
        series.estimates.push_back(estimate_operator(target, n, m, samples, mode, m_seed, workers));
    }

    // OLS on (m, log mean) over depths whose mean clears the noise floor.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (const auto& e : series.estimates) {
        if (!(e.mean > 5.0 * e.std_error) || !(e.mean > 0.0)) continue;
        const double x = static_cast<double>(e.m);
        const double y = std::log(e.mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    if (pts >= 2) {
        const double denom = pts * sxx - sx * sx;
        if (denom != 0.0) {
            series.fitted = true;
            series.fitted_ratio = std::exp((pts * sxy - sx * sy) / denom);
        }
    }

    series.contraction_rho = to_double(contraction_factor(n).rho);
    series.bound = mode == SimplexMode::Face ? face_decay_bound(n) : series.contraction_rho;
    return series;
}

/// Compares the depth-m_max estimate of h against h at the barycenter; the
/// threshold allows 3 standard errors plus a slack for the finite-depth
/// residual.
struct ConclusionReport {
    OperatorEstimate estimate;
    double limit_value = 0.0;
    double abs_error = 0.0;
    double threshold = 0.0;
    bool within = false;
};

inline ConclusionReport conclusion_check(const GeneratorTarget& h, int n, int m_max,
                                         long long samples, SimplexMode mode,
                                         std::uint64_t seed, double slack = 1e-2,
                                         int workers = 1) {
    if (m_max < 1) throw std::domain_error("depth must be >= 1");
    ConclusionReport rep;
    const std::uint64_t m_seed = RandomStream::derive_seed(seed, 0x6d00 + static_cast<std::uint64_t>(m_max));
    rep.estimate = estimate_operator(h, n, m_max, samples, mode, m_seed, workers);
    std::vector<double> barycenter(static_cast<std::size_t>(n), 1.0 / n);
    rep.limit_value = h(std::span<const double>(barycenter.data(), barycenter.size()));
    rep.abs_error = std::abs(rep.estimate.mean - rep.limit_value);
    rep.threshold = 3.0 * rep.estimate.std_error + slack;
    rep.within = rep.abs_error <= rep.threshold;
    return rep;
}

}  // namespace hhcert
