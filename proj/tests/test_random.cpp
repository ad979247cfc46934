#include <doctest.h>

#include <map>
#include <set>
#include <vector>

#include "hompol/random.hpp"
#include "oracles.hpp"

using namespace hompol;

namespace {

double binomial_pmf(std::uint64_t n, double p, std::uint64_t k) {
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return std::exp(std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) + kk * std::log(p) +
                    (nn - kk) * std::log1p(-p));
}

// Pearson statistic over bins with expected count >= 5 (tails pooled).
// Returns (statistic, degrees of freedom).
std::pair<double, int> chi_square(std::uint64_t n, double p, int draws, std::uint64_t seed) {
    StreamGenerator gen({seed, 99});
    std::map<std::uint64_t, int> observed;
    for (int i = 0; i < draws; ++i) {
        ++observed[sample_binomial(gen, n, p)];
    }
    double stat = 0;
    int bins = 0;
    double pooled_expected = 0;
    double pooled_observed = 0;
    for (std::uint64_t k = 0; k <= n; ++k) {
        const double expected = draws * binomial_pmf(n, p, k);
        const double seen = observed.contains(k) ? observed[k] : 0;
        if (expected < 5) {
            pooled_expected += expected;
            pooled_observed += seen;
            continue;
        }
        stat += (seen - expected) * (seen - expected) / expected;
        ++bins;
    }
    if (pooled_expected > 0) {
        stat += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / pooled_expected;
        ++bins;
    }
    return {stat, bins - 1};
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(philox4x32_10(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream generator determinism and independence") {
    StreamGenerator a({42, 7});
    StreamGenerator b({42, 7});
    StreamGenerator c({42, 8});
    StreamGenerator d({43, 7});
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        CHECK(x == b());
        same_c += x == c();
        same_d += x == d();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
}

TEST_CASE("stream index packing") {
    CHECK(stream_index(StreamPurpose::DipFrame, 0, 0) == (std::uint64_t{1} << 48));
    CHECK(stream_index(StreamPurpose::DipSweep, 2, 5) == ((std::uint64_t{3} << 48) | (std::uint64_t{2} << 32) | 5));
    std::set<std::uint64_t> seen;
    for (auto purpose : {StreamPurpose::DipFrame, StreamPurpose::BaselineFrame, StreamPurpose::DipSweep,
                         StreamPurpose::Repetition, StreamPurpose::Phantom}) {
        for (std::uint32_t sub = 0; sub < 4; ++sub) {
            for (std::uint32_t item = 0; item < 4; ++item) {
                seen.insert(stream_index(purpose, sub, item));
            }
        }
    }
    CHECK(seen.size() == 5 * 16);
}

TEST_CASE("uniform doubles lie in the open unit interval with the right moments") {
    StreamGenerator gen({1, 1});
    const int n = 200000;
    double sum = 0;
    double sum_sq = 0;
    for (int i = 0; i < n; ++i) {
        const double u = gen.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    CHECK(std::abs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sum_sq / n - sum * sum / n / n - 1.0 / 12) < 2e-3);
}

TEST_CASE("binomial edge cases") {
    StreamGenerator gen({5, 5});
    CHECK(sample_binomial(gen, 0, 0.3) == 0);
    CHECK(sample_binomial(gen, 1000, 0.0) == 0);
    CHECK(sample_binomial(gen, 1000, 1.0) == 1000);
    CHECK_THROWS_AS(sample_binomial(gen, 10, -0.1), DomainError);
    CHECK_THROWS_AS(sample_binomial(gen, 10, 1.1), DomainError);
    CHECK_THROWS_AS(sample_binomial(gen, 10, std::nan("")), DomainError);
}

TEST_CASE("binomial distribution goodness of fit") {
    // Covers the inversion path, the rejection path and the p > 1/2 reflection.
    struct Case {
        std::uint64_t n;
        double p;
    };
    for (const Case c : {Case{20, 0.3}, Case{5, 0.05}, Case{100, 0.4}, Case{1000, 0.7}, Case{60, 0.93},
                         Case{100000, 0.25}}) {
        CAPTURE(c.n);
        CAPTURE(c.p);
        const auto [stat, dof] = chi_square(c.n, c.p, 100000, 17);
        // Generous bound: mean dof, sd sqrt(2 dof).
        CHECK(stat < dof + 6 * std::sqrt(2.0 * dof));
    }
}

TEST_CASE("binomial moments for large n") {
    StreamGenerator gen({9, 3});
    const std::uint64_t n = 1000000000ull;
    const double p = 0.37;
    const int draws = 20000;
    double sum = 0;
    double sum_sq = 0;
    for (int i = 0; i < draws; ++i) {
        const double k = static_cast<double>(sample_binomial(gen, n, p));
        sum += k;
        sum_sq += k * k;
    }
    const double mean = sum / draws;
    const double var = sum_sq / draws - mean * mean;
    const double true_var = n * p * (1 - p);
    CHECK(std::abs(mean - n * p) < 5 * std::sqrt(true_var / draws));
    CHECK(var / true_var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("multinomial") {
    StreamGenerator gen({3, 3});
    const OutcomeProbabilitiesd probs{0.04, 0.62, 0.34};
    const std::uint64_t n = 100000;
    double s0 = 0, s1 = 0, s2 = 0;
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
        const auto c = sample_multinomial(gen, n, probs);
        REQUIRE(c.total() == n);
        s0 += static_cast<double>(c.n0);
        s1 += static_cast<double>(c.n1);
        s2 += static_cast<double>(c.n2);
    }
    auto within = [&](double s, double p) {
        return std::abs(s / draws - n * p) < 5 * std::sqrt(n * p * (1 - p) / draws);
    };
    CHECK(within(s0, probs.p0));
    CHECK(within(s1, probs.p1));
    CHECK(within(s2, probs.p2));

    const auto all_none = sample_multinomial(gen, n, OutcomeProbabilitiesd{1, 0, 0});
    CHECK(all_none == CountTriple{n, 0, 0});
}
