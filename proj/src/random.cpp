#include "hompol/random.hpp"

#include <algorithm>
#include <cmath>

#include "hompol/errors.hpp"

namespace hompol {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// log(k!) - [(k + 1/2) log(k + 1) - (k + 1) + log(2 pi) / 2]
double stirling_tail(double k) {
    static constexpr double table[] = {
        0.08106146679532726, 0.04134069595540929, 0.02767792568499834, 0.02079067210376509,
        0.01664469118982119, 0.01387612882307075, 0.01189670994589177, 0.01041126526197210,
        0.009255462182712733, 0.008330563433362871,
    };
    if (k <= 9.0) {
        return table[static_cast<int>(k)];
    }
    const double kp1sq = (k + 1.0) * (k + 1.0);
    return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / (k + 1.0);
}

std::uint64_t binomial_inversion(StreamGenerator& gen, std::uint64_t n, double p) {
    const double log_q = std::log1p(-p);
    double gap_sum = 0.0;
    std::uint64_t successes = 0;
    const auto limit = static_cast<double>(n);
    while (true) {
        gap_sum += std::ceil(std::log(gen.uniform()) / log_q);
        if (gap_sum > limit) {
            return successes;
        }
        ++successes;
    }
}

std::uint64_t binomial_btrs(StreamGenerator& gen, std::uint64_t n, double p) {
    const auto count = static_cast<double>(n);
    const double stddev = std::sqrt(count * p * (1.0 - p));
    const double b = 1.15 + 2.53 * stddev;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = count * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double r = p / (1.0 - p);
    const double alpha = (2.83 + 5.1 / b) * stddev;
    const double m = std::floor((count + 1.0) * p);

    while (true) {
        const double u = gen.uniform() - 0.5;
        double v = gen.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + c);
        if (k < 0.0 || k > count) {
            continue;
        }
        if (us >= 0.07 && v <= v_r) {
            return static_cast<std::uint64_t>(k);
        }
        v = std::log(v * alpha / (a / (us * us) + b));
        const double bound = (m + 0.5) * std::log((m + 1.0) / (r * (count - m + 1.0))) +
                             (count + 1.0) * std::log((count - m + 1.0) / (count - k + 1.0)) +
                             (k + 0.5) * std::log(r * (count - k + 1.0) / (k + 1.0)) + stirling_tail(m) +
                             stirling_tail(count - m) - stirling_tail(k) - stirling_tail(count - k);
        if (v <= bound) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

StreamGenerator::StreamGenerator(RandomStream stream)
    : key_{static_cast<std::uint32_t>(stream.master_seed), static_cast<std::uint32_t>(stream.master_seed >> 32)},
      stream_index_(stream.stream_index) {}

void StreamGenerator::refill() {
    buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                             static_cast<std::uint32_t>(stream_index_),
                             static_cast<std::uint32_t>(stream_index_ >> 32)},
                            key_);
    ++block_;
    used_ = 0;
}

StreamGenerator::result_type StreamGenerator::operator()() {
    if (used_ > 2) {
        refill();
    }
    const std::uint64_t hi = buffer_[used_];
    const std::uint64_t lo = buffer_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double StreamGenerator::uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t sample_binomial(StreamGenerator& gen, std::uint64_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("binomial probability must lie in [0, 1]");
    }
    if (n == 0 || p == 0.0) {
        return 0;
    }
    if (p == 1.0) {
        return n;
    }
    if (p > 0.5) {
        return n - sample_binomial(gen, n, 1.0 - p);
    }
    if (static_cast<double>(n) * p < 10.0) {
        return binomial_inversion(gen, n, p);
    }
    return binomial_btrs(gen, n, p);
}

CountTriple sample_multinomial(StreamGenerator& gen, std::uint64_t n, const OutcomeProbabilitiesd& probs) {
    CountTriple counts;
    counts.n0 = sample_binomial(gen, n, std::clamp(probs.p0, 0.0, 1.0));
    const std::uint64_t rest = n - counts.n0;
    const double rest_mass = probs.p1 + probs.p2;
    const double share = rest_mass > 0.0 ? std::clamp(probs.p1 / rest_mass, 0.0, 1.0) : 0.0;
    counts.n1 = sample_binomial(gen, rest, share);
    counts.n2 = rest - counts.n1;
    return counts;
}

}  // namespace hompol
