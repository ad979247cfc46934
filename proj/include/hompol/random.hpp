#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "hompol/detection.hpp"

namespace hompol {

/// Identifies an independent random sequence. Equal (seed, index) pairs
/// produce equal sequences; sequences for different indices are
/// statistically independent.
struct RandomStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    bool operator==(const RandomStream&) const = default;
};

/// What a stream is used for; keeps sub-streams of one run disjoint.
enum class StreamPurpose : std::uint16_t {
    DipFrame = 1,
    BaselineFrame = 2,
    DipSweep = 3,
    Repetition = 4,
    Phantom = 5,
};

/// Packs (purpose, sub, item) into a 64-bit stream index:
/// bits 48..63 purpose, 32..47 sub, 0..31 item.
constexpr std::uint64_t stream_index(StreamPurpose purpose, std::uint32_t sub, std::uint32_t item) {
    return (static_cast<std::uint64_t>(purpose) << 48) | (static_cast<std::uint64_t>(sub & 0xffffu) << 32) | item;
}

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based generator bound to one RandomStream. The key is the master
/// seed; the counter carries the stream index and the block number, so no
/// state is shared between streams.
class StreamGenerator {
public:
    using result_type = std::uint64_t;

    explicit StreamGenerator(RandomStream stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform double on the open interval (0, 1), 53 bits of resolution.
    double uniform();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_index_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

/// Exact binomial draw. Geometric-gap inversion for small means, Hörmann's
/// BTRS transformed rejection otherwise. Implemented here (not <random>) so
/// results do not depend on the standard library vendor.
std::uint64_t sample_binomial(StreamGenerator& gen, std::uint64_t n, double p);

/// One multinomial draw of size n over (p0, p1, p2), via conditional binomials.
CountTriple sample_multinomial(StreamGenerator& gen, std::uint64_t n, const OutcomeProbabilitiesd& probs);

}  // namespace hompol
