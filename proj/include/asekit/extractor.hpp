// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "detection_chain.hpp"
#include "entropy_quant.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace asekit {

//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//

/// Unpacked bit sequence, one bit per byte (values 0 or 1).
using BitVec = std::vector<std::uint8_t>;

/// Parameters of a Toeplitz-hashing extractor mapping n raw bits to k
/// output bits.
///
/// The seed encodes an n x k Toeplitz matrix A: the first n seed bits are
/// the first column of A read top-down, and the remaining k - 1 bits extend
/// the first row left-to-right from its second element.  A block x of n
/// input bits maps to y = A^T x over GF(2), i.e. output bit j is the parity
/// of the inputs selected by column j of A.
struct ToeplitzSpec
{
    std::size_t input_block_bits = 0;  //!< n
    std::size_t output_block_bits = 0;  //!< k
    BitVec seed_bits;  //!< length n + k - 1

    void validate() const
    {
        if (input_block_bits == 0)
            throw std::domain_error("ToeplitzSpec: input block must be "
                                    "non-empty");
        if (output_block_bits == 0
            || output_block_bits > input_block_bits)
            throw std::domain_error(
                "ToeplitzSpec: output block must satisfy 0 < k <= n");
        if (seed_bits.size() != input_block_bits + output_block_bits - 1)
            throw std::domain_error(
                "ToeplitzSpec: seed must have n + k - 1 bits, got "
                + std::to_string(seed_bits.size()));
        for (auto b : seed_bits)
            if (b > 1)
                throw std::domain_error(
                    "ToeplitzSpec: seed bits must be 0 or 1");
    }
};

struct ExtractResult
{
    BitVec bits;
    std::size_t blocks = 0;
    std::size_t dropped_input_bits = 0;  //!< trailing partial block
};

//---------------------------------------------------------------------------//
// Seed construction
//---------------------------------------------------------------------------//

/// Expand a 64-bit seed into the n + k - 1 matrix seed bits using the
/// deterministic counter stream reserved for extractor seeding.
inline ToeplitzSpec make_toeplitz_spec(std::size_t input_block_bits,
                                       std::size_t output_block_bits,
                                       std::uint64_t seed)
{
    ToeplitzSpec spec;
    spec.input_block_bits = input_block_bits;
    spec.output_block_bits = output_block_bits;
    if (input_block_bits == 0 || output_block_bits == 0
        || output_block_bits > input_block_bits)
        throw std::domain_error(
            "make_toeplitz_spec: require 0 < k <= n");

    std::size_t nbits = input_block_bits + output_block_bits - 1;
    spec.seed_bits.resize(nbits);
    CounterRng rng = make_stream(seed, RngStream::extractor_seed);
    for (std::size_t i = 0; i < nbits; ++i)
        spec.seed_bits[i] = static_cast<std::uint8_t>(
            (rng.word_at(i / 64) >> (i % 64)) & 1u);
    return spec;
}

/// Size the extractor from a certified entropy report: keep the output to
/// input ratio k / n at or below the certified bits per raw sample,
/// k = n * floor(h_merged) / bits_per_sample (integer arithmetic).
inline ToeplitzSpec make_toeplitz_spec_from_report(EntropyReport const& report,
                                                   int bits_per_sample,
                                                   std::size_t input_block_bits
                                                   = 4096,
                                                   std::uint64_t seed = 0)
{
    if (bits_per_sample < 1 || bits_per_sample > 64)
        throw std::domain_error(
            "make_toeplitz_spec_from_report: bits_per_sample must be in "
            "[1, 64]");
    if (!(report.h_merged_bits > 0.0))
        throw std::domain_error(
            "make_toeplitz_spec_from_report: certified entropy must be "
            "positive");
    auto whole_bits
        = static_cast<std::size_t>(std::floor(report.h_merged_bits));
    if (whole_bits == 0)
        throw std::domain_error(
            "make_toeplitz_spec_from_report: certified entropy below one "
            "bit per sample");
    if (whole_bits > static_cast<std::size_t>(bits_per_sample))
        whole_bits = static_cast<std::size_t>(bits_per_sample);
    std::size_t k = input_block_bits * whole_bits
                    / static_cast<std::size_t>(bits_per_sample);
    if (k == 0)
        throw std::domain_error(
            "make_toeplitz_spec_from_report: block too small for the "
            "certified rate");
    return make_toeplitz_spec(input_block_bits, k, seed);
}

//---------------------------------------------------------------------------//
// Raw bit derivation
//---------------------------------------------------------------------------//

/// Turn a voltage trace into raw bits: each sample is replaced by the rank
/// of its voltage among the distinct values of the trace, emitted as a
/// fixed-width word, most significant bit first.
inline BitVec raw_bits_from_trace(VoltageTrace const& trace,
                                  int bits_per_sample)
{
    if (bits_per_sample < 1 || bits_per_sample > 64)
        throw std::domain_error(
            "raw_bits_from_trace: bits_per_sample must be in [1, 64]");
    if (trace.samples.empty())
        throw std::invalid_argument("raw_bits_from_trace: empty trace");

    std::vector<double> levels = trace.samples;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    if (bits_per_sample < 64
        && levels.size() > (std::uint64_t{1} << bits_per_sample))
    {
        throw std::domain_error(
            "raw_bits_from_trace: " + std::to_string(levels.size())
            + " distinct levels do not fit in "
            + std::to_string(bits_per_sample)
            + " bits per sample; increase bits_per_sample");
    }

    BitVec bits;
    bits.reserve(trace.samples.size()
                 * static_cast<std::size_t>(bits_per_sample));
    for (double v : trace.samples)
    {
        auto rank = static_cast<std::uint64_t>(
            std::lower_bound(levels.begin(), levels.end(), v)
            - levels.begin());
        for (int b = bits_per_sample - 1; b >= 0; --b)
            bits.push_back(static_cast<std::uint8_t>((rank >> b) & 1u));
    }
    return bits;
}

//---------------------------------------------------------------------------//
// Extraction
//---------------------------------------------------------------------------//

/// Apply the Toeplitz extractor block-by-block.
///
/// Output bit j of a block is the GF(2) inner product of the input with
/// column j of the seed matrix; columns are precomputed as packed 64-bit
/// words and XOR-accumulated for each set input bit, so a block costs
/// O(n * popcount-weight) word operations.  Trailing input bits that do not
/// fill a block are dropped and counted.
inline ExtractResult toeplitz_extract(BitVec const& input,
                                      ToeplitzSpec const& spec)
{
    spec.validate();
    for (auto b : input)
        if (b > 1)
            throw std::domain_error(
                "toeplitz_extract: input bits must be 0 or 1");

    std::size_t const n = spec.input_block_bits;
    std::size_t const k = spec.output_block_bits;

    // Diagonal layout: entry A(i, j) = d[n - 1 - i + j] where d is the
    // reversed first column followed by the rest of the first row.  Column
    // j of A is then the window d[n - 1 - j ... n - 1 - j + k - 1]... note
    // that output bit j sums A(i, j) x_i over i, so we need the window
    // d[(n - 1 - i) + j] for fixed i: precompute per input position i the
    // packed k-bit window starting at n - 1 - i.
    std::vector<std::uint8_t> diag(n + k - 1);
    for (std::size_t i = 0; i < n; ++i)
        diag[n - 1 - i] = spec.seed_bits[i];  // first column, reversed
    for (std::size_t j = 1; j < k; ++j)
        diag[n - 1 + j] = spec.seed_bits[n + j - 1];  // rest of first row

    std::size_t const words = (k + 63) / 64;
    std::vector<std::uint64_t> row_masks(n * words, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
        std::uint64_t* mask = row_masks.data() + i * words;
        std::size_t base = n - 1 - i;
        for (std::size_t j = 0; j < k; ++j)
        {
            if (diag[base + j])
                mask[j / 64] |= std::uint64_t{1} << (j % 64);
        }
    }

    ExtractResult result;
    result.blocks = input.size() / n;
    result.dropped_input_bits = input.size() % n;
    result.bits.reserve(result.blocks * k);

    std::vector<std::uint64_t> acc(words);
    for (std::size_t block = 0; block < result.blocks; ++block)
    {
        std::fill(acc.begin(), acc.end(), 0);
        std::uint8_t const* x = input.data() + block * n;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (x[i])
            {
                std::uint64_t const* mask = row_masks.data() + i * words;
                for (std::size_t w = 0; w < words; ++w)
                    acc[w] ^= mask[w];
            }
        }
        for (std::size_t j = 0; j < k; ++j)
            result.bits.push_back(static_cast<std::uint8_t>(
                (acc[j / 64] >> (j % 64)) & 1u));
    }
    return result;
}

//---------------------------------------------------------------------------//
// Bitstream files
//---------------------------------------------------------------------------//

/// Hex-encode a bit vector MSB-first (final partial nibble zero-padded).
inline std::string bits_to_hex(BitVec const& bits)
{
    static char const digits[] = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    unsigned nibble = 0;
    int filled = 0;
    for (auto b : bits)
    {
        nibble = (nibble << 1) | (b & 1u);
        if (++filled == 4)
        {
            out += digits[nibble];
            nibble = 0;
            filled = 0;
        }
    }
    if (filled > 0)
        out += digits[nibble << (4 - filled)];
    return out;
}

inline BitVec hex_to_bits(std::string_view hex, std::size_t bit_count)
{
    BitVec bits;
    bits.reserve(hex.size() * 4);
    for (char c : hex)
    {
        unsigned v = 0;
        if (c >= '0' && c <= '9')
            v = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v = static_cast<unsigned>(c - 'a') + 10;
        else if (c >= 'A' && c <= 'F')
            v = static_cast<unsigned>(c - 'A') + 10;
        else
            throw std::runtime_error("invalid hex digit in seed");
        for (int b = 3; b >= 0; --b)
            bits.push_back(static_cast<std::uint8_t>((v >> b) & 1u));
    }
    if (bits.size() < bit_count)
        throw std::runtime_error("hex seed shorter than declared bit count");
    bits.resize(bit_count);
    return bits;
}

/// Write a bitstream file: a text header line
///   # bitstream n=<n> k=<k> seed=<hex|-> count=<bits>
/// followed by the bits packed into bytes MSB-first (last byte
/// zero-padded).  Raw (unextracted) streams use n=0 k=0 seed=-.
inline void write_bitstream(std::filesystem::path const& path,
                            BitVec const& bits,
                            ToeplitzSpec const* spec = nullptr)
{
    atomic_write(path, [&](std::ostream& out) {
        out << "# bitstream n=" << (spec ? spec->input_block_bits : 0)
            << " k=" << (spec ? spec->output_block_bits : 0) << " seed="
            << (spec ? bits_to_hex(spec->seed_bits) : std::string("-"))
            << " count=" << bits.size() << '\n';
        unsigned byte = 0;
        int filled = 0;
        for (auto b : bits)
        {
            byte = (byte << 1) | (b & 1u);
            if (++filled == 8)
            {
                out.put(static_cast<char>(byte));
                byte = 0;
                filled = 0;
            }
        }
        if (filled > 0)
            out.put(static_cast<char>(byte << (8 - filled)));
    });
}

struct BitstreamFile
{
    BitVec bits;
    std::size_t n = 0;
    std::size_t k = 0;
    BitVec seed_bits;  //!< empty for raw streams
};

inline BitstreamFile read_bitstream(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open bitstream file "
                                 + path.string());
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("bitstream file missing header: "
                                 + path.string());
    KeyValueDocument doc;
    {
        // Header format: "# bitstream n=.. k=.. seed=.. count=..".
        std::string_view sv = trim(header);
        if (sv.substr(0, 11) != "# bitstream")
            throw std::runtime_error("bad bitstream header in "
                                     + path.string());
        sv = sv.substr(11);
        std::string token;
        std::istringstream fields{std::string(sv)};
        while (fields >> token)
        {
            auto eq = token.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("bad bitstream header field '"
                                         + token + "'");
            doc.entries.emplace_back(token.substr(0, eq),
                                     token.substr(eq + 1));
        }
    }

    BitstreamFile file;
    file.n = static_cast<std::size_t>(doc.integer("n"));
    file.k = static_cast<std::size_t>(doc.integer("k"));
    auto count = static_cast<std::size_t>(doc.integer("count"));
    std::string const& seed_hex = doc.at("seed");
    if (seed_hex != "-")
        file.seed_bits = hex_to_bits(seed_hex, file.n + file.k - 1);

    std::string packed((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
    if (packed.size() < (count + 7) / 8)
        throw std::runtime_error("bitstream file truncated: "
                                 + path.string());
    file.bits.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        auto byte = static_cast<unsigned char>(packed[i / 8]);
        file.bits.push_back(
            static_cast<std::uint8_t>((byte >> (7 - i % 8)) & 1u));
    }
    return file;
}

}  // namespace asekit
