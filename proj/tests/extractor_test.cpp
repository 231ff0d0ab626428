// Tests for Toeplitz-hashing post-processing: seed construction, raw bit
// derivation from traces, block extraction, and bitstream files.

#include <cstdint>
#include <filesystem>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "asekit/detection_chain.hpp"
#include "asekit/entropy_quant.hpp"
#include "asekit/extractor.hpp"
#include "asekit/rng.hpp"

namespace {

namespace fs = std::filesystem;

using asekit::bits_to_hex;
using asekit::BitVec;
using asekit::CounterRng;
using asekit::EntropyReport;
using asekit::ExtractResult;
using asekit::hex_to_bits;
using asekit::make_toeplitz_spec;
using asekit::make_toeplitz_spec_from_report;
using asekit::raw_bits_from_trace;
using asekit::read_bitstream;
using asekit::toeplitz_extract;
using asekit::ToeplitzSpec;
using asekit::VoltageTrace;
using asekit::write_bitstream;

fs::path temp_file(std::string const& name)
{
    return fs::temp_directory_path() / ("asekit_xtest_" + name);
}

BitVec random_bits(std::size_t count, std::uint64_t seed)
{
    CounterRng rng(seed, 9);
    BitVec bits(count);
    for (std::size_t i = 0; i < count; ++i)
        bits[i] = static_cast<std::uint8_t>(rng.word_at(i) & 1u);
    return bits;
}

BitVec xor_bits(BitVec const& a, BitVec const& b)
{
    BitVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] ^ b[i];
    return out;
}

//---------------------------------------------------------------------------//
// Spec construction
//---------------------------------------------------------------------------//

TEST(ToeplitzSpecTest, SeedHasExpectedLengthAndIsDeterministic)
{
    ToeplitzSpec a = make_toeplitz_spec(256, 128, 42);
    EXPECT_EQ(a.seed_bits.size(), 256u + 128u - 1u);
    EXPECT_NO_THROW(a.validate());

    ToeplitzSpec b = make_toeplitz_spec(256, 128, 42);
    EXPECT_EQ(a.seed_bits, b.seed_bits);
    ToeplitzSpec c = make_toeplitz_spec(256, 128, 43);
    EXPECT_NE(a.seed_bits, c.seed_bits);
}

TEST(ToeplitzSpecTest, RejectsInvalidShapes)
{
    EXPECT_THROW(make_toeplitz_spec(0, 1, 0), std::domain_error);
    EXPECT_THROW(make_toeplitz_spec(8, 0, 0), std::domain_error);
    EXPECT_THROW(make_toeplitz_spec(8, 9, 0), std::domain_error);

    ToeplitzSpec bad;
    bad.input_block_bits = 3;
    bad.output_block_bits = 2;
    bad.seed_bits = {1, 0, 1};  // needs 4 bits
    EXPECT_THROW(bad.validate(), std::domain_error);
    bad.seed_bits = {1, 0, 1, 2};  // non-binary
    EXPECT_THROW(bad.validate(), std::domain_error);
}

TEST(ToeplitzSpecTest, ReportSizedOutputTracksCertifiedEntropy)
{
    // 10.2859 certified bits on 16-bit samples with 4096-bit blocks:
    // k = 4096 * 10 / 16 = 2560, so k/n = 0.625 <= 10.2859/16.
    EntropyReport report;
    report.h_merged_bits = 10.2859;
    ToeplitzSpec spec = make_toeplitz_spec_from_report(report, 16, 4096, 1);
    EXPECT_EQ(spec.input_block_bits, 4096u);
    EXPECT_EQ(spec.output_block_bits, 2560u);
    double ratio = static_cast<double>(spec.output_block_bits)
                   / static_cast<double>(spec.input_block_bits);
    EXPECT_LE(ratio, report.h_merged_bits / 16.0);

    // Entropy above bits_per_sample clamps to an identity-rate extractor.
    report.h_merged_bits = 20.0;
    ToeplitzSpec full = make_toeplitz_spec_from_report(report, 16, 4096, 1);
    EXPECT_EQ(full.output_block_bits, 4096u);
}

TEST(ToeplitzSpecTest, ReportSizingRejectsDegenerateCases)
{
    EntropyReport report;
    report.h_merged_bits = 0.5;  // below one whole bit
    EXPECT_THROW(make_toeplitz_spec_from_report(report, 16, 4096, 1),
                 std::domain_error);
    report.h_merged_bits = 10.0;
    EXPECT_THROW(make_toeplitz_spec_from_report(report, 0, 4096, 1),
                 std::domain_error);
    // Block so small that k truncates to zero.
    EXPECT_THROW(make_toeplitz_spec_from_report(report, 16, 1, 1),
                 std::domain_error);
}

//---------------------------------------------------------------------------//
// Extraction
//---------------------------------------------------------------------------//

TEST(ToeplitzExtractTest, HandComputedThreeByTwoExample)
{
    // Seed bits 1,0,1,1 encode the 3x2 matrix
    //   [1 1]
    //   [0 1]
    //   [1 0]
    // (first column 1,0,1 top-down, then first row continues with 1).
    // Input x = (1,1,0) gives y = A^T x = (1, 0) over GF(2).
    ToeplitzSpec spec;
    spec.input_block_bits = 3;
    spec.output_block_bits = 2;
    spec.seed_bits = {1, 0, 1, 1};

    ExtractResult r = toeplitz_extract({1, 1, 0}, spec);
    ASSERT_EQ(r.bits.size(), 2u);
    EXPECT_EQ(r.bits[0], 1);
    EXPECT_EQ(r.bits[1], 0);
    EXPECT_EQ(r.blocks, 1u);
    EXPECT_EQ(r.dropped_input_bits, 0u);
}

TEST(ToeplitzExtractTest, AllZeroInputGivesAllZeroOutput)
{
    ToeplitzSpec spec = make_toeplitz_spec(64, 32, 7);
    BitVec zeros(64, 0);
    ExtractResult r = toeplitz_extract(zeros, spec);
    ASSERT_EQ(r.bits.size(), 32u);
    for (auto b : r.bits)
        EXPECT_EQ(b, 0);
}

TEST(ToeplitzExtractTest, ExtractionIsLinearOverGf2)
{
    ToeplitzSpec spec = make_toeplitz_spec(256, 128, 5);
    BitVec x = random_bits(256, 101);
    BitVec y = random_bits(256, 202);
    ExtractResult rx = toeplitz_extract(x, spec);
    ExtractResult ry = toeplitz_extract(y, spec);
    ExtractResult rxy = toeplitz_extract(xor_bits(x, y), spec);
    EXPECT_EQ(rxy.bits, xor_bits(rx.bits, ry.bits));
}

TEST(ToeplitzExtractTest, WideOutputBlocksCrossWordBoundaries)
{
    // k = 130 exercises the multi-word accumulator path; check linearity
    // and determinism there too.
    ToeplitzSpec spec = make_toeplitz_spec(200, 130, 11);
    BitVec x = random_bits(200, 404);
    ExtractResult a = toeplitz_extract(x, spec);
    ExtractResult b = toeplitz_extract(x, spec);
    EXPECT_EQ(a.bits, b.bits);
    ASSERT_EQ(a.bits.size(), 130u);

    BitVec y = random_bits(200, 505);
    ExtractResult rx = toeplitz_extract(x, spec);
    ExtractResult ry = toeplitz_extract(y, spec);
    ExtractResult rxy = toeplitz_extract(xor_bits(x, y), spec);
    EXPECT_EQ(rxy.bits, xor_bits(rx.bits, ry.bits));
}

TEST(ToeplitzExtractTest, TrailingPartialBlockIsDroppedAndCounted)
{
    ToeplitzSpec spec = make_toeplitz_spec(64, 32, 3);
    BitVec input = random_bits(64 * 2 + 17, 77);
    ExtractResult r = toeplitz_extract(input, spec);
    EXPECT_EQ(r.blocks, 2u);
    EXPECT_EQ(r.bits.size(), 64u);
    EXPECT_EQ(r.dropped_input_bits, 17u);
}

TEST(ToeplitzExtractTest, RejectsNonBinaryInput)
{
    ToeplitzSpec spec = make_toeplitz_spec(8, 4, 0);
    BitVec bad{0, 1, 2, 0, 0, 0, 0, 0};
    EXPECT_THROW(toeplitz_extract(bad, spec), std::domain_error);
}

//---------------------------------------------------------------------------//
// Raw bits from traces
//---------------------------------------------------------------------------//

TEST(RawBitsTest, TwoLevelTraceMapsToZeroAndOne)
{
    VoltageTrace t;
    t.samples = {5e-3, 1e-3, 5e-3, 1e-3, 1e-3};
    BitVec bits = raw_bits_from_trace(t, 1);
    // Ranks by sorted voltage: 1e-3 -> 0, 5e-3 -> 1.
    BitVec expected{1, 0, 1, 0, 0};
    EXPECT_EQ(bits, expected);
}

TEST(RawBitsTest, FourLevelTraceEmitsTwoBitWordsMsbFirst)
{
    VoltageTrace t;
    t.samples = {0.0, 1e-3, 2e-3, 3e-3};
    BitVec bits = raw_bits_from_trace(t, 2);
    BitVec expected{0, 0, 0, 1, 1, 0, 1, 1};
    EXPECT_EQ(bits, expected);
}

TEST(RawBitsTest, LengthIsSamplesTimesBitsPerSample)
{
    VoltageTrace t;
    t.samples.resize(100000);
    CounterRng rng(3, 9);
    for (std::size_t i = 0; i < t.samples.size(); ++i)
        t.samples[i]
            = static_cast<double>(rng.word_at(i) % 4096) * 2.968e-8;
    BitVec bits = raw_bits_from_trace(t, 16);
    EXPECT_EQ(bits.size(), 100000u * 16u);
}

TEST(RawBitsTest, TooManyLevelsForWordWidthIsAnError)
{
    VoltageTrace t;
    t.samples = {0.0, 1e-3, 2e-3, 3e-3, 4e-3};  // five levels
    try
    {
        raw_bits_from_trace(t, 2);
        FAIL() << "expected domain_error";
    }
    catch (std::domain_error const& e)
    {
        EXPECT_NE(std::string(e.what()).find("bits_per_sample"),
                  std::string::npos);
    }
}

TEST(RawBitsTest, RejectsBadParameters)
{
    VoltageTrace t;
    t.samples = {0.0, 1.0};
    EXPECT_THROW(raw_bits_from_trace(t, 0), std::domain_error);
    EXPECT_THROW(raw_bits_from_trace(t, 65), std::domain_error);
    VoltageTrace empty;
    EXPECT_THROW(raw_bits_from_trace(empty, 8), std::invalid_argument);
}

//---------------------------------------------------------------------------//
// Hex and bitstream files
//---------------------------------------------------------------------------//

TEST(HexTest, RoundTripsBitVectors)
{
    BitVec bits{1, 0, 1, 1, 0, 0, 1, 0, 1};  // 9 bits -> "b28" (padded)
    std::string hex = bits_to_hex(bits);
    EXPECT_EQ(hex, "b28");
    BitVec back = hex_to_bits(hex, bits.size());
    EXPECT_EQ(back, bits);

    BitVec longer = random_bits(1000, 6);
    EXPECT_EQ(hex_to_bits(bits_to_hex(longer), longer.size()), longer);
}

TEST(HexTest, RejectsInvalidDigitsAndShortStrings)
{
    EXPECT_THROW(hex_to_bits("xyz", 4), std::runtime_error);
    EXPECT_THROW(hex_to_bits("ab", 16), std::runtime_error);
}

TEST(BitstreamFileTest, RoundTripWithExtractorMetadata)
{
    ToeplitzSpec spec = make_toeplitz_spec(64, 32, 9);
    BitVec input = random_bits(64 * 5, 8);
    ExtractResult r = toeplitz_extract(input, spec);

    fs::path p = temp_file("stream_meta.bin");
    write_bitstream(p, r.bits, &spec);
    auto file = read_bitstream(p);
    EXPECT_EQ(file.bits, r.bits);
    EXPECT_EQ(file.n, 64u);
    EXPECT_EQ(file.k, 32u);
    EXPECT_EQ(file.seed_bits, spec.seed_bits);
    fs::remove(p);
}

TEST(BitstreamFileTest, RoundTripRawStreamWithoutMetadata)
{
    BitVec bits = random_bits(123, 15);  // non-multiple of 8
    fs::path p = temp_file("stream_raw.bin");
    write_bitstream(p, bits);
    auto file = read_bitstream(p);
    EXPECT_EQ(file.bits, bits);
    EXPECT_EQ(file.n, 0u);
    EXPECT_EQ(file.k, 0u);
    EXPECT_TRUE(file.seed_bits.empty());
    fs::remove(p);
}

TEST(BitstreamFileTest, TruncatedPayloadIsAnError)
{
    BitVec bits = random_bits(256, 21);
    fs::path p = temp_file("stream_trunc.bin");
    write_bitstream(p, bits);
    // Chop the file short.
    auto size = fs::file_size(p);
    fs::resize_file(p, size - 8);
    EXPECT_THROW(read_bitstream(p), std::runtime_error);
    fs::remove(p);
}

}  // namespace
