#include "markinspect/transforms.hpp"

#include "support/testutil.hpp"

#include <doctest.h>

#include <cstring>

using namespace markinspect;
using namespace markinspect::test;

namespace {

double max_abs_diff(const Plane& a, const Plane& b)
{
    REQUIRE(a.width == b.width);
    REQUIRE(a.height == b.height);
    double m = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i)
        m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

} // namespace

TEST_CASE("constant plane has all energy in LL")
{
    Plane p(4, 4);
    for (auto& v : p.v)
        v = 10.0;
    SubbandSet s = haar_dwt2_forward(p);
    for (double v : s.ll.v)
        CHECK(v == doctest::Approx(20.0).epsilon(1e-12));
    for (const Plane* band : { &s.lh, &s.hl, &s.hh })
        for (double v : band->v)
            CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Haar DWT perfect reconstruction on random planes")
{
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        Plane p = random_plane(rng, 8, 8);
        Plane back = haar_dwt2_inverse(haar_dwt2_forward(p));
        CHECK(max_abs_diff(p, back) <= 1e-9);
    }
}

TEST_CASE("Haar DWT preserves energy (Parseval)")
{
    std::mt19937_64 rng(103);
    Plane p = random_plane(rng, 16, 16);
    SubbandSet s = haar_dwt2_forward(p);

    // brute-force energy sums
    double in = 0.0;
    for (double v : p.v)
        in += v * v;
    double out = 0.0;
    for (const Plane* band : { &s.ll, &s.lh, &s.hl, &s.hh })
        for (double v : band->v)
            out += v * v;
    CHECK(std::abs(in - out) <= 1e-6 * std::max(1.0, in));
}

TEST_CASE("Haar DWT rejects odd and empty planes")
{
    CHECK_THROWS_AS(haar_dwt2_forward(Plane()), Error);
    Plane odd(5, 4);
    try {
        haar_dwt2_forward(odd);
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DimensionMismatch);
    }
}

TEST_CASE("inverse of zero subbands is the zero plane")
{
    SubbandSet s { Plane(3, 3), Plane(3, 3), Plane(3, 3), Plane(3, 3) };
    Plane out = haar_dwt2_inverse(s);
    CHECK(out.width == 6);
    CHECK(out.height == 6);
    for (double v : out.v)
        CHECK(v == 0.0);
}

TEST_CASE("forward after inverse is the identity on random subbands")
{
    std::mt19937_64 rng(107);
    SubbandSet s { random_plane(rng, 6, 4, -50, 50), random_plane(rng, 6, 4, -50, 50),
                   random_plane(rng, 6, 4, -50, 50), random_plane(rng, 6, 4, -50, 50) };
    SubbandSet back = haar_dwt2_forward(haar_dwt2_inverse(s));
    CHECK(max_abs_diff(s.ll, back.ll) <= 1e-9);
    CHECK(max_abs_diff(s.lh, back.lh) <= 1e-9);
    CHECK(max_abs_diff(s.hl, back.hl) <= 1e-9);
    CHECK(max_abs_diff(s.hh, back.hh) <= 1e-9);
}

TEST_CASE("mismatched subband sizes raise DimensionMismatch")
{
    SubbandSet s { Plane(3, 3), Plane(3, 3), Plane(2, 3), Plane(3, 3) };
    try {
        haar_dwt2_inverse(s);
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DimensionMismatch);
    }
}

TEST_CASE("DCT of a constant block is a pure DC term")
{
    Plane p(4, 4);
    for (auto& v : p.v)
        v = 5.0;
    Plane c = dct2_block_forward(p);
    CHECK(c.at(0, 0) == doctest::Approx(20.0).epsilon(1e-12));
    for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v)
            if (u || v)
                CHECK(std::abs(c.at(u, v)) <= 1e-12);
}

TEST_CASE("DC-only coefficients invert to a constant block")
{
    Plane c(4, 4);
    c.at(0, 0) = 20.0;
    Plane p = dct2_block_inverse(c);
    for (double v : p.v)
        CHECK(v == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("DCT roundtrip identity within 1e-9")
{
    std::mt19937_64 rng(109);
    for (int n : { 4, 8 }) {
        Plane p = random_plane(rng, n, n, -100, 100);
        Plane back = dct2_block_inverse(dct2_block_forward(p));
        CHECK(max_abs_diff(p, back) <= 1e-9);
    }
}

TEST_CASE("DCT preserves energy on random 8x8 blocks")
{
    std::mt19937_64 rng(111);
    Plane p = random_plane(rng, 8, 8, -100, 100);
    Plane c = dct2_block_forward(p);
    CHECK(std::abs(plane_energy(p) - plane_energy(c)) <= 1e-6 * std::max(1.0, plane_energy(p)));
}

TEST_CASE("single AC impulse reproduces the cosine basis vector")
{
    for (int n : { 4, 8 }) {
        for (auto [u, v] : { std::pair { 1, 0 }, std::pair { 2, 1 }, std::pair { n - 1, n - 1 } }) {
            Plane c(n, n);
            c.at(u, v) = 1.0;
            Plane direct = naive_idct2(c);
            Plane fast = dct2_block_inverse(c);
            CHECK(max_abs_diff(direct, fast) <= 1e-9);
        }
    }
}

TEST_CASE("production DCT matches the naive oracle on random blocks")
{
    std::mt19937_64 rng(113);
    for (int n : { 4, 8 }) {
        Plane p = random_plane(rng, n, n, -50, 50);
        CHECK(max_abs_diff(dct2_block_forward(p), naive_dct2(p)) <= 1e-9);
    }
}

TEST_CASE("unsupported block sizes are rejected")
{
    for (int n : { 1, 3, 5, 16 }) {
        Plane p(n, n);
        try {
            dct2_block_forward(p);
            FAIL("expected BadBlockSize");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::BadBlockSize);
        }
    }
    Plane rect(4, 8);
    CHECK_THROWS_AS(dct2_block_forward(rect), Error);
}

TEST_CASE("both transforms are linear")
{
    std::mt19937_64 rng(117);
    const double alpha = 2.5, beta = -1.25;

    Plane x = random_plane(rng, 8, 8, -10, 10);
    Plane y = random_plane(rng, 8, 8, -10, 10);
    Plane combo(8, 8);
    for (size_t i = 0; i < combo.v.size(); ++i)
        combo.v[i] = alpha * x.v[i] + beta * y.v[i];

    SUBCASE("DCT")
    {
        Plane tx = dct2_block_forward(x);
        Plane ty = dct2_block_forward(y);
        Plane tc = dct2_block_forward(combo);
        for (size_t i = 0; i < tc.v.size(); ++i)
            CHECK(std::abs(tc.v[i] - (alpha * tx.v[i] + beta * ty.v[i])) <= 1e-9);
    }

    SUBCASE("DWT")
    {
        SubbandSet tx = haar_dwt2_forward(x);
        SubbandSet ty = haar_dwt2_forward(y);
        SubbandSet tc = haar_dwt2_forward(combo);
        for (size_t i = 0; i < tc.ll.v.size(); ++i) {
            CHECK(std::abs(tc.ll.v[i] - (alpha * tx.ll.v[i] + beta * ty.ll.v[i])) <= 1e-9);
            CHECK(std::abs(tc.hh.v[i] - (alpha * tx.hh.v[i] + beta * ty.hh.v[i])) <= 1e-9);
        }
    }
}

TEST_CASE("transforms are deterministic across invocations")
{
    std::mt19937_64 rng(119);
    Plane p = random_plane(rng, 8, 8);
    Plane a = dct2_block_forward(p);
    Plane b = dct2_block_forward(p);
    CHECK(std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0);

    SubbandSet s1 = haar_dwt2_forward(p);
    SubbandSet s2 = haar_dwt2_forward(p);
    CHECK(std::memcmp(s1.ll.v.data(), s2.ll.v.data(), s1.ll.v.size() * sizeof(double)) == 0);
}

TEST_CASE("crop_even trims one trailing row and column at most")
{
    Plane p(5, 7);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 5; ++x)
            p.at(y, x) = y * 10 + x;
    EvenCrop c = crop_even(p);
    CHECK(c.plane.width == 4);
    CHECK(c.plane.height == 6);
    CHECK(c.margin_right == 1);
    CHECK(c.margin_bottom == 1);

    Plane restored = restore_margin(c.plane, p);
    CHECK(max_abs_diff(restored, p) == 0.0);
}
