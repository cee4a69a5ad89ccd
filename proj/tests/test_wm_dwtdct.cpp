#include "markinspect/wm_dwtdct.hpp"

#include "markinspect/corpusgen.hpp"
#include "markinspect/transforms.hpp"
#include "support/testutil.hpp"

#include <doctest.h>

#include <filesystem>

using namespace markinspect;
using namespace markinspect::test;

namespace {

WatermarkPayload demo_payload()
{
    return WatermarkPayload::from_text("TESTMARK0001"); // 96 bits
}

PayloadRegistry demo_registry()
{
    PayloadRegistry reg;
    reg.entries.push_back({ "testmark", demo_payload() });
    reg.entries.push_back({ "othermark", WatermarkPayload::from_text("OTHERMARK002") });
    return reg;
}

} // namespace

TEST_CASE("roundtrip extraction has zero bit errors")
{
    std::mt19937_64 rng(41);
    const WatermarkPayload payload = demo_payload();
    const DwtDctParams params;

    SUBCASE("random 256x256 RGB")
    {
        RasterImage img = random_image(rng, 256, 256, Channels::Rgb);
        RasterImage marked = dwtdct_embed(img, payload, params);
        ExtractedBits bits = dwtdct_extract_bits(marked, params, payload.bit_count());
        CHECK(hamming_fraction(bits, payload) == 0.0);
    }

    SUBCASE("gradient 96x96 gray")
    {
        RasterImage img = gradient_image(96, 96, Channels::Gray);
        RasterImage marked = dwtdct_embed(img, payload, params);
        ExtractedBits bits = dwtdct_extract_bits(marked, params, payload.bit_count());
        CHECK(hamming_fraction(bits, payload) == 0.0);
    }

    SUBCASE("odd dimensions use the cropped interior")
    {
        RasterImage img = random_image(rng, 131, 97, Channels::Rgb);
        RasterImage marked = dwtdct_embed(img, payload, params);
        ExtractedBits bits = dwtdct_extract_bits(marked, params, payload.bit_count());
        CHECK(hamming_fraction(bits, payload) == 0.0);
    }
}

TEST_CASE("images without enough carrier blocks are rejected")
{
    RasterImage img = RasterImage::blank(16, 16, Channels::Rgb, 128);
    try {
        dwtdct_embed(img, demo_payload(), {});
        FAIL("expected ImageTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ImageTooSmall);
        CHECK(std::string(e.what()).find("96") != std::string::npos);
    }
    CHECK(dwtdct_block_count(16, 16, {}) == 4);
    CHECK(dwtdct_block_count(80, 80, {}) == 100);
}

TEST_CASE("marked images stay above the PSNR floor over a 20-image corpus")
{
    DwtDctParams at_spec_delta;
    at_spec_delta.delta = 8.0;
    const DwtDctParams at_default;
    for (int i = 0; i < 20; ++i) {
        RasterImage img = synthesize_fixture_image(4242, i, 256, 256);
        CHECK(psnr(img, dwtdct_embed(img, demo_payload(), at_spec_delta)) >= 38.0);
        CHECK(psnr(img, dwtdct_embed(img, demo_payload(), at_default)) >= 38.0);
    }
}

TEST_CASE("marked coefficients sit on their coset points")
{
    std::mt19937_64 rng(45);
    DwtDctParams params;
    RasterImage img = random_image(rng, 96, 96, Channels::Rgb, 16, 240);
    const WatermarkPayload payload = demo_payload();
    RasterImage marked = dwtdct_embed(img, payload, params);

    // Re-analyze the rounded result: residual distance to the embedded coset
    // must be far below the decision boundary delta/4.
    Plane luma = rgb_to_luma(marked);
    EvenCrop cropped = crop_even(luma);
    SubbandSet s = haar_dwt2_forward(cropped.plane);
    const int bx = s.ll.width / 4;
    const int by = s.ll.height / 4;
    std::vector<double> block(16), coeffs(16);
    for (int b = 0; b < bx * by; ++b) {
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
                block[static_cast<size_t>(y) * 4 + x] = s.ll.at((b / bx) * 4 + y, (b % bx) * 4 + x);
        dct2_forward_raw(block.data(), coeffs.data(), 4);
        const double q = coeffs[params.coeff_row * 4 + params.coeff_col];
        const bool bit = payload.bit(b % payload.bit_count());
        const double offset = bit ? 0.5 : 0.0;
        const double coset = params.delta * (std::round(q / params.delta - offset) + offset);
        CHECK(std::abs(q - coset) <= params.delta / 4.0);
    }
}

TEST_CASE("null distribution on unmarked images is centered")
{
    std::mt19937_64 rng(47);
    const WatermarkPayload payload = demo_payload();
    const DwtDctParams params;
    double sum = 0.0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        RasterImage img = random_image(rng, 96, 96, Channels::Gray);
        ExtractedBits bits = dwtdct_extract_bits(img, params, payload.bit_count());
        sum += hamming_fraction(bits, payload);
    }
    const double mean = sum / trials;
    CHECK(mean >= 0.4);
    CHECK(mean <= 0.6);
}

TEST_CASE("detection against a registry")
{
    std::mt19937_64 rng(49);
    PayloadRegistry reg = demo_registry();
    DwtDctParams params;

    SUBCASE("marked image matches its entry at distance zero")
    {
        RasterImage img = random_image(rng, 128, 128, Channels::Rgb);
        RasterImage marked = dwtdct_embed(img, demo_payload(), params);
        DetectionResult r = dwtdct_detect(marked, reg, params);
        CHECK(r.detected);
        CHECK(r.label == "testmark");
        CHECK(r.distance_fraction == 0.0);
    }

    SUBCASE("clean noise image stays undetected near 0.5")
    {
        RasterImage img = random_image(rng, 128, 128, Channels::Rgb);
        DetectionResult r = dwtdct_detect(img, reg, params);
        CHECK_FALSE(r.detected);
        CHECK(r.distance_fraction >= 0.25);
        CHECK(r.label.empty());
    }

    SUBCASE("mark survives a lossless PNG cycle")
    {
        RasterImage img = random_image(rng, 128, 128, Channels::Rgb);
        RasterImage marked = dwtdct_embed(img, demo_payload(), params);
        RasterImage back = decode_raster(encode_raster(marked, ImageFormat::Png));
        DetectionResult r = dwtdct_detect(back, reg, params);
        CHECK(r.detected);
        CHECK(r.distance_fraction == 0.0);
    }

    SUBCASE("empty registry is an error")
    {
        PayloadRegistry empty;
        RasterImage img = gradient_image(96, 96);
        try {
            dwtdct_detect(img, empty, params);
            FAIL("expected EmptyRegistry");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::EmptyRegistry);
        }
    }
}

TEST_CASE("detection after JPEG 85 stays within the match threshold")
{
    std::mt19937_64 rng(51);
    PayloadRegistry reg = demo_registry();
    DwtDctParams params;
    RasterImage img = gradient_image(256, 256);
    RasterImage marked = dwtdct_embed(img, demo_payload(), params);
    RasterImage attacked = decode_raster(encode_raster(marked, ImageFormat::Jpeg, 85));
    DetectionResult r = dwtdct_detect(attacked, reg, params);
    CHECK(r.detected);
    CHECK(r.label == "testmark");
    CHECK(r.distance_fraction <= 0.20);
}

TEST_CASE("chroma differences move only by rounding")
{
    std::mt19937_64 rng(53);
    RasterImage img = random_image(rng, 96, 96, Channels::Rgb, 30, 220);
    RasterImage marked = dwtdct_embed(img, demo_payload(), {});
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int before = static_cast<int>(img.sample(y, x, 0)) - img.sample(y, x, 1);
            const int after = static_cast<int>(marked.sample(y, x, 0)) - marked.sample(y, x, 1);
            CHECK(std::abs(after - before) <= 1);
        }
}

TEST_CASE("payload and registry plumbing")
{
    CHECK(WatermarkPayload::from_hex("54455354").bytes == Bytes { 'T', 'E', 'S', 'T' });
    CHECK(demo_payload().bit_count() == 96);
    CHECK(demo_payload().hex() == "544553544d41524b30303031");
    CHECK_THROWS_AS(WatermarkPayload::from_hex(""), Error);
    CHECK_THROWS_AS(WatermarkPayload::from_hex("abc"), Error);

    SUBCASE("save and load roundtrip")
    {
        PayloadRegistry reg = demo_registry();
        const std::string path = (std::filesystem::temp_directory_path()
                                  / "markinspect_registry_test.json").string();
        reg.save(path);
        PayloadRegistry loaded = PayloadRegistry::load(path);
        REQUIRE(loaded.entries.size() == reg.entries.size());
        CHECK(loaded.entries[0].label == "testmark");
        CHECK(loaded.entries[0].payload == demo_payload());
        std::filesystem::remove(path);
    }

    SUBCASE("validation rejects broken registries")
    {
        PayloadRegistry dup;
        dup.entries.push_back({ "same", demo_payload() });
        dup.entries.push_back({ "same", demo_payload() });
        CHECK_THROWS_AS(dup.validate(), Error);

        PayloadRegistry mixed;
        mixed.entries.push_back({ "a", demo_payload() });
        mixed.entries.push_back({ "b", WatermarkPayload::from_text("short") });
        CHECK_THROWS_AS(mixed.validate(), Error);
    }
}

TEST_CASE("invalid parameters are rejected")
{
    DwtDctParams p;
    p.delta = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.coeff_row = 0;
    p.coeff_col = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.coeff_row = 4;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.block_size = 8;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("zero false positives over 200 unmarked images at threshold 0.20")
{
    // Binomial(96, 0.5) puts P(distance <= 19) near 2e-9 per entry, so four
    // entries over 200 images stay far below one expected false match.
    PayloadRegistry reg;
    reg.entries.push_back({ "a", WatermarkPayload::from_text("Aurora-0xA7!") });
    reg.entries.push_back({ "b", WatermarkPayload::from_text("pixel#Smith4") });
    reg.entries.push_back({ "c", WatermarkPayload::from_text("FIGMENT_v2_9") });
    reg.entries.push_back({ "d", WatermarkPayload::from_text("novaDRAW+513") });

    std::mt19937_64 rng(55);
    int detections = 0;
    for (int i = 0; i < 200; ++i) {
        RasterImage img = i % 2 == 0 ? random_image(rng, 96, 96, Channels::Rgb)
                                     : textured_image(rng, 96, 96);
        if (dwtdct_detect(img, reg, {}).detected)
            ++detections;
    }
    CHECK(detections == 0);
}
