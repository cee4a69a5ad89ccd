#include "markinspect/scanner.hpp"

#include "markinspect/corpusgen.hpp"
#include "markinspect/wm_lsb.hpp"
#include "support/survey_fixture.hpp"
#include "support/testutil.hpp"

#include <doctest.h>

#include <filesystem>

using namespace markinspect;
using namespace markinspect::test;

namespace {

PayloadRegistry scan_registry()
{
    PayloadRegistry reg;
    reg.entries.push_back({ "scanmark", WatermarkPayload::from_text("SCANMARK-001") });
    return reg;
}

bool has_technique(const ProvenanceReport& r, Technique t)
{
    for (const auto& f : r.techniques_found)
        if (f.technique == t)
            return true;
    return false;
}

} // namespace

TEST_CASE("technique names roundtrip")
{
    for (Technique t : { Technique::Metadata, Technique::C2paManifest,
                         Technique::C2paHardBindingValid, Technique::InvisibleWatermark,
                         Technique::FingerprintMatch, Technique::LsbPayload })
        CHECK(technique_from_name(technique_name(t)) == t);
    CHECK_FALSE(technique_from_name("nope").has_value());
}

TEST_CASE("scan identifies each marking in isolation")
{
    std::mt19937_64 rng(301);
    PayloadRegistry registry = scan_registry();
    RegistryStore fingerprints = RegistryStore::in_memory();

    SUBCASE("clean image has no findings")
    {
        FileBlob blob = encode_raster(textured_image(rng, 128, 128), ImageFormat::Png);
        ProvenanceReport r = scan_image(blob, "clean", registry, fingerprints);
        CHECK_FALSE(r.machine_readable_marking);
        CHECK(r.techniques_found.empty());
        CHECK_FALSE(r.visible_disclosure.has_value());
        CHECK(r.detector_details.size() == 5);
        for (const auto& [name, detail] : r.detector_details.items())
            CHECK(detail.at("status") == "ok");
    }

    SUBCASE("metadata declaration only")
    {
        FileBlob blob = encode_raster(textured_image(rng, 128, 128), ImageFormat::Png);
        FileBlob marked = embed_ai_metadata(blob, { "ScannerTool" });
        ProvenanceReport r = scan_image(marked, "meta", registry, fingerprints);
        CHECK(r.machine_readable_marking);
        REQUIRE(r.techniques_found.size() == 1);
        CHECK(r.techniques_found[0].technique == Technique::Metadata);
    }

    SUBCASE("invisible watermark with label")
    {
        RasterImage img = textured_image(rng, 128, 128);
        RasterImage marked = dwtdct_embed(img, registry.entries[0].payload, {});
        FileBlob blob = encode_raster(marked, ImageFormat::Png);
        ProvenanceReport r = scan_image(blob, "wm", registry, fingerprints);
        REQUIRE(has_technique(r, Technique::InvisibleWatermark));
        for (const auto& f : r.techniques_found)
            if (f.technique == Technique::InvisibleWatermark)
                CHECK(f.label == "scanmark");
    }

    SUBCASE("lsb payload")
    {
        RasterImage img = textured_image(rng, 96, 96);
        Bytes payload = { 'i', 'd', '9' };
        FileBlob blob = encode_raster(lsb_embed(img, ByteSpan(payload)), ImageFormat::Png);
        ProvenanceReport r = scan_image(blob, "lsb", registry, fingerprints);
        CHECK(has_technique(r, Technique::LsbPayload));
        CHECK(r.detector_details["lsb"]["payload"] == "id9");
    }

    SUBCASE("c2pa manifest and hard binding")
    {
        FileBlob blob = encode_raster(textured_image(rng, 96, 96), ImageFormat::Png);
        FileBlob marked = embed_fixture_manifest(blob);
        ProvenanceReport r = scan_image(marked, "c2pa", registry, fingerprints);
        CHECK(has_technique(r, Technique::C2paManifest));
        CHECK(has_technique(r, Technique::C2paHardBindingValid));
        CHECK(has_technique(r, Technique::Metadata)); // R2: pointer is a declaration
    }

    SUBCASE("fingerprint match")
    {
        RasterImage img = textured_image(rng, 128, 128);
        register_fingerprint(fingerprints, img, "known-img");
        FileBlob blob = encode_raster(img, ImageFormat::Png);
        ProvenanceReport r = scan_image(blob, "fp", registry, fingerprints);
        REQUIRE(has_technique(r, Technique::FingerprintMatch));
        CHECK(r.detector_details["fingerprint"]["distance"] == 0);
    }
}

TEST_CASE("pixel-carried mark survives metadata stripping in a scan")
{
    std::mt19937_64 rng(303);
    PayloadRegistry registry = scan_registry();
    RegistryStore fingerprints = RegistryStore::in_memory();

    RasterImage img = textured_image(rng, 128, 128);
    RasterImage marked = dwtdct_embed(img, registry.entries[0].payload, {});
    FileBlob blob = encode_raster(marked, ImageFormat::Png);
    FileBlob with_meta = embed_ai_metadata(blob, { "ToolZ" });
    FileBlob stripped = strip_metadata(with_meta);

    ProvenanceReport r = scan_image(stripped, "stripped", registry, fingerprints);
    CHECK(has_technique(r, Technique::InvisibleWatermark));
    CHECK_FALSE(has_technique(r, Technique::Metadata));
    CHECK_FALSE(has_technique(r, Technique::C2paManifest));
}

TEST_CASE("detector failures are recorded, never thrown")
{
    PayloadRegistry registry = scan_registry();
    RegistryStore fingerprints = RegistryStore::in_memory();

    Bytes truncated = encode_raster(gradient_image(32, 32), ImageFormat::Jpeg, 90).bytes;
    truncated.resize(truncated.size() / 3);
    FileBlob blob = FileBlob::from_bytes(truncated);

    ProvenanceReport r = scan_image(blob, "broken", registry, fingerprints);
    CHECK_FALSE(r.machine_readable_marking);
    int errors = 0;
    for (const auto& [name, detail] : r.detector_details.items())
        errors += detail.at("status") == "error";
    CHECK(errors >= 3); // container parse and all pixel detectors
}

TEST_CASE("plug-in detectors extend the scan")
{
    std::mt19937_64 rng(305);
    PayloadRegistry registry = scan_registry();
    RegistryStore fingerprints = RegistryStore::in_memory();

    ScanOptions options;
    options.plugins.push_back(
        { "vendor_neural", [](const FileBlob&) {
             return DetectionResult { true, "vendor-v2", 0.05 };
         } });

    FileBlob blob = encode_raster(textured_image(rng, 96, 96), ImageFormat::Png);
    ProvenanceReport r = scan_image(blob, "plugin", registry, fingerprints, options);
    REQUIRE(has_technique(r, Technique::InvisibleWatermark));
    CHECK(r.detector_details["vendor_neural"]["label"] == "vendor-v2");
}

TEST_CASE("aggregation reproduces the reference survey numbers")
{
    SurveyFixture fx = make_survey_fixture();
    CorpusSummary summary = aggregate_corpus(fx.reports, fx.annotations);

    CHECK(summary.n_images == 50);
    CHECK(summary.n_machine_readable == 19);
    CHECK(summary.pct_machine_readable == 38);
    CHECK(summary.n_visible == 9);
    CHECK(summary.pct_visible == 18);
    CHECK(summary.technique_counts["metadata"] == 12);
    CHECK(summary.technique_counts["c2pa_manifest"] == 5);
    CHECK(summary.technique_counts["c2pa_hard_binding_valid"] == 4);
    CHECK(summary.technique_counts["invisible_watermark"] == 8);

    int annotated = 0;
    for (const auto& [cat, group] : summary.by_deployment_category)
        annotated += group.n;
    CHECK(annotated == 50);

    const std::string md = render_summary_markdown(summary);
    CHECK(md.find("machine-readable: 19/50 (38%)") != std::string::npos);
    CHECK(md.find("visible disclosure: 9/50 (18%)") != std::string::npos);
}

TEST_CASE("percentage rounding is half-up")
{
    CHECK(round_half_up_percent(1, 3) == 33);
    CHECK(round_half_up_percent(2, 3) == 67);
    CHECK(round_half_up_percent(1, 8) == 13); // 12.5 rounds up
    CHECK(round_half_up_percent(10, 10) == 100);
    CHECK(round_half_up_percent(0, 7) == 0);
    CHECK_THROWS_AS(round_half_up_percent(1, 0), Error);

    std::vector<ProvenanceReport> reports(3);
    for (int i = 0; i < 3; ++i)
        reports[i].image_id = "r" + std::to_string(i);
    reports[0].machine_readable_marking = true;
    reports[0].techniques_found.push_back({ Technique::Metadata, "" });
    CorpusSummary s = aggregate_corpus(reports);
    CHECK(s.pct_machine_readable == 33);

    CHECK_THROWS_AS(aggregate_corpus({}), Error);
}

TEST_CASE("report JSON roundtrips and validates against the schema")
{
    std::mt19937_64 rng(307);
    PayloadRegistry registry = scan_registry();
    RegistryStore fingerprints = RegistryStore::in_memory();

    FileBlob blob = encode_raster(textured_image(rng, 96, 96), ImageFormat::Png);
    FileBlob marked = embed_ai_metadata(blob, { "RoundtripTool" });
    Annotation ann;
    ann.visible_mark = true;
    ann.deployment_category = 2;
    ProvenanceReport r = scan_image(marked, "roundtrip", registry, fingerprints, {}, ann);

    const nlohmann::ordered_json doc = report_to_json(r);
    ProvenanceReport back = report_from_json(doc);
    CHECK(back.image_id == r.image_id);
    CHECK(back.machine_readable_marking == r.machine_readable_marking);
    CHECK(back.techniques_found == r.techniques_found);
    CHECK(back.visible_disclosure == r.visible_disclosure);
    CHECK(report_to_json(back) == doc);

    const nlohmann::json schema
        = nlohmann::json::parse(read_file(std::string(TEST_DOCS_DIR) + "/report-schema.json"));
    validate_against_schema(doc, schema);

    nlohmann::json bad = doc;
    bad.erase("image_id");
    CHECK_THROWS_AS(validate_against_schema(bad, schema), Error);

    nlohmann::json wrong_type = doc;
    wrong_type["machine_readable_marking"] = "yes";
    CHECK_THROWS_AS(validate_against_schema(wrong_type, schema), Error);

    const nlohmann::json summary_schema
        = nlohmann::json::parse(read_file(std::string(TEST_DOCS_DIR) + "/summary-schema.json"));
    SurveyFixture fx = make_survey_fixture();
    validate_against_schema(summary_to_json(aggregate_corpus(fx.reports, fx.annotations)),
                            summary_schema);
}

TEST_CASE("rendering is deterministic")
{
    SurveyFixture fx = make_survey_fixture();
    CorpusSummary summary = aggregate_corpus(fx.reports, fx.annotations);
    CHECK(render_summary_json(summary) == render_summary_json(summary));
    CHECK(render_summary_markdown(summary) == render_summary_markdown(summary));

    ProvenanceReport r = fx.reports[0];
    CHECK(render_report_json(r) == render_report_json(r));
    CHECK(render_report_markdown(r).find("Provenance report") != std::string::npos);
}

TEST_CASE("annotations load from JSON and CSV")
{
    const auto dir = std::filesystem::temp_directory_path();

    const std::string jpath = (dir / "markinspect_ann.json").string();
    const std::string jtext = R"({"img_a": {"visible_mark": true, "deployment_category": 3,
        "provider_name": "P", "provider_country": "NL", "model_name": "m"}})";
    write_file(jpath, ByteSpan(reinterpret_cast<const uint8_t*>(jtext.data()), jtext.size()));
    CorpusAnnotations ja = load_annotations(jpath);
    REQUIRE(ja.count("img_a") == 1);
    CHECK(ja["img_a"].visible_mark);
    CHECK(ja["img_a"].deployment_category == 3);
    CHECK(ja["img_a"].provider_country == "NL");
    std::filesystem::remove(jpath);

    const std::string cpath = (dir / "markinspect_ann.csv").string();
    const std::string ctext = "image_id,visible_mark,deployment_category,provider_name,"
                              "provider_country,model_name\nimg_b,true,2,Prov,US,\n";
    write_file(cpath, ByteSpan(reinterpret_cast<const uint8_t*>(ctext.data()), ctext.size()));
    CorpusAnnotations ca = load_annotations(cpath);
    REQUIRE(ca.count("img_b") == 1);
    CHECK(ca["img_b"].deployment_category == 2);
    CHECK(ca["img_b"].model_name.empty());
    std::filesystem::remove(cpath);

    const std::string bad = (dir / "markinspect_bad.json").string();
    const std::string btext = R"({"x": {"visible_mark": true, "deployment_category": 9}})";
    write_file(bad, ByteSpan(reinterpret_cast<const uint8_t*>(btext.data()), btext.size()));
    CHECK_THROWS_AS(load_annotations(bad), Error);
    std::filesystem::remove(bad);
}

TEST_CASE("fixture registry entries are mutually well separated")
{
    PayloadRegistry reg = fixture_registry();
    for (size_t i = 0; i < reg.entries.size(); ++i)
        for (size_t j = i + 1; j < reg.entries.size(); ++j) {
            size_t d = 0;
            for (size_t bit = 0; bit < reg.entries[i].payload.bit_count(); ++bit)
                d += reg.entries[i].payload.bit(bit) != reg.entries[j].payload.bit(bit);
            INFO(reg.entries[i].label, " vs ", reg.entries[j].label);
            CHECK(d >= 24); // > threshold distance, so labels cannot be confused
        }
}

TEST_CASE("fixture corpus generation and end-to-end scan")
{
    const std::string dir
        = (std::filesystem::temp_directory_path() / "markinspect_corpus_test").string();
    std::filesystem::remove_all(dir);

    FixtureSpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.groups = { { 4, { "dwtdct" }, "png" },
                    { 2, { "lsb" }, "png" },
                    { 2, { "metadata" }, "png" },
                    { 2, { "c2pa" }, "jpeg" },
                    { 2, { "fingerprint" }, "png" },
                    { 4, {}, "png" } };
    FixtureCorpus corpus = generate_fixture_corpus(spec, 11, dir);
    REQUIRE(corpus.images.size() == 16);

    SUBCASE("spec echo: marked counts match the request")
    {
        int dwtdct = 0;
        for (const auto& t : corpus.images)
            dwtdct += std::find(t.markings.begin(), t.markings.end(), "dwtdct")
                != t.markings.end();
        CHECK(dwtdct == 4);
        std::vector<FixtureImageTruth> loaded = load_ground_truth(corpus.ground_truth_path);
        CHECK(loaded.size() == corpus.images.size());
    }

    SUBCASE("regeneration with the same seed is byte-identical")
    {
        const Bytes truth_a = read_file(corpus.ground_truth_path);
        const Bytes image_a = read_file(dir + "/" + corpus.images[0].file);
        const Bytes prints_a = read_file(corpus.fingerprints_path);
        generate_fixture_corpus(spec, 11, dir);
        CHECK(read_file(corpus.ground_truth_path) == truth_a);
        CHECK(read_file(dir + "/" + corpus.images[0].file) == image_a);
        CHECK(read_file(corpus.fingerprints_path) == prints_a);

        generate_fixture_corpus(spec, 12, dir);
        CHECK(read_file(corpus.ground_truth_path) != truth_a);
    }

    SUBCASE("scanning the corpus reproduces ground truth exactly")
    {
        PayloadRegistry registry = PayloadRegistry::load(corpus.registry_path);
        RegistryStore fingerprints = RegistryStore::open(corpus.fingerprints_path);
        CorpusAnnotations annotations = load_annotations(corpus.annotations_path);

        for (const auto& truth : corpus.images) {
            FileBlob blob = FileBlob::from_file(dir + "/" + truth.file);
            const auto ann = annotations.find(truth.id);
            REQUIRE(ann != annotations.end());
            ProvenanceReport r = scan_image(blob, truth.id, registry, fingerprints, {},
                                            ann->second);

            std::vector<std::string> found;
            for (const auto& f : r.techniques_found) {
                switch (f.technique) {
                case Technique::Metadata: found.push_back("metadata"); break;
                case Technique::C2paManifest: found.push_back("c2pa"); break;
                case Technique::InvisibleWatermark: found.push_back("dwtdct"); break;
                case Technique::FingerprintMatch: found.push_back("fingerprint"); break;
                case Technique::LsbPayload: found.push_back("lsb"); break;
                case Technique::C2paHardBindingValid: break; // folded into c2pa
                }
            }
            std::sort(found.begin(), found.end());
            found.erase(std::unique(found.begin(), found.end()), found.end());

            std::vector<std::string> expected = truth.markings;
            // a c2pa manifest pointer also satisfies the metadata classifier (R2)
            if (std::find(expected.begin(), expected.end(), "c2pa") != expected.end()
                && std::find(expected.begin(), expected.end(), "metadata") == expected.end())
                expected.push_back("metadata");
            std::sort(expected.begin(), expected.end());

            INFO("image ", truth.id);
            CHECK(found == expected);
        }
    }

    SUBCASE("spec validation rejects broken groups")
    {
        FixtureSpec bad;
        bad.groups = { { 1, { "lsb" }, "jpeg" } };
        CHECK_THROWS_AS(bad.validate(), Error);
        FixtureSpec unknown;
        unknown.groups = { { 1, { "hologram" }, "png" } };
        CHECK_THROWS_AS(unknown.validate(), Error);
    }

    std::filesystem::remove_all(dir);
}

TEST_CASE("a twenty-image half-marked spec echoes ten marked images")
{
    const std::string dir
        = (std::filesystem::temp_directory_path() / "markinspect_half_corpus").string();
    std::filesystem::remove_all(dir);
    FixtureSpec spec;
    spec.groups = { { 10, { "dwtdct" }, "png" }, { 10, {}, "png" } };
    FixtureCorpus corpus = generate_fixture_corpus(spec, 21, dir);
    int marked = 0;
    for (const auto& t : load_ground_truth(corpus.ground_truth_path))
        marked += !t.markings.empty();
    CHECK(marked == 10);
    CHECK(corpus.images.size() == 20);
    std::filesystem::remove_all(dir);
}

TEST_CASE("a broken image inside a corpus scan never aborts the run")
{
    std::mt19937_64 rng(309);
    PayloadRegistry registry = fixture_registry();
    RegistryStore fingerprints = RegistryStore::in_memory();

    std::vector<ProvenanceReport> reports;
    FileBlob good = encode_raster(textured_image(rng, 96, 96), ImageFormat::Png);
    Bytes broken_bytes = good.bytes;
    broken_bytes.resize(broken_bytes.size() / 2);

    reports.push_back(scan_image(good, "good", registry, fingerprints));
    reports.push_back(scan_image(FileBlob::from_bytes(broken_bytes), "broken", registry,
                                 fingerprints));
    CorpusSummary summary = aggregate_corpus(reports);
    CHECK(summary.n_images == 2);
    CHECK_FALSE(reports[1].machine_readable_marking);
}
