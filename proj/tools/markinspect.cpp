#include "markinspect/attacks.hpp"
#include "markinspect/corpusgen.hpp"
#include "markinspect/scanner.hpp"
#include "markinspect/version.hpp"
#include "markinspect/wm_lsb.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace markinspect;

namespace {

struct Defaults {
    std::string registry;
    std::string fp_store;
    std::string rules;
    double delta = DwtDctParams().delta;
    double threshold = 0.20;
    int max_distance = kDefaultMaxHashDistance;
};

// MARKINSPECT_CONFIG points at a JSON file with default paths/parameters;
// explicit flags always win.
Defaults load_defaults()
{
    Defaults d;
    const char* path = std::getenv("MARKINSPECT_CONFIG");
    if (!path || !*path)
        return d;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const std::exception& e) {
        raise(Errc::BadParams, std::string("MARKINSPECT_CONFIG: ") + e.what());
    }
    d.registry = doc.value("registry", d.registry);
    d.fp_store = doc.value("fp_store", d.fp_store);
    d.rules = doc.value("rules", d.rules);
    d.delta = doc.value("delta", d.delta);
    d.threshold = doc.value("threshold", d.threshold);
    d.max_distance = doc.value("max_distance", d.max_distance);
    return d;
}

void emit(const std::string& text, const std::string& out_path)
{
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    write_file(out_path, ByteSpan(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

Bytes payload_from_flags(const std::string& hex, const std::string& text)
{
    if (!hex.empty() && !text.empty())
        raise(Errc::BadParams, "--payload-hex and --payload-text are mutually exclusive");
    if (!hex.empty())
        return from_hex(hex);
    return Bytes(text.begin(), text.end());
}

std::vector<std::string> collect_inputs(const std::vector<std::string>& raw)
{
    std::vector<std::string> files;
    for (const auto& item : raw) {
        if (fs::is_directory(item)) {
            std::vector<std::string> dir_files;
            for (const auto& entry : fs::recursive_directory_iterator(item)) {
                if (!entry.is_regular_file())
                    continue;
                const std::string ext = entry.path().extension().string();
                if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
                    dir_files.push_back(entry.path().string());
            }
            std::sort(dir_files.begin(), dir_files.end());
            files.insert(files.end(), dir_files.begin(), dir_files.end());
        } else {
            files.push_back(item);
        }
    }
    if (files.empty())
        raise(Errc::BadParams, "no input images found");
    return files;
}

std::string image_id_for(const std::string& path)
{
    return fs::path(path).stem().string();
}

ImageFormat format_for_output(const std::string& path, ImageFormat fallback)
{
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".png")
        return ImageFormat::Png;
    if (ext == ".jpg" || ext == ".jpeg")
        return ImageFormat::Jpeg;
    return fallback;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "markinspect: embed, detect and audit machine-readable image markings" };
    app.set_version_flag("--version", std::string("markinspect ") + kToolVersion);
    app.require_subcommand(1);

    Defaults defaults;
    try {
        defaults = load_defaults();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    std::function<int()> action;

    // ---- embed -------------------------------------------------------------
    auto* embed = app.add_subcommand("embed", "embed a marking into an image");
    embed->require_subcommand(1);

    {
        auto* lsb = embed->add_subcommand("lsb", "least-significant-bit payload frame");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto hex = std::make_shared<std::string>();
        auto text = std::make_shared<std::string>();
        lsb->add_option("input", *in, "input image")->required()->check(CLI::ExistingFile);
        lsb->add_option("output", *out, "output image")->required();
        lsb->add_option("--payload-hex", *hex, "payload as hex");
        lsb->add_option("--payload-text", *text, "payload as text");
        lsb->callback([=, &action] {
            action = [=] {
                const FileBlob blob = FileBlob::from_file(*in);
                const ImageFormat target = format_for_output(*out, ImageFormat::Png);
                if (target == ImageFormat::Jpeg)
                    raise(Errc::BadParams, "an LSB payload cannot survive JPEG output");
                const RasterImage marked
                    = lsb_embed(decode_raster(blob), ByteSpan(payload_from_flags(*hex, *text)));
                write_file(*out, encode_raster(marked, ImageFormat::Png).span());
                return 0;
            };
        });
    }

    {
        auto* dwtdct = embed->add_subcommand("dwtdct", "transform-domain watermark");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto hex = std::make_shared<std::string>();
        auto text = std::make_shared<std::string>();
        auto delta = std::make_shared<double>(defaults.delta);
        dwtdct->add_option("input", *in)->required()->check(CLI::ExistingFile);
        dwtdct->add_option("output", *out)->required();
        dwtdct->add_option("--payload-hex", *hex, "payload as hex");
        dwtdct->add_option("--payload-text", *text, "payload as text");
        dwtdct->add_option("--delta", *delta, "quantization step");
        dwtdct->callback([=, &action] {
            action = [=] {
                const Bytes payload = payload_from_flags(*hex, *text);
                if (payload.empty())
                    raise(Errc::BadParams, "a payload is required");
                WatermarkPayload wm;
                wm.bytes = payload;
                DwtDctParams params;
                params.delta = *delta;
                const FileBlob blob = FileBlob::from_file(*in);
                const RasterImage marked = dwtdct_embed(decode_raster(blob), wm, params);
                const ImageFormat target = format_for_output(*out, blob.format);
                write_file(*out, encode_raster(marked, target, 95).span());
                return 0;
            };
        });
    }

    {
        auto* meta = embed->add_subcommand("metadata", "XMP AI-origin declaration");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto tool = std::make_shared<std::string>();
        auto source = std::make_shared<std::string>(kTrainedAlgorithmicMedia);
        meta->add_option("input", *in)->required()->check(CLI::ExistingFile);
        meta->add_option("output", *out)->required();
        meta->add_option("--tool", *tool, "creator tool name")->required();
        meta->add_option("--source-type", *source, "digital source type URI");
        meta->callback([=, &action] {
            action = [=] {
                const FileBlob blob = FileBlob::from_file(*in);
                write_file(*out, embed_ai_metadata(blob, { *tool, *source }).span());
                return 0;
            };
        });
    }

    // ---- detect ------------------------------------------------------------
    {
        auto* detect = app.add_subcommand("detect", "match a watermark against a registry");
        auto in = std::make_shared<std::string>();
        auto registry_path = std::make_shared<std::string>(defaults.registry);
        auto delta = std::make_shared<double>(defaults.delta);
        auto threshold = std::make_shared<double>(defaults.threshold);
        detect->add_option("input", *in)->required()->check(CLI::ExistingFile);
        detect->add_option("--registry", *registry_path, "payload registry JSON");
        detect->add_option("--delta", *delta);
        detect->add_option("--threshold", *threshold, "max Hamming distance fraction");
        detect->callback([=, &action] {
            action = [=] {
                if (registry_path->empty())
                    raise(Errc::BadParams, "--registry is required (or set MARKINSPECT_CONFIG)");
                const PayloadRegistry registry
                    = PayloadRegistry::load(*registry_path, *threshold);
                DwtDctParams params;
                params.delta = *delta;
                const DetectionResult r
                    = dwtdct_detect(decode_raster(FileBlob::from_file(*in)), registry, params);
                nlohmann::ordered_json doc;
                doc["detected"] = r.detected;
                if (r.detected)
                    doc["label"] = r.label;
                doc["distance_fraction"] = r.distance_fraction;
                std::cout << doc.dump(2) << "\n";
                return 0;
            };
        });
    }

    // ---- inspect -----------------------------------------------------------
    {
        auto* inspect = app.add_subcommand("inspect", "container layout, metadata and C2PA state");
        auto in = std::make_shared<std::string>();
        auto rules_path = std::make_shared<std::string>(defaults.rules);
        auto out = std::make_shared<std::string>();
        inspect->add_option("input", *in)->required()->check(CLI::ExistingFile);
        inspect->add_option("--rules", *rules_path, "classifier rule config JSON");
        inspect->add_option("--out", *out, "write to file instead of stdout");
        inspect->callback([=, &action] {
            action = [=] {
                const FileBlob blob = FileBlob::from_file(*in);
                const ContainerMap map = parse_containers(blob);

                nlohmann::ordered_json doc;
                doc["file"] = *in;
                doc["format"] = image_format_name(blob.format);
                nlohmann::ordered_json entries = nlohmann::ordered_json::array();
                for (const auto& e : map.entries)
                    entries.push_back({ { "type", e.type_code },
                                        { "offset", e.offset },
                                        { "length", e.length } });
                doc["container"] = std::move(entries);

                nlohmann::ordered_json records = nlohmann::ordered_json::array();
                const std::vector<MetadataRecord> recs = extract_records(blob);
                for (const auto& r : recs)
                    records.push_back({ { "standard", metadata_standard_name(r.standard) },
                                        { "key", r.key },
                                        { "value", r.value } });
                doc["records"] = std::move(records);

                const AiOriginRules rules = rules_path->empty()
                    ? AiOriginRules::defaults()
                    : AiOriginRules::load(*rules_path);
                const AiOriginFinding finding = classify_ai_origin(recs, rules);
                doc["ai_declared"] = finding.is_ai_declared;
                nlohmann::ordered_json matched = nlohmann::ordered_json::array();
                for (const auto& m : finding.matched_rules)
                    matched.push_back({ { "rule", m.rule_id }, { "key", m.record.key } });
                doc["matched_rules"] = std::move(matched);

                const ManifestFinding c2pa = probe_c2pa(blob);
                doc["c2pa"] = { { "present", c2pa.present },
                                { "manifest_labels", c2pa.manifest_labels },
                                { "hard_binding", hard_binding_status_name(c2pa.hard_binding) } };
                emit(doc.dump(2) + "\n", *out);
                return 0;
            };
        });
    }

    // ---- strip -------------------------------------------------------------
    {
        auto* strip = app.add_subcommand("strip", "remove all metadata blocks");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        strip->add_option("input", *in)->required()->check(CLI::ExistingFile);
        strip->add_option("output", *out)->required();
        strip->callback([=, &action] {
            action = [=] {
                write_file(*out, strip_metadata(FileBlob::from_file(*in)).span());
                return 0;
            };
        });
    }

    // ---- attack ------------------------------------------------------------
    {
        auto* attack = app.add_subcommand("attack", "apply a degradation or run the matrix");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto kind = std::make_shared<std::string>();
        auto quality = std::make_shared<int>(85);
        auto scale = std::make_shared<double>(0.5);
        auto fraction = std::make_shared<double>(0.8);
        auto sigma = std::make_shared<double>(5.0);
        auto seed = std::make_shared<uint64_t>(0);
        auto corpus_dir = std::make_shared<std::string>();
        auto grid_path = std::make_shared<std::string>();
        auto out_prefix = std::make_shared<std::string>();
        auto delta = std::make_shared<double>(defaults.delta);
        attack->add_option("input", *in, "input image (single-attack mode)");
        attack->add_option("output", *out, "output image (single-attack mode)");
        attack->add_option("--kind", *kind, "identity|jpeg|resize|crop|noise|strip");
        attack->add_option("--quality", *quality);
        attack->add_option("--scale", *scale);
        attack->add_option("--fraction", *fraction);
        attack->add_option("--sigma", *sigma);
        attack->add_option("--seed", *seed);
        attack->add_option("--matrix-corpus", *corpus_dir,
                           "fixture corpus directory: run the robustness matrix");
        attack->add_option("--attacks", *grid_path, "JSON array of attack objects");
        attack->add_option("--out-prefix", *out_prefix, "matrix output prefix (.csv/.json)");
        attack->callback([=, &action] {
            action = [=] {
                if (!corpus_dir->empty()) {
                    std::vector<Attack> attacks;
                    if (grid_path->empty()) {
                        attacks = { Attack::identity(), Attack::jpeg_reencode(95),
                                    Attack::jpeg_reencode(85), Attack::jpeg_reencode(70),
                                    Attack::jpeg_reencode(50), Attack::metadata_strip(),
                                    Attack::resize(0.5), Attack::center_crop(0.8),
                                    Attack::gaussian_noise(5.0) };
                    } else {
                        const nlohmann::json grid = nlohmann::json::parse(read_file(*grid_path));
                        for (const auto& a : grid)
                            attacks.push_back(Attack::from_json(a.dump()));
                    }

                    const auto truths = load_ground_truth(
                        (fs::path(*corpus_dir) / "ground_truth.json").string());
                    const PayloadRegistry registry = PayloadRegistry::load(
                        (fs::path(*corpus_dir) / "registry.json").string());
                    const RegistryStore fingerprints = RegistryStore::open(
                        (fs::path(*corpus_dir) / "fingerprints.ndjson").string());

                    std::vector<MarkedItem> items;
                    for (const auto& t : truths) {
                        const FileBlob blob
                            = FileBlob::from_file((fs::path(*corpus_dir) / t.file).string());
                        for (const auto& marking : t.markings) {
                            MarkedItem item;
                            item.id = t.id;
                            item.blob = blob;
                            if (marking == "dwtdct") {
                                item.technique = MarkingTechnique::DwtDct;
                                item.payload = WatermarkPayload::from_hex(t.wm_payload_hex);
                                item.expected_label = t.wm_label;
                            } else if (marking == "lsb") {
                                item.technique = MarkingTechnique::Lsb;
                                item.lsb_payload = from_hex(t.lsb_payload_hex);
                            } else if (marking == "metadata") {
                                item.technique = MarkingTechnique::Metadata;
                            } else if (marking == "c2pa") {
                                item.technique = MarkingTechnique::C2pa;
                            } else if (marking == "fingerprint") {
                                item.technique = MarkingTechnique::Fingerprint;
                                item.expected_label = t.fp_label;
                                item.fingerprint_bits
                                    = compute_phash(decode_raster(blob));
                            } else {
                                continue;
                            }
                            items.push_back(std::move(item));
                        }
                    }

                    DwtDctParams params;
                    params.delta = *delta;
                    const RobustnessMatrix matrix = run_robustness_matrix(
                        items, attacks, registry, fingerprints, params, *seed);
                    const std::string prefix
                        = out_prefix->empty() ? "robustness_matrix" : *out_prefix;
                    const std::string csv = matrix.to_csv();
                    const std::string json = matrix.to_json();
                    write_file(prefix + ".csv",
                               ByteSpan(reinterpret_cast<const uint8_t*>(csv.data()), csv.size()));
                    write_file(prefix + ".json",
                               ByteSpan(reinterpret_cast<const uint8_t*>(json.data()),
                                        json.size()));
                    std::cerr << "matrix written to " << prefix << ".{csv,json}\n";
                    return 0;
                }

                if (in->empty() || out->empty() || kind->empty())
                    raise(Errc::BadParams,
                          "single-attack mode needs input, output and --kind");
                Attack a;
                if (*kind == "identity")
                    a = Attack::identity();
                else if (*kind == "jpeg")
                    a = Attack::jpeg_reencode(*quality);
                else if (*kind == "resize")
                    a = Attack::resize(*scale);
                else if (*kind == "crop")
                    a = Attack::center_crop(*fraction);
                else if (*kind == "noise")
                    a = Attack::gaussian_noise(*sigma);
                else if (*kind == "strip")
                    a = Attack::metadata_strip();
                else
                    raise(Errc::BadParams, "unknown attack kind \"" + *kind + "\"");
                write_file(*out, apply_attack(FileBlob::from_file(*in), a, *seed).span());
                return 0;
            };
        });
    }

    // ---- scan --------------------------------------------------------------
    {
        auto* scan = app.add_subcommand("scan", "run every detector over images or directories");
        auto inputs = std::make_shared<std::vector<std::string>>();
        auto registry_path = std::make_shared<std::string>(defaults.registry);
        auto fp_path = std::make_shared<std::string>(defaults.fp_store);
        auto rules_path = std::make_shared<std::string>(defaults.rules);
        auto annotations_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("json");
        auto jobs = std::make_shared<int>(1);
        auto delta = std::make_shared<double>(defaults.delta);
        auto threshold = std::make_shared<double>(defaults.threshold);
        auto max_distance = std::make_shared<int>(defaults.max_distance);
        scan->add_option("inputs", *inputs, "image files or directories")->required();
        scan->add_option("--registry", *registry_path);
        scan->add_option("--fp-store", *fp_path);
        scan->add_option("--rules", *rules_path);
        scan->add_option("--annotations", *annotations_path, "JSON/CSV sidecar");
        scan->add_option("--out", *out);
        scan->add_option("--format", *format)->check(CLI::IsMember({ "json", "md" }));
        scan->add_option("--jobs", *jobs)->check(CLI::Range(1, 64));
        scan->add_option("--delta", *delta);
        scan->add_option("--threshold", *threshold);
        scan->add_option("--max-distance", *max_distance);
        scan->callback([=, &action] {
            action = [=] {
                const std::vector<std::string> files = collect_inputs(*inputs);

                PayloadRegistry registry;
                if (!registry_path->empty())
                    registry = PayloadRegistry::load(*registry_path, *threshold);
                else
                    registry = fixture_registry();
                registry.match_threshold = *threshold;

                RegistryStore fingerprints = fp_path->empty()
                    ? RegistryStore::in_memory()
                    : RegistryStore::open(*fp_path);

                ScanOptions options;
                options.dwtdct_params.delta = *delta;
                options.fingerprint_max_distance = *max_distance;
                if (!rules_path->empty())
                    options.rules = AiOriginRules::load(*rules_path);

                CorpusAnnotations annotations;
                if (!annotations_path->empty())
                    annotations = load_annotations(*annotations_path);

                std::vector<ProvenanceReport> reports(files.size());
                std::atomic<size_t> next { 0 };
                auto worker = [&] {
                    while (true) {
                        const size_t i = next.fetch_add(1);
                        if (i >= files.size())
                            return;
                        const std::string id = image_id_for(files[i]);
                        std::optional<Annotation> ann;
                        const auto it = annotations.find(id);
                        if (it != annotations.end())
                            ann = it->second;
                        try {
                            reports[i] = scan_image(FileBlob::from_file(files[i]), id, registry,
                                                    fingerprints, options, ann);
                        } catch (const std::exception& e) {
                            // unreadable input: report it instead of killing the run
                            ProvenanceReport r;
                            r.image_id = id;
                            r.detector_versions = detector_versions();
                            r.detector_details["input"] = { { "status", "error" },
                                                            { "error", e.what() } };
                            if (ann)
                                r.visible_disclosure = ann->visible_mark;
                            reports[i] = std::move(r);
                        }
                    }
                };
                if (*jobs <= 1) {
                    worker();
                } else {
                    std::vector<std::thread> pool;
                    for (int j = 0; j < *jobs; ++j)
                        pool.emplace_back(worker);
                    for (auto& th : pool)
                        th.join();
                }

                const CorpusSummary summary = aggregate_corpus(reports, annotations);
                if (*format == "md") {
                    std::string md = render_summary_markdown(summary);
                    md += "\n";
                    for (const auto& r : reports)
                        md += render_report_markdown(r) + "\n";
                    emit(md, *out);
                } else {
                    nlohmann::ordered_json doc;
                    nlohmann::ordered_json report_array = nlohmann::ordered_json::array();
                    for (const auto& r : reports)
                        report_array.push_back(report_to_json(r));
                    doc["reports"] = std::move(report_array);
                    doc["summary"] = summary_to_json(summary);
                    emit(doc.dump(2) + "\n", *out);
                }
                return 0;
            };
        });
    }

    // ---- aggregate ---------------------------------------------------------
    {
        auto* aggregate = app.add_subcommand("aggregate", "summarize a report file");
        auto in = std::make_shared<std::string>();
        auto annotations_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("json");
        aggregate->add_option("input", *in, "scan output or JSON array of reports")
            ->required()
            ->check(CLI::ExistingFile);
        aggregate->add_option("--annotations", *annotations_path);
        aggregate->add_option("--out", *out);
        aggregate->add_option("--format", *format)->check(CLI::IsMember({ "json", "md" }));
        aggregate->callback([=, &action] {
            action = [=] {
                nlohmann::ordered_json doc;
                try {
                    doc = nlohmann::ordered_json::parse(read_file(*in));
                } catch (const nlohmann::ordered_json::exception& e) {
                    raise(Errc::BadParams, *in + ": " + e.what());
                }
                if (!doc.is_array() && !doc.contains("reports"))
                    raise(Errc::BadParams,
                          *in + ": expected a scan output or a JSON array of reports");
                const nlohmann::ordered_json& array
                    = doc.is_array() ? doc : doc.at("reports");
                std::vector<ProvenanceReport> reports;
                for (const auto& r : array)
                    reports.push_back(report_from_json(r));

                CorpusAnnotations annotations;
                if (!annotations_path->empty())
                    annotations = load_annotations(*annotations_path);

                const CorpusSummary summary = aggregate_corpus(reports, annotations);
                emit(*format == "md" ? render_summary_markdown(summary)
                                     : render_summary_json(summary),
                     *out);
                return 0;
            };
        });
    }

    // ---- fixtures ----------------------------------------------------------
    {
        auto* fixtures = app.add_subcommand("fixtures", "generate a synthetic marked corpus");
        auto out_dir = std::make_shared<std::string>();
        auto config = std::make_shared<std::string>();
        auto seed = std::make_shared<uint64_t>(1);
        fixtures->add_option("--out", *out_dir, "output directory")->required();
        fixtures->add_option("--config", *config, "fixture spec JSON");
        fixtures->add_option("--seed", *seed);
        fixtures->callback([=, &action] {
            action = [=] {
                FixtureSpec spec;
                if (config->empty()) {
                    spec.groups = { { 5, { "dwtdct" }, "png" }, { 3, { "lsb" }, "png" },
                                    { 3, { "metadata" }, "png" }, { 2, { "c2pa" }, "png" },
                                    { 1, { "c2pa" }, "jpeg" }, { 3, { "fingerprint" }, "png" },
                                    { 3, {}, "png" } };
                } else {
                    spec = FixtureSpec::from_file(*config);
                }
                const FixtureCorpus corpus = generate_fixture_corpus(spec, *seed, *out_dir);
                std::cerr << "wrote " << corpus.images.size() << " images to "
                          << corpus.images_dir << "\n";
                return 0;
            };
        });
    }

    // ---- hash / register / match --------------------------------------------
    {
        auto* hash = app.add_subcommand("hash", "perceptual hash of an image");
        auto in = std::make_shared<std::string>();
        hash->add_option("input", *in)->required()->check(CLI::ExistingFile);
        hash->callback([=, &action] {
            action = [=] {
                nlohmann::ordered_json doc;
                doc["phash"] = to_hex_u64(compute_phash(decode_raster(FileBlob::from_file(*in))));
                std::cout << doc.dump(2) << "\n";
                return 0;
            };
        });
    }

    {
        auto* reg = app.add_subcommand("register", "add an image fingerprint to a store");
        auto in = std::make_shared<std::string>();
        auto store_path = std::make_shared<std::string>(defaults.fp_store);
        auto label = std::make_shared<std::string>();
        auto created_at = std::make_shared<int64_t>(-1);
        reg->add_option("input", *in)->required()->check(CLI::ExistingFile);
        reg->add_option("--store", *store_path);
        reg->add_option("--label", *label)->required();
        reg->add_option("--created-at", *created_at, "unix seconds; defaults to now");
        reg->callback([=, &action] {
            action = [=] {
                if (store_path->empty())
                    raise(Errc::BadParams, "--store is required (or set MARKINSPECT_CONFIG)");
                RegistryStore store = RegistryStore::open(*store_path);
                const int64_t stamp = *created_at >= 0
                    ? *created_at
                    : std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
                const Fingerprint fp = register_fingerprint(
                    store, decode_raster(FileBlob::from_file(*in)), *label, stamp);
                nlohmann::ordered_json doc;
                doc["phash"] = to_hex_u64(fp.bits);
                doc["label"] = fp.source_label;
                doc["created_at"] = fp.created_at;
                std::cout << doc.dump(2) << "\n";
                return 0;
            };
        });
    }

    {
        auto* match = app.add_subcommand("match", "look up the nearest fingerprint");
        auto in = std::make_shared<std::string>();
        auto store_path = std::make_shared<std::string>(defaults.fp_store);
        auto max_distance = std::make_shared<int>(defaults.max_distance);
        match->add_option("input", *in)->required()->check(CLI::ExistingFile);
        match->add_option("--store", *store_path);
        match->add_option("--max-distance", *max_distance);
        match->callback([=, &action] {
            action = [=] {
                if (store_path->empty())
                    raise(Errc::BadParams, "--store is required (or set MARKINSPECT_CONFIG)");
                const RegistryStore store = RegistryStore::open(*store_path);
                const auto m = match_fingerprint(
                    store, decode_raster(FileBlob::from_file(*in)), *max_distance);
                nlohmann::ordered_json doc;
                doc["matched"] = m.has_value();
                if (m) {
                    doc["label"] = m->record.source_label;
                    doc["distance"] = m->distance;
                }
                std::cout << doc.dump(2) << "\n";
                return 0;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == Errc::BadParams ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
