#include "markinspect/corpusgen.hpp"

#include "markinspect/wm_lsb.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

namespace markinspect {

namespace fs = std::filesystem;

namespace {

    uint64_t mix(uint64_t seed, uint64_t index)
    {
        uint64_t x = seed ^ (index + 0x9E3779B97F4A7C15ull);
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return x;
    }

    const std::vector<std::string> kKnownMarkings
        = { "dwtdct", "lsb", "metadata", "c2pa", "fingerprint" };

    void draw_disk(RasterImage& img, int cx, int cy, int radius, uint8_t r, uint8_t g, uint8_t b)
    {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < radius * radius) {
                    img.sample(y, x, 0) = r;
                    img.sample(y, x, 1) = g;
                    img.sample(y, x, 2) = b;
                }
    }

    void draw_rect(RasterImage& img, int x0, int y0, int w, int h, uint8_t r, uint8_t g, uint8_t b)
    {
        for (int y = std::max(0, y0); y < std::min(img.height, y0 + h); ++y)
            for (int x = std::max(0, x0); x < std::min(img.width, x0 + w); ++x) {
                img.sample(y, x, 0) = r;
                img.sample(y, x, 1) = g;
                img.sample(y, x, 2) = b;
            }
    }

} // namespace

RasterImage synthesize_fixture_image(uint64_t seed, int index, int width, int height)
{
    std::mt19937_64 rng(mix(seed, static_cast<uint64_t>(index)));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    RasterImage img = RasterImage::blank(width, height, Channels::Rgb);

    // gradient base with a seeded direction and palette, kept off the rails
    const double base[3] = { 40 + 150 * uni(rng), 40 + 150 * uni(rng), 40 + 150 * uni(rng) };
    const double slope[3] = { (uni(rng) - 0.5) * 260, (uni(rng) - 0.5) * 260,
                              (uni(rng) - 0.5) * 260 };
    const double angle = uni(rng) * 2.0 * 3.14159265358979323846;
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double t = (x * ca + y * sa) / std::max(width, height);
            for (int c = 0; c < 3; ++c)
                img.sample(y, x, c) = clamp_round_u8(base[c] + slope[c] * t);
        }

    // shape texture: disks and rectangles
    const int n_shapes = 2 + static_cast<int>(uni(rng) * 3);
    for (int s = 0; s < n_shapes; ++s) {
        const uint8_t r = clamp_round_u8(40 + 180 * uni(rng));
        const uint8_t g = clamp_round_u8(40 + 180 * uni(rng));
        const uint8_t b = clamp_round_u8(40 + 180 * uni(rng));
        if (uni(rng) < 0.6) {
            draw_disk(img, static_cast<int>(uni(rng) * width), static_cast<int>(uni(rng) * height),
                      std::max(6, static_cast<int>(uni(rng) * width / 4)), r, g, b);
        } else {
            draw_rect(img, static_cast<int>(uni(rng) * width * 0.8),
                      static_cast<int>(uni(rng) * height * 0.8),
                      std::max(8, static_cast<int>(uni(rng) * width / 3)),
                      std::max(8, static_cast<int>(uni(rng) * height / 3)), r, g, b);
        }
    }

    // every third image also gets mild sensor-style noise
    if (index % 3 == 2) {
        std::normal_distribution<double> noise(0.0, 8.0);
        for (auto& s : img.samples)
            s = clamp_round_u8(static_cast<double>(s) + noise(rng));
    }
    return img;
}

PayloadRegistry fixture_registry()
{
    // Pairwise Hamming separation is 33..47 bits, so a decode needs a third of
    // its bits flipped before the nearest entry can change.
    PayloadRegistry reg;
    reg.entries.push_back({ "demo-mark-a", WatermarkPayload::from_text("Aurora-0xA7!") });
    reg.entries.push_back({ "demo-mark-b", WatermarkPayload::from_text("pixel#Smith4") });
    reg.entries.push_back({ "demo-mark-c", WatermarkPayload::from_text("FIGMENT_v2_9") });
    reg.entries.push_back({ "demo-mark-d", WatermarkPayload::from_text("novaDRAW+513") });
    return reg;
}

FixtureSpec FixtureSpec::from_json(const nlohmann::json& doc)
{
    FixtureSpec spec;
    spec.width = doc.value("width", 256);
    spec.height = doc.value("height", 256);
    for (const auto& g : doc.at("groups")) {
        FixtureGroup group;
        group.count = g.at("count").get<int>();
        group.markings = g.value("markings", std::vector<std::string>());
        group.format = g.value("format", std::string("png"));
        spec.groups.push_back(std::move(group));
    }
    spec.validate();
    return spec;
}

FixtureSpec FixtureSpec::from_file(const std::string& path)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::BadParams, path + ": " + e.what());
    }
    return from_json(doc);
}

void FixtureSpec::validate() const
{
    if (width < 96 || height < 96)
        raise(Errc::BadParams, "fixture images must be at least 96x96");
    if (groups.empty())
        raise(Errc::BadParams, "fixture spec needs at least one group");
    for (const auto& g : groups) {
        if (g.count < 0)
            raise(Errc::BadParams, "group count must be non-negative");
        if (g.format != "png" && g.format != "jpeg")
            raise(Errc::BadParams, "group format must be png or jpeg");
        for (const auto& m : g.markings) {
            if (std::find(kKnownMarkings.begin(), kKnownMarkings.end(), m)
                == kKnownMarkings.end())
                raise(Errc::BadParams, "unknown marking \"" + m + "\"");
            if (m == "lsb" && g.format == "jpeg")
                raise(Errc::BadParams, "lsb marking cannot survive a jpeg group");
        }
    }
}

FixtureCorpus generate_fixture_corpus(const FixtureSpec& spec, uint64_t seed,
                                      const std::string& out_dir)
{
    spec.validate();

    FixtureCorpus corpus;
    corpus.directory = out_dir;
    corpus.images_dir = (fs::path(out_dir) / "images").string();
    corpus.ground_truth_path = (fs::path(out_dir) / "ground_truth.json").string();
    corpus.annotations_path = (fs::path(out_dir) / "annotations.json").string();
    corpus.registry_path = (fs::path(out_dir) / "registry.json").string();
    corpus.fingerprints_path = (fs::path(out_dir) / "fingerprints.ndjson").string();

    std::error_code ec;
    fs::create_directories(corpus.images_dir, ec);
    if (ec)
        raise(Errc::StoreIoFailure, "cannot create " + corpus.images_dir + ": " + ec.message());
    // regeneration must be byte-identical, so clear previous outputs
    for (const auto& entry : fs::directory_iterator(corpus.images_dir))
        fs::remove(entry.path());
    fs::remove(corpus.fingerprints_path);

    const PayloadRegistry registry = fixture_registry();
    RegistryStore fingerprints = RegistryStore::open(corpus.fingerprints_path);
    const DwtDctParams params;

    nlohmann::ordered_json truth;
    truth["seed"] = seed;
    truth["width"] = spec.width;
    truth["height"] = spec.height;
    nlohmann::ordered_json truth_images = nlohmann::ordered_json::array();
    nlohmann::ordered_json annotations = nlohmann::ordered_json::object();

    static const char* kProviders[] = { "Aurora Labs", "PixelSmith", "Figment Works",
                                        "Render & Co", "Imagique", "NovaDraw" };
    static const char* kCountries[] = { "US", "DE", "FR", "NL", "CN", "UK" };
    static const char* kModels[] = { "", "sd-3-clone", "flux-variant", "house-model-v2" };

    int index = 0;
    for (const auto& group : spec.groups) {
        for (int i = 0; i < group.count; ++i, ++index) {
            char id_buf[16];
            std::snprintf(id_buf, sizeof id_buf, "img_%04d", index);
            const std::string id = id_buf;

            RasterImage img = synthesize_fixture_image(seed, index, spec.width, spec.height);

            FixtureImageTruth t;
            t.id = id;
            t.format = group.format;
            t.markings = group.markings;
            std::sort(t.markings.begin(), t.markings.end());

            const auto has = [&](const char* m) {
                return std::find(t.markings.begin(), t.markings.end(), m) != t.markings.end();
            };

            if (has("dwtdct")) {
                const RegistryEntry& entry = registry.entries[index % registry.entries.size()];
                img = dwtdct_embed(img, entry.payload, params);
                t.wm_label = entry.label;
                t.wm_payload_hex = entry.payload.hex();
            }
            if (has("lsb")) {
                const std::string payload_text = "LSB:" + id;
                const Bytes payload(payload_text.begin(), payload_text.end());
                img = lsb_embed(img, ByteSpan(payload));
                t.lsb_payload_hex = to_hex(ByteSpan(payload));
            }

            FileBlob blob = group.format == "png"
                ? encode_raster(img, ImageFormat::Png)
                : encode_raster(img, ImageFormat::Jpeg, 95);

            if (has("metadata"))
                blob = embed_ai_metadata(blob, { "SyntheticImageLab" });
            if (has("c2pa")) {
                FixtureManifestOptions opts;
                opts.split_app11 = group.format == "jpeg";
                blob = embed_fixture_manifest(blob, opts);
            }
            if (has("fingerprint")) {
                register_fingerprint(fingerprints, decode_raster(blob), id, 0);
                t.fp_label = id;
            }

            t.file = "images/" + id + (group.format == "png" ? ".png" : ".jpg");
            write_file((fs::path(out_dir) / t.file).string(), blob.span());

            std::mt19937_64 ann_rng(mix(seed ^ 0xA55A, static_cast<uint64_t>(index)));
            annotations[id] = { { "visible_mark", ann_rng() % 4 == 0 },
                                { "deployment_category", 1 + static_cast<int>(ann_rng() % 4) },
                                { "provider_name", kProviders[ann_rng() % 6] },
                                { "provider_country", kCountries[ann_rng() % 6] },
                                { "model_name", kModels[ann_rng() % 4] } };

            nlohmann::ordered_json tj;
            tj["id"] = t.id;
            tj["file"] = t.file;
            tj["format"] = t.format;
            tj["markings"] = t.markings;
            if (!t.wm_label.empty()) {
                tj["wm_label"] = t.wm_label;
                tj["wm_payload_hex"] = t.wm_payload_hex;
            }
            if (!t.lsb_payload_hex.empty())
                tj["lsb_payload_hex"] = t.lsb_payload_hex;
            if (!t.fp_label.empty())
                tj["fp_label"] = t.fp_label;
            truth_images.push_back(std::move(tj));

            corpus.images.push_back(std::move(t));
        }
    }

    truth["images"] = std::move(truth_images);
    const std::string truth_text = truth.dump(2) + "\n";
    write_file(corpus.ground_truth_path,
               ByteSpan(reinterpret_cast<const uint8_t*>(truth_text.data()), truth_text.size()));
    const std::string ann_text = annotations.dump(2) + "\n";
    write_file(corpus.annotations_path,
               ByteSpan(reinterpret_cast<const uint8_t*>(ann_text.data()), ann_text.size()));
    registry.save(corpus.registry_path);
    if (!fs::exists(corpus.fingerprints_path))
        write_file(corpus.fingerprints_path, {}); // empty store is still a store

    return corpus;
}

std::vector<FixtureImageTruth> load_ground_truth(const std::string& path)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::BadParams, path + ": " + e.what());
    }
    std::vector<FixtureImageTruth> out;
    for (const auto& tj : doc.at("images")) {
        FixtureImageTruth t;
        t.id = tj.at("id").get<std::string>();
        t.file = tj.at("file").get<std::string>();
        t.format = tj.at("format").get<std::string>();
        t.markings = tj.at("markings").get<std::vector<std::string>>();
        t.wm_label = tj.value("wm_label", std::string());
        t.wm_payload_hex = tj.value("wm_payload_hex", std::string());
        t.lsb_payload_hex = tj.value("lsb_payload_hex", std::string());
        t.fp_label = tj.value("fp_label", std::string());
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace markinspect
