#include "markinspect/attacks.hpp"

#include "markinspect/c2pa.hpp"
#include "markinspect/metadata.hpp"
#include "markinspect/wm_lsb.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace markinspect {

namespace {

    [[noreturn]] void bad_params(const std::string& what)
    {
        raise(Errc::BadParams, what);
    }

    // Box-Muller over the well-specified mt19937_64 stream; std::normal_distribution
    // is implementation-defined and would break golden outputs.
    class SeededGaussian {
    public:
        explicit SeededGaussian(uint64_t seed)
            : rng_(seed)
        {
        }

        double next(double sigma)
        {
            if (have_spare_) {
                have_spare_ = false;
                return spare_ * sigma;
            }
            const double u1 = uniform_open();
            const double u2 = uniform_open();
            const double r = std::sqrt(-2.0 * std::log(u1));
            spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
            have_spare_ = true;
            return r * std::cos(2.0 * std::numbers::pi * u2) * sigma;
        }

    private:
        double uniform_open()
        {
            // (0,1]: never zero, so log() stays finite
            return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
        }

        std::mt19937_64 rng_;
        double spare_ = 0.0;
        bool have_spare_ = false;
    };

    uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c)
    {
        uint64_t x = seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xC2B2AE3D27D4EB4Full)
            ^ (c * 0x165667B19E3779F9ull);
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return x;
    }

    std::string format_fixed(double v, int decimals)
    {
        std::ostringstream os;
        os.setf(std::ios::fixed);
        os.precision(decimals);
        os << v;
        return os.str();
    }

} // namespace

Attack Attack::identity()
{
    return {};
}

Attack Attack::jpeg_reencode(int quality)
{
    if (quality < 1 || quality > 100)
        bad_params("JPEG quality must be in 1..100");
    Attack a;
    a.kind = AttackKind::JpegReencode;
    a.quality = quality;
    return a;
}

Attack Attack::resize(double scale)
{
    if (!(scale >= 0.1 && scale <= 4.0))
        bad_params("resize scale must be in 0.1..4.0");
    Attack a;
    a.kind = AttackKind::Resize;
    a.scale = scale;
    return a;
}

Attack Attack::center_crop(double fraction)
{
    if (!(fraction >= 0.1 && fraction <= 1.0))
        bad_params("crop fraction must be in 0.1..1.0");
    Attack a;
    a.kind = AttackKind::CenterCrop;
    a.fraction = fraction;
    return a;
}

Attack Attack::gaussian_noise(double sigma)
{
    if (!(sigma >= 0.0) || sigma > 128.0)
        bad_params("noise sigma must be in 0..128");
    Attack a;
    a.kind = AttackKind::GaussianNoise;
    a.sigma = sigma;
    return a;
}

Attack Attack::metadata_strip()
{
    Attack a;
    a.kind = AttackKind::MetadataStrip;
    return a;
}

Attack Attack::from_json(const std::string& json_object_text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_object_text);
    } catch (const nlohmann::json::exception& e) {
        bad_params(std::string("attack config: ") + e.what());
    }
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "identity")
        return identity();
    if (kind == "jpeg")
        return jpeg_reencode(doc.at("quality").get<int>());
    if (kind == "resize")
        return resize(doc.at("scale").get<double>());
    if (kind == "crop")
        return center_crop(doc.at("fraction").get<double>());
    if (kind == "noise")
        return gaussian_noise(doc.at("sigma").get<double>());
    if (kind == "strip")
        return metadata_strip();
    bad_params("unknown attack kind \"" + kind + "\"");
}

std::string Attack::name() const
{
    switch (kind) {
    case AttackKind::Identity: return "identity";
    case AttackKind::JpegReencode: return "jpeg" + std::to_string(quality);
    case AttackKind::Resize: return "resize" + format_fixed(scale, 2);
    case AttackKind::CenterCrop: return "crop" + format_fixed(fraction, 2);
    case AttackKind::GaussianNoise: return "noise" + format_fixed(sigma, 1);
    case AttackKind::MetadataStrip: return "strip";
    }
    return "unknown";
}

FileBlob apply_attack(const FileBlob& blob, const Attack& attack, uint64_t seed)
{
    switch (attack.kind) {
    case AttackKind::Identity:
        return blob;
    case AttackKind::MetadataStrip:
        return strip_metadata(blob);
    case AttackKind::JpegReencode:
        return encode_raster(decode_raster(blob), ImageFormat::Jpeg, attack.quality);
    case AttackKind::Resize: {
        const RasterImage img = decode_raster(blob);
        const int w = std::max(1, static_cast<int>(std::lround(img.width * attack.scale)));
        const int h = std::max(1, static_cast<int>(std::lround(img.height * attack.scale)));
        return encode_raster(resize_bilinear(img, w, h), ImageFormat::Png);
    }
    case AttackKind::CenterCrop: {
        const RasterImage img = decode_raster(blob);
        const int w = std::max(1, static_cast<int>(std::lround(img.width * attack.fraction)));
        const int h = std::max(1, static_cast<int>(std::lround(img.height * attack.fraction)));
        const int x = (img.width - w) / 2;
        const int y = (img.height - h) / 2;
        return encode_raster(crop(img, x, y, w, h), ImageFormat::Png);
    }
    case AttackKind::GaussianNoise: {
        RasterImage img = decode_raster(blob);
        SeededGaussian noise(seed);
        const int cc = img.channel_count();
        const int color_cc = img.color_channel_count();
        const size_t pixels = static_cast<size_t>(img.width) * img.height;
        if (attack.sigma > 0.0) {
            for (size_t p = 0; p < pixels; ++p)
                for (int c = 0; c < color_cc; ++c) {
                    uint8_t& s = img.samples[p * cc + c];
                    s = clamp_round_u8(static_cast<double>(s) + noise.next(attack.sigma));
                }
        }
        return encode_raster(img, ImageFormat::Png);
    }
    }
    bad_params("unhandled attack kind");
}

const char* marking_technique_name(MarkingTechnique t)
{
    switch (t) {
    case MarkingTechnique::Lsb: return "lsb";
    case MarkingTechnique::DwtDct: return "dwtdct";
    case MarkingTechnique::Metadata: return "metadata";
    case MarkingTechnique::C2pa: return "c2pa";
    case MarkingTechnique::Fingerprint: return "fingerprint";
    }
    return "unknown";
}

namespace {

    struct CellOutcome {
        bool survived = false;
        double metric = 1.0;
    };

    CellOutcome evaluate_item(const MarkedItem& item, const FileBlob& attacked,
                              const PayloadRegistry& registry, const RegistryStore& fingerprints,
                              const DwtDctParams& params)
    {
        CellOutcome out;
        switch (item.technique) {
        case MarkingTechnique::Lsb: {
            const LsbExtractResult r = lsb_extract(decode_raster(attacked));
            out.survived = r.status == LsbStatus::Found && r.payload == item.lsb_payload;
            out.metric = out.survived ? 0.0 : 1.0;
            break;
        }
        case MarkingTechnique::DwtDct: {
            const RasterImage img = decode_raster(attacked);
            const ExtractedBits bits = dwtdct_extract_bits(img, params, item.payload.bit_count());
            out.metric = hamming_fraction(bits, item.payload);
            const DetectionResult r = dwtdct_detect(img, registry, params);
            out.survived = r.detected && r.label == item.expected_label;
            break;
        }
        case MarkingTechnique::Metadata: {
            const AiOriginFinding f = classify_ai_origin(extract_records(attacked));
            out.survived = f.is_ai_declared;
            out.metric = out.survived ? 1.0 : 0.0;
            break;
        }
        case MarkingTechnique::C2pa: {
            const ManifestFinding f = probe_c2pa(attacked);
            out.survived = f.present;
            out.metric = out.survived ? 1.0 : 0.0;
            break;
        }
        case MarkingTechnique::Fingerprint: {
            const RasterImage img = decode_raster(attacked);
            out.metric = hamming_distance_u64(compute_phash(img), item.fingerprint_bits);
            const auto match = match_fingerprint(fingerprints, img);
            out.survived = match.has_value()
                && match->record.source_label == item.expected_label;
            break;
        }
        }
        return out;
    }

    // metric contribution for an errored item: BER-style metrics saturate at
    // 1, fingerprint distance at 64, and the detection-rate metrics stay 0
    double worst_metric(MarkingTechnique t)
    {
        switch (t) {
        case MarkingTechnique::Lsb:
        case MarkingTechnique::DwtDct: return 1.0;
        case MarkingTechnique::Fingerprint: return 64.0;
        case MarkingTechnique::Metadata:
        case MarkingTechnique::C2pa: return 0.0;
        }
        return 0.0;
    }

} // namespace

RobustnessMatrix run_robustness_matrix(const std::vector<MarkedItem>& items,
                                       const std::vector<Attack>& attacks,
                                       const PayloadRegistry& registry,
                                       const RegistryStore& fingerprints,
                                       const DwtDctParams& params, uint64_t seed)
{
    RobustnessMatrix matrix;

    // rows: techniques that actually occur, in enum order
    std::vector<MarkingTechnique> techniques;
    for (MarkingTechnique t : { MarkingTechnique::Lsb, MarkingTechnique::DwtDct,
                                MarkingTechnique::Metadata, MarkingTechnique::C2pa,
                                MarkingTechnique::Fingerprint }) {
        for (const auto& item : items)
            if (item.technique == t) {
                techniques.push_back(t);
                break;
            }
    }

    for (MarkingTechnique t : techniques)
        matrix.technique_names.push_back(marking_technique_name(t));
    for (const auto& a : attacks)
        matrix.attack_names.push_back(a.name());

    matrix.cells.assign(techniques.size(), std::vector<MatrixCell>(attacks.size()));

    for (size_t ti = 0; ti < techniques.size(); ++ti) {
        for (size_t ai = 0; ai < attacks.size(); ++ai) {
            MatrixCell& cell = matrix.cells[ti][ai];
            for (size_t ii = 0; ii < items.size(); ++ii) {
                const MarkedItem& item = items[ii];
                if (item.technique != techniques[ti])
                    continue;
                cell.n_items += 1;
                try {
                    const FileBlob attacked
                        = apply_attack(item.blob, attacks[ai], mix_seed(seed, ti, ai, ii));
                    const CellOutcome outcome
                        = evaluate_item(item, attacked, registry, fingerprints, params);
                    cell.metric_sum += outcome.metric;
                    if (outcome.survived)
                        cell.n_survived += 1;
                } catch (const std::exception& e) {
                    cell.metric_sum += worst_metric(techniques[ti]);
                    cell.errors.push_back(item.id + ": " + e.what());
                }
            }
        }
    }
    return matrix;
}

std::string RobustnessMatrix::to_csv() const
{
    std::ostringstream os;
    os << "technique,attack,n_items,n_survived,survival_rate,mean_metric\n";
    os.setf(std::ios::fixed);
    os.precision(4);
    for (size_t t = 0; t < technique_names.size(); ++t)
        for (size_t a = 0; a < attack_names.size(); ++a) {
            const MatrixCell& c = cells[t][a];
            os << technique_names[t] << ',' << attack_names[a] << ',' << c.n_items << ','
               << c.n_survived << ',' << c.survival_rate() << ',' << c.mean_metric() << '\n';
        }
    return os.str();
}

std::string RobustnessMatrix::to_json() const
{
    nlohmann::ordered_json doc;
    doc["techniques"] = technique_names;
    doc["attacks"] = attack_names;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (size_t t = 0; t < technique_names.size(); ++t) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (size_t a = 0; a < attack_names.size(); ++a) {
            const MatrixCell& c = cells[t][a];
            nlohmann::ordered_json cell = { { "n_items", c.n_items },
                                            { "n_survived", c.n_survived },
                                            { "survival_rate", c.survival_rate() },
                                            { "mean_metric", c.mean_metric() },
                                            { "survived", c.survived() } };
            if (!c.errors.empty())
                cell["errors"] = c.errors;
            row.push_back(std::move(cell));
        }
        rows.push_back(std::move(row));
    }
    doc["cells"] = std::move(rows);
    return doc.dump(2) + "\n";
}

} // namespace markinspect
