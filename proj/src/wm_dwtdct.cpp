#include "markinspect/wm_dwtdct.hpp"

#include "markinspect/transforms.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

namespace markinspect {

namespace {

    double quantize_to_coset(double value, double delta, bool bit)
    {
        const double offset = bit ? 0.5 : 0.0;
        return delta * (std::round(value / delta - offset) + offset);
    }

    double coset_distance(double value, double delta, bool bit)
    {
        return std::abs(value - quantize_to_coset(value, delta, bit));
    }

    struct BlockGrid {
        Plane ll;
        int blocks_x = 0;
        int blocks_y = 0;
        size_t count() const { return static_cast<size_t>(blocks_x) * blocks_y; }
    };

    void require_capacity(const BlockGrid& grid, size_t bit_count, const DwtDctParams& params)
    {
        if (grid.count() >= bit_count)
            return;
        const int per_block = 2 * params.block_size;
        const int side = per_block
            * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(bit_count))));
        raise(Errc::ImageTooSmall,
              "payload needs " + std::to_string(bit_count) + " carrier blocks but image has "
                  + std::to_string(grid.count()) + "; a square image of at least "
                  + std::to_string(side) + "x" + std::to_string(side) + " suffices");
    }

} // namespace

void DwtDctParams::validate() const
{
    if (!(delta > 0.0))
        raise(Errc::BadParams, "delta must be positive");
    if (block_size != 4)
        raise(Errc::BadParams, "block size must be 4");
    if (coeff_row == 0 && coeff_col == 0)
        raise(Errc::BadParams, "DC coefficient cannot carry the mark");
    if (coeff_row < 0 || coeff_col < 0 || coeff_row >= block_size || coeff_col >= block_size)
        raise(Errc::BadParams, "coefficient index outside block");
}

WatermarkPayload WatermarkPayload::from_hex(std::string_view hex)
{
    WatermarkPayload p;
    p.bytes = markinspect::from_hex(hex);
    if (p.bytes.empty())
        raise(Errc::BadParams, "payload must not be empty");
    return p;
}

WatermarkPayload WatermarkPayload::from_text(std::string_view text)
{
    if (text.empty())
        raise(Errc::BadParams, "payload must not be empty");
    WatermarkPayload p;
    p.bytes.assign(text.begin(), text.end());
    return p;
}

PayloadRegistry PayloadRegistry::load(const std::string& path, double threshold)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::BadParams, "registry " + path + ": " + e.what());
    }
    if (!doc.is_array())
        raise(Errc::BadParams, "registry must be a JSON array");

    PayloadRegistry reg;
    reg.match_threshold = threshold;
    for (const auto& item : doc) {
        RegistryEntry entry;
        entry.label = item.at("label").get<std::string>();
        entry.payload = WatermarkPayload::from_hex(item.at("payload_hex").get<std::string>());
        reg.entries.push_back(std::move(entry));
    }
    reg.validate();
    return reg;
}

void PayloadRegistry::save(const std::string& path) const
{
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& e : entries)
        doc.push_back({ { "label", e.label }, { "payload_hex", e.payload.hex() } });
    const std::string text = doc.dump(2) + "\n";
    write_file(path, ByteSpan(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

void PayloadRegistry::validate() const
{
    if (entries.empty())
        raise(Errc::EmptyRegistry, "registry has no entries");
    std::set<std::string> labels;
    const size_t bits = entries.front().payload.bit_count();
    for (const auto& e : entries) {
        if (e.payload.bit_count() != bits)
            raise(Errc::BadParams, "registry entries must share one bit length");
        if (!labels.insert(e.label).second)
            raise(Errc::BadParams, "duplicate registry label \"" + e.label + "\"");
    }
}

size_t PayloadRegistry::bit_length() const
{
    if (entries.empty())
        raise(Errc::EmptyRegistry, "registry has no entries");
    return entries.front().payload.bit_count();
}

WatermarkPayload ExtractedBits::to_payload() const
{
    WatermarkPayload p;
    p.bytes.assign((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i])
            p.bytes[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
    return p;
}

size_t dwtdct_block_count(int width, int height, const DwtDctParams& params)
{
    const int even_w = width - width % 2;
    const int even_h = height - height % 2;
    if (even_w < 2 || even_h < 2)
        return 0;
    const int bx = (even_w / 2) / params.block_size;
    const int by = (even_h / 2) / params.block_size;
    return static_cast<size_t>(bx) * static_cast<size_t>(by);
}

namespace {

    BlockGrid analyze(const Plane& luma, const DwtDctParams& params, SubbandSet* subbands_out)
    {
        EvenCrop cropped = crop_even(luma);
        SubbandSet subbands = haar_dwt2_forward(cropped.plane);
        BlockGrid grid;
        grid.blocks_x = subbands.ll.width / params.block_size;
        grid.blocks_y = subbands.ll.height / params.block_size;
        grid.ll = subbands.ll;
        if (subbands_out)
            *subbands_out = std::move(subbands);
        return grid;
    }

} // namespace

RasterImage dwtdct_embed(const RasterImage& img, const WatermarkPayload& payload,
                         const DwtDctParams& params)
{
    params.validate();
    if (payload.bit_count() == 0)
        raise(Errc::BadParams, "payload must not be empty");

    const Plane luma = rgb_to_luma(img);
    SubbandSet subbands;
    BlockGrid grid = analyze(luma, params, &subbands);
    require_capacity(grid, payload.bit_count(), params);

    const int n = params.block_size;
    const int coeff_index = params.coeff_row * n + params.coeff_col;
    std::vector<double> block(static_cast<size_t>(n) * n);
    std::vector<double> coeffs(block.size());

    for (size_t b = 0; b < grid.count(); ++b) {
        const int by = static_cast<int>(b) / grid.blocks_x;
        const int bx = static_cast<int>(b) % grid.blocks_x;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                block[static_cast<size_t>(y) * n + x] = subbands.ll.at(by * n + y, bx * n + x);

        dct2_forward_raw(block.data(), coeffs.data(), n);
        const bool bit = payload.bit(b % payload.bit_count());
        coeffs[coeff_index] = quantize_to_coset(coeffs[coeff_index], params.delta, bit);
        dct2_inverse_raw(coeffs.data(), block.data(), n);

        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                subbands.ll.at(by * n + y, bx * n + x) = block[static_cast<size_t>(y) * n + x];
    }

    const Plane marked_interior = haar_dwt2_inverse(subbands);
    const Plane marked_luma = restore_margin(marked_interior, luma);
    return merge_luma(img, marked_luma);
}

ExtractedBits dwtdct_extract_bits(const RasterImage& img, const DwtDctParams& params,
                                  size_t bit_count)
{
    params.validate();
    if (bit_count == 0)
        raise(Errc::BadParams, "bit count must be positive");

    const Plane luma = rgb_to_luma(img);
    BlockGrid grid = analyze(luma, params, nullptr);
    require_capacity(grid, bit_count, params);

    const int n = params.block_size;
    const int coeff_index = params.coeff_row * n + params.coeff_col;
    std::vector<double> block(static_cast<size_t>(n) * n);
    std::vector<double> coeffs(block.size());
    std::vector<int> votes_one(bit_count, 0);
    std::vector<int> votes_total(bit_count, 0);

    for (size_t b = 0; b < grid.count(); ++b) {
        const int by = static_cast<int>(b) / grid.blocks_x;
        const int bx = static_cast<int>(b) % grid.blocks_x;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                block[static_cast<size_t>(y) * n + x] = grid.ll.at(by * n + y, bx * n + x);

        dct2_forward_raw(block.data(), coeffs.data(), n);
        const double q = coeffs[coeff_index];
        const double d0 = coset_distance(q, params.delta, false);
        const double d1 = coset_distance(q, params.delta, true);
        const size_t bit_index = b % bit_count;
        votes_total[bit_index] += 1;
        if (d1 < d0)
            votes_one[bit_index] += 1;
    }

    ExtractedBits out;
    out.bits.resize(bit_count);
    out.confidence.resize(bit_count);
    for (size_t i = 0; i < bit_count; ++i) {
        const int ones = votes_one[i];
        const int zeros = votes_total[i] - ones;
        out.bits[i] = ones > zeros ? 1 : 0;
        out.confidence[i] = votes_total[i] == 0
            ? 0.0
            : static_cast<double>(std::abs(ones - zeros)) / votes_total[i];
    }
    return out;
}

DetectionResult dwtdct_detect(const RasterImage& img, const PayloadRegistry& registry,
                              const DwtDctParams& params)
{
    registry.validate();
    const ExtractedBits bits = dwtdct_extract_bits(img, params, registry.bit_length());

    DetectionResult best;
    for (const auto& entry : registry.entries) {
        const double d = hamming_fraction(bits, entry.payload);
        if (best.label.empty() || d < best.distance_fraction) {
            best.label = entry.label;
            best.distance_fraction = d;
        }
    }
    best.detected = best.distance_fraction <= registry.match_threshold;
    if (!best.detected)
        best.label.clear();
    return best;
}

double hamming_fraction(const ExtractedBits& bits, const WatermarkPayload& payload)
{
    if (bits.bits.size() != payload.bit_count())
        raise(Errc::BadParams, "bit-length mismatch");
    size_t diff = 0;
    for (size_t i = 0; i < bits.bits.size(); ++i)
        diff += (bits.bits[i] != 0) != payload.bit(i);
    return static_cast<double>(diff) / static_cast<double>(bits.bits.size());
}

} // namespace markinspect
