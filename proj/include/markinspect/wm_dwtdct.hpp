#pragma once

#include "markinspect/image.hpp"

#include <string>

namespace markinspect {

// Transform-domain codec: one-level Haar DWT of the luma plane, 4x4 block DCT
// over the LL subband, and quantization-index modulation of a single mid-band
// coefficient per block. The payload is tiled over the blocks row-major
// (block b carries bit b mod bit_count) and decoded by per-bit majority vote.

struct DwtDctParams {
    double delta = 20.0; // quantization step; see docs/calibration.md
    int coeff_row = 2;
    int coeff_col = 1;
    int block_size = 4;

    void validate() const; // raises BadParams
};

struct WatermarkPayload {
    Bytes bytes; // bit i is bit (7 - i%8) of byte i/8

    static WatermarkPayload from_hex(std::string_view hex);
    static WatermarkPayload from_text(std::string_view text);

    size_t bit_count() const { return bytes.size() * 8; }
    bool bit(size_t i) const { return (bytes[i / 8] >> (7 - i % 8)) & 1; }
    std::string hex() const { return to_hex(bytes); }

    bool operator==(const WatermarkPayload&) const = default;
};

struct RegistryEntry {
    std::string label;
    WatermarkPayload payload;
};

struct PayloadRegistry {
    std::vector<RegistryEntry> entries;
    double match_threshold = 0.20; // max Hamming distance fraction

    // File format: JSON array of {"label": ..., "payload_hex": ...}.
    static PayloadRegistry load(const std::string& path, double threshold = 0.20);
    void save(const std::string& path) const;
    void validate() const; // uniform bit length, unique labels
    size_t bit_length() const;
};

struct ExtractedBits {
    std::vector<uint8_t> bits;        // 0/1 per payload bit index
    std::vector<double> confidence;   // vote margin in [0,1] per bit
    WatermarkPayload to_payload() const;
};

struct DetectionResult {
    bool detected = false;
    std::string label;
    double distance_fraction = 1.0;
};

// Number of carrier blocks an image offers at the given parameters.
size_t dwtdct_block_count(int width, int height, const DwtDctParams& params);

RasterImage dwtdct_embed(const RasterImage& img, const WatermarkPayload& payload,
                         const DwtDctParams& params = {});

ExtractedBits dwtdct_extract_bits(const RasterImage& img, const DwtDctParams& params,
                                  size_t bit_count);

DetectionResult dwtdct_detect(const RasterImage& img, const PayloadRegistry& registry,
                              const DwtDctParams& params = {});

double hamming_fraction(const ExtractedBits& bits, const WatermarkPayload& payload);

} // namespace markinspect
