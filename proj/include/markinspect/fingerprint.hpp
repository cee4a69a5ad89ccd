#pragma once

#include "markinspect/image.hpp"

#include <optional>
#include <string>

namespace markinspect {

struct Fingerprint {
    uint64_t bits = 0;
    std::string source_label;
    int64_t created_at = 0;

    bool operator==(const Fingerprint&) const = default;
};

// 64-bit DCT perceptual hash: luma, bilinear 32x32, orthonormal 32x32 DCT,
// top-left 8x8 coefficients minus DC compared against their median (strict
// '>', so a constant image hashes to zero). Bit k is the k-th coefficient in
// row-major order with the DC slot skipped; bit 63 is always zero.
uint64_t compute_phash(const RasterImage& img);

int hamming_distance_u64(uint64_t a, uint64_t b);

// Append-only newline-delimited JSON store:
//   {"hex_bits":"<16 hex>","label":"...","created_at":<int>}
// Single writer, reload-safe; appends go straight to disk when file-backed.
class RegistryStore {
public:
    static RegistryStore open(const std::string& path); // loads existing records
    static RegistryStore in_memory();

    void append(const Fingerprint& fp);

    const std::vector<Fingerprint>& records() const { return records_; }
    const std::string& path() const { return path_; }

private:
    std::string path_; // empty for in-memory stores
    std::vector<Fingerprint> records_;
};

Fingerprint register_fingerprint(RegistryStore& store, const RasterImage& img,
                                 const std::string& label, int64_t created_at = 0);

struct FingerprintMatch {
    Fingerprint record;
    int distance = 0;
};

constexpr int kDefaultMaxHashDistance = 10;

// Closest record within max_distance; ties go to the earliest registration.
std::optional<FingerprintMatch> match_fingerprint(const RegistryStore& store,
                                                  const RasterImage& img,
                                                  int max_distance = kDefaultMaxHashDistance);

} // namespace markinspect
