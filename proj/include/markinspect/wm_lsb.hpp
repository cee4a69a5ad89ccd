#pragma once

#include "markinspect/image.hpp"

namespace markinspect {

// Framed spatial-domain codec: payload bits ride in the least significant bit
// of each color sample, row-major and channel-interleaved, alpha excluded.
// Frame layout: "AIWM" | u16be body length | body | crc32(be) over the rest.

constexpr char kLsbFrameMagic[4] = { 'A', 'I', 'W', 'M' };
constexpr size_t kLsbFrameOverhead = 4 + 2 + 4; // magic + length + crc

size_t lsb_capacity_bits(const RasterImage& img);

Bytes build_payload_frame(ByteSpan payload); // raises BadParams above 65535 bytes

RasterImage lsb_embed(const RasterImage& img, ByteSpan payload);

enum class LsbStatus { Found, NotFound, CorruptFrame };

struct LsbExtractResult {
    LsbStatus status = LsbStatus::NotFound;
    Bytes payload; // valid only when status == Found
};

LsbExtractResult lsb_extract(const RasterImage& img);

} // namespace markinspect
