#include "markinspect/wm_lsb.hpp"

#include <cstring>

namespace markinspect {

namespace {

    // Visits the LSB-carrying samples in scan order: row-major pixels, color
    // channels interleaved, alpha skipped.
    template <typename Fn>
    void for_each_carrier(const RasterImage& img, size_t limit, Fn&& fn)
    {
        const int cc = img.channel_count();
        const int color_cc = img.color_channel_count();
        const size_t pixels = static_cast<size_t>(img.width) * img.height;
        size_t emitted = 0;
        for (size_t p = 0; p < pixels && emitted < limit; ++p)
            for (int c = 0; c < color_cc && emitted < limit; ++c)
                fn(p * cc + c, emitted++);
    }

} // namespace

size_t lsb_capacity_bits(const RasterImage& img)
{
    return static_cast<size_t>(img.width) * img.height * img.color_channel_count();
}

Bytes build_payload_frame(ByteSpan payload)
{
    if (payload.size() > 0xFFFF)
        raise(Errc::BadParams, "payload exceeds 65535 bytes");
    Bytes frame;
    frame.reserve(kLsbFrameOverhead + payload.size());
    put_text(frame, std::string_view(kLsbFrameMagic, 4));
    put_u16be(frame, static_cast<uint16_t>(payload.size()));
    put_bytes(frame, payload);
    put_u32be(frame, crc32_ieee(frame));
    return frame;
}

RasterImage lsb_embed(const RasterImage& img, ByteSpan payload)
{
    const Bytes frame = build_payload_frame(payload);
    const size_t frame_bits = frame.size() * 8;
    const size_t capacity = lsb_capacity_bits(img);
    if (frame_bits > capacity)
        raise(Errc::CapacityExceeded,
              "frame needs " + std::to_string(frame_bits) + " bits but image carries "
                  + std::to_string(capacity) + " bits");

    RasterImage out = img;
    for_each_carrier(img, frame_bits, [&](size_t sample_index, size_t bit_index) {
        const uint8_t bit = (frame[bit_index / 8] >> (7 - bit_index % 8)) & 1;
        out.samples[sample_index] = static_cast<uint8_t>((out.samples[sample_index] & 0xFE) | bit);
    });
    return out;
}

LsbExtractResult lsb_extract(const RasterImage& img)
{
    const size_t capacity = lsb_capacity_bits(img);
    LsbExtractResult result;
    if (capacity < 48)
        return result; // cannot hold magic + length

    Bytes header((4 + 2));
    for_each_carrier(img, 48, [&](size_t sample_index, size_t bit_index) {
        if (img.samples[sample_index] & 1)
            header[bit_index / 8] |= static_cast<uint8_t>(0x80 >> (bit_index % 8));
    });
    if (std::memcmp(header.data(), kLsbFrameMagic, 4) != 0)
        return result;

    const size_t body_len = static_cast<size_t>(header[4]) << 8 | header[5];
    const size_t frame_len = kLsbFrameOverhead + body_len;
    if (frame_len * 8 > capacity) {
        result.status = LsbStatus::CorruptFrame;
        return result;
    }

    Bytes frame(frame_len);
    for_each_carrier(img, frame_len * 8, [&](size_t sample_index, size_t bit_index) {
        if (img.samples[sample_index] & 1)
            frame[bit_index / 8] |= static_cast<uint8_t>(0x80 >> (bit_index % 8));
    });

    const uint32_t stored = static_cast<uint32_t>(frame[frame_len - 4]) << 24
        | static_cast<uint32_t>(frame[frame_len - 3]) << 16
        | static_cast<uint32_t>(frame[frame_len - 2]) << 8
        | static_cast<uint32_t>(frame[frame_len - 1]);
    const uint32_t computed = crc32_ieee(ByteSpan(frame.data(), frame_len - 4));
    if (stored != computed) {
        result.status = LsbStatus::CorruptFrame;
        return result;
    }

    result.status = LsbStatus::Found;
    result.payload.assign(frame.begin() + 6, frame.begin() + 6 + static_cast<long>(body_len));
    return result;
}

} // namespace markinspect
