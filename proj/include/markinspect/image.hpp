#pragma once

#include "markinspect/bytes.hpp"

#include <optional>

namespace markinspect {

enum class ImageFormat { Png, Jpeg, Unknown };

const char* image_format_name(ImageFormat f);

// Raw file bytes with the format derived solely from magic bytes.
struct FileBlob {
    Bytes bytes;
    ImageFormat format = ImageFormat::Unknown;

    static FileBlob from_bytes(Bytes data);
    static FileBlob from_file(const std::string& path);

    ByteSpan span() const { return ByteSpan(bytes); }
};

ImageFormat detect_format(ByteSpan data);

enum class Channels { Gray, Rgb, Rgba };

// Double-precision sample plane used by the DSP paths.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(int w, int h)
        : width(w)
        , height(h)
        , v(static_cast<size_t>(w) * static_cast<size_t>(h), 0.0)
    {
    }

    double& at(int y, int x) { return v[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return v[static_cast<size_t>(y) * width + x]; }
    bool empty() const { return width == 0 || height == 0; }
};

// Decoded pixels: row-major, channel-interleaved 8-bit samples.
struct RasterImage {
    int width = 0;
    int height = 0;
    Channels channels = Channels::Rgb;
    std::vector<uint8_t> samples;

    static RasterImage blank(int w, int h, Channels ch, uint8_t fill = 0);

    int channel_count() const
    {
        switch (channels) {
        case Channels::Gray: return 1;
        case Channels::Rgb: return 3;
        case Channels::Rgba: return 4;
        }
        return 0;
    }

    // Channels that carry color (alpha excluded).
    int color_channel_count() const { return channels == Channels::Gray ? 1 : 3; }

    uint8_t sample(int y, int x, int c) const
    {
        return samples[(static_cast<size_t>(y) * width + x) * channel_count() + c];
    }

    uint8_t& sample(int y, int x, int c)
    {
        return samples[(static_cast<size_t>(y) * width + x) * channel_count() + c];
    }

    bool same_dimensions(const RasterImage& other) const
    {
        return width == other.width && height == other.height && channels == other.channels;
    }
};

// PNG decode preserves alpha; JPEG always decodes to RGB. Progressive JPEG is
// rejected (UnsupportedFormat); truncated or CRC-damaged streams raise
// CorruptStream.
RasterImage decode_raster(const FileBlob& blob);

// PNG is lossless. JPEG is baseline sequential 4:4:4; quality outside 1..100
// is clamped. Raises EncodeFailure for zero-sized images.
FileBlob encode_raster(const RasterImage& img, ImageFormat format,
                       std::optional<int> quality = std::nullopt);

// BT.601: Y = 0.299 R + 0.587 G + 0.114 B. Gray passes through.
Plane rgb_to_luma(const RasterImage& img);

// Rebuilds an image from a replacement luma plane: the per-pixel luma delta is
// added to each color channel, so chroma differences are preserved exactly and
// re-derived luma equals the requested plane up to rounding. Alpha untouched.
RasterImage merge_luma(const RasterImage& original, const Plane& new_luma);

uint8_t clamp_round_u8(double v); // clamp to [0,255], round half away from zero

RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h);
Plane resize_bilinear(const Plane& plane, int out_w, int out_h);

RasterImage crop(const RasterImage& img, int x, int y, int w, int h);

// Peak signal-to-noise ratio over all samples; +inf for identical images.
double psnr(const RasterImage& a, const RasterImage& b);

} // namespace markinspect
