#include "markinspect/image.hpp"

#include <png.h>

#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <limits>

namespace markinspect {

namespace {

    constexpr uint8_t kPngSignature[8] = { 0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A };

    struct PngMemReader {
        ByteSpan data;
        size_t pos = 0;
    };

    void png_read_cb(png_structp png, png_bytep out, png_size_t n)
    {
        auto* r = static_cast<PngMemReader*>(png_get_io_ptr(png));
        if (r->pos + n > r->data.size())
            png_error(png, "read past end of stream");
        std::memcpy(out, r->data.data() + r->pos, n);
        r->pos += n;
    }

    void png_write_cb(png_structp png, png_bytep data, png_size_t n)
    {
        auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
        out->insert(out->end(), data, data + n);
    }

    void png_flush_cb(png_structp) { }

    RasterImage decode_png(ByteSpan data)
    {
        PngMemReader reader { data, 0 };
        std::vector<uint8_t> pixels;
        std::vector<png_bytep> row_ptrs;
        int width = 0, height = 0, channel_count = 0;

        png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!png)
            raise(Errc::CorruptStream, "libpng init failed");
        png_infop info = png_create_info_struct(png);
        if (!info) {
            png_destroy_read_struct(&png, nullptr, nullptr);
            raise(Errc::CorruptStream, "libpng init failed");
        }

        if (setjmp(png_jmpbuf(png))) {
            png_destroy_read_struct(&png, &info, nullptr);
            raise(Errc::CorruptStream, "PNG decode failed");
        }

        png_set_read_fn(png, &reader, png_read_cb);
        png_read_info(png, info);

        png_uint_32 w = 0, h = 0;
        int bit_depth = 0, color_type = 0;
        png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

        if (bit_depth == 16)
            png_set_strip_16(png);
        if (color_type == PNG_COLOR_TYPE_PALETTE)
            png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
            png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS))
            png_set_tRNS_to_alpha(png);
        if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
        png_set_interlace_handling(png);
        png_read_update_info(png, info);

        width = static_cast<int>(w);
        height = static_cast<int>(h);
        channel_count = png_get_channels(png, info);
        if (channel_count == 2) {
            // gray that picked up alpha via tRNS expansion
            png_set_gray_to_rgb(png);
            png_read_update_info(png, info);
            channel_count = png_get_channels(png, info);
        }

        size_t rowbytes = png_get_rowbytes(png, info);
        pixels.resize(rowbytes * height);
        row_ptrs.resize(height);
        for (int y = 0; y < height; ++y)
            row_ptrs[y] = pixels.data() + static_cast<size_t>(y) * rowbytes;

        png_read_image(png, row_ptrs.data());
        png_read_end(png, nullptr);
        png_destroy_read_struct(&png, &info, nullptr);

        RasterImage img;
        img.width = width;
        img.height = height;
        switch (channel_count) {
        case 1: img.channels = Channels::Gray; break;
        case 3: img.channels = Channels::Rgb; break;
        case 4: img.channels = Channels::Rgba; break;
        default: raise(Errc::CorruptStream, "unexpected PNG channel count");
        }
        // rows are tightly packed for 8-bit output
        img.samples = std::move(pixels);
        img.samples.resize(static_cast<size_t>(width) * height * channel_count);
        return img;
    }

    Bytes encode_png(const RasterImage& img)
    {
        Bytes out;
        std::vector<png_bytep> row_ptrs(img.height);
        const int channel_count = img.channel_count();
        for (int y = 0; y < img.height; ++y)
            row_ptrs[y] = const_cast<png_bytep>(
                img.samples.data() + static_cast<size_t>(y) * img.width * channel_count);

        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!png)
            raise(Errc::EncodeFailure, "libpng init failed");
        png_infop info = png_create_info_struct(png);
        if (!info) {
            png_destroy_write_struct(&png, nullptr);
            raise(Errc::EncodeFailure, "libpng init failed");
        }

        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            raise(Errc::EncodeFailure, "PNG encode failed");
        }

        png_set_write_fn(png, &out, png_write_cb, png_flush_cb);

        int color_type = PNG_COLOR_TYPE_RGB;
        if (img.channels == Channels::Gray)
            color_type = PNG_COLOR_TYPE_GRAY;
        else if (img.channels == Channels::Rgba)
            color_type = PNG_COLOR_TYPE_RGB_ALPHA;

        png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                     static_cast<png_uint_32>(img.height), 8, color_type,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        png_write_image(png, row_ptrs.data());
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        return out;
    }

    struct JpegErrorMgr {
        jpeg_error_mgr pub;
        jmp_buf jb;
        char message[JMSG_LENGTH_MAX];
    };

    void jpeg_error_exit_cb(j_common_ptr cinfo)
    {
        auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
        (*cinfo->err->format_message)(cinfo, err->message);
        longjmp(err->jb, 1);
    }

    RasterImage decode_jpeg(ByteSpan data)
    {
        jpeg_decompress_struct cinfo;
        JpegErrorMgr jerr;
        std::vector<uint8_t> pixels;
        bool progressive = false;

        cinfo.err = jpeg_std_error(&jerr.pub);
        jerr.pub.error_exit = jpeg_error_exit_cb;
        jerr.message[0] = '\0';

        if (setjmp(jerr.jb)) {
            jpeg_destroy_decompress(&cinfo);
            raise(Errc::CorruptStream, std::string("JPEG decode failed: ") + jerr.message);
        }

        jpeg_create_decompress(&cinfo);
        jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
        jpeg_read_header(&cinfo, TRUE);
        progressive = cinfo.progressive_mode != 0;
        if (progressive) {
            jpeg_destroy_decompress(&cinfo);
            raise(Errc::UnsupportedFormat, "progressive JPEG is not supported");
        }

        cinfo.out_color_space = JCS_RGB;
        jpeg_start_decompress(&cinfo);

        const int width = static_cast<int>(cinfo.output_width);
        const int height = static_cast<int>(cinfo.output_height);
        const size_t row_stride = static_cast<size_t>(width) * 3;
        pixels.resize(row_stride * height);

        while (cinfo.output_scanline < cinfo.output_height) {
            JSAMPROW row = pixels.data() + row_stride * cinfo.output_scanline;
            jpeg_read_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_decompress(&cinfo);
        const long warnings = cinfo.err->num_warnings;
        jpeg_destroy_decompress(&cinfo);

        if (warnings > 0)
            raise(Errc::CorruptStream, "JPEG stream damaged (decoder warnings)");

        RasterImage img;
        img.width = width;
        img.height = height;
        img.channels = Channels::Rgb;
        img.samples = std::move(pixels);
        return img;
    }

    Bytes encode_jpeg(const RasterImage& img, int quality)
    {
        jpeg_compress_struct cinfo;
        JpegErrorMgr jerr;
        unsigned char* outbuffer = nullptr;
        unsigned long outsize = 0;
        std::vector<uint8_t> rgb_row;

        const bool gray = img.channels == Channels::Gray;
        if (!gray)
            rgb_row.resize(static_cast<size_t>(img.width) * 3);

        cinfo.err = jpeg_std_error(&jerr.pub);
        jerr.pub.error_exit = jpeg_error_exit_cb;
        jerr.message[0] = '\0';

        if (setjmp(jerr.jb)) {
            jpeg_destroy_compress(&cinfo);
            if (outbuffer)
                free(outbuffer);
            raise(Errc::EncodeFailure, std::string("JPEG encode failed: ") + jerr.message);
        }

        jpeg_create_compress(&cinfo);
        jpeg_mem_dest(&cinfo, &outbuffer, &outsize);

        cinfo.image_width = static_cast<JDIMENSION>(img.width);
        cinfo.image_height = static_cast<JDIMENSION>(img.height);
        cinfo.input_components = gray ? 1 : 3;
        cinfo.in_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
        jpeg_set_defaults(&cinfo);
        jpeg_set_quality(&cinfo, std::clamp(quality, 1, 100), TRUE);
        // 4:4:4 keeps the lossy path defined by the quantization tables alone
        for (int c = 0; c < cinfo.num_components; ++c) {
            cinfo.comp_info[c].h_samp_factor = 1;
            cinfo.comp_info[c].v_samp_factor = 1;
        }

        jpeg_start_compress(&cinfo, TRUE);
        const int src_channels = img.channel_count();
        while (cinfo.next_scanline < cinfo.image_height) {
            const uint8_t* src = img.samples.data()
                + static_cast<size_t>(cinfo.next_scanline) * img.width * src_channels;
            JSAMPROW row;
            if (gray || img.channels == Channels::Rgb) {
                row = const_cast<JSAMPROW>(src);
            } else {
                // drop alpha
                for (int x = 0; x < img.width; ++x) {
                    rgb_row[static_cast<size_t>(x) * 3 + 0] = src[x * 4 + 0];
                    rgb_row[static_cast<size_t>(x) * 3 + 1] = src[x * 4 + 1];
                    rgb_row[static_cast<size_t>(x) * 3 + 2] = src[x * 4 + 2];
                }
                row = rgb_row.data();
            }
            jpeg_write_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_compress(&cinfo);
        jpeg_destroy_compress(&cinfo);

        Bytes out(outbuffer, outbuffer + outsize);
        free(outbuffer);
        return out;
    }

} // namespace

const char* image_format_name(ImageFormat f)
{
    switch (f) {
    case ImageFormat::Png: return "png";
    case ImageFormat::Jpeg: return "jpeg";
    case ImageFormat::Unknown: return "unknown";
    }
    return "unknown";
}

ImageFormat detect_format(ByteSpan data)
{
    if (data.size() >= 8 && std::memcmp(data.data(), kPngSignature, 8) == 0)
        return ImageFormat::Png;
    if (data.size() >= 2 && data[0] == 0xFF && data[1] == 0xD8)
        return ImageFormat::Jpeg;
    return ImageFormat::Unknown;
}

FileBlob FileBlob::from_bytes(Bytes data)
{
    FileBlob blob;
    blob.format = detect_format(data);
    blob.bytes = std::move(data);
    return blob;
}

FileBlob FileBlob::from_file(const std::string& path)
{
    return from_bytes(read_file(path));
}

RasterImage RasterImage::blank(int w, int h, Channels ch, uint8_t fill)
{
    RasterImage img;
    img.width = w;
    img.height = h;
    img.channels = ch;
    img.samples.assign(static_cast<size_t>(w) * h * img.channel_count(), fill);
    return img;
}

RasterImage decode_raster(const FileBlob& blob)
{
    switch (blob.format) {
    case ImageFormat::Png: return decode_png(blob.span());
    case ImageFormat::Jpeg: return decode_jpeg(blob.span());
    case ImageFormat::Unknown: break;
    }
    raise(Errc::UnsupportedFormat, "unrecognized image magic bytes");
}

FileBlob encode_raster(const RasterImage& img, ImageFormat format, std::optional<int> quality)
{
    if (img.width < 1 || img.height < 1 || img.samples.empty())
        raise(Errc::EncodeFailure, "zero-sized image");
    if (img.samples.size() != static_cast<size_t>(img.width) * img.height * img.channel_count())
        raise(Errc::EncodeFailure, "sample buffer does not match dimensions");

    Bytes out;
    switch (format) {
    case ImageFormat::Png:
        out = encode_png(img);
        break;
    case ImageFormat::Jpeg:
        out = encode_jpeg(img, quality.value_or(90));
        break;
    case ImageFormat::Unknown:
        raise(Errc::UnsupportedFormat, "cannot encode to unknown format");
    }
    return FileBlob::from_bytes(std::move(out));
}

Plane rgb_to_luma(const RasterImage& img)
{
    Plane plane(img.width, img.height);
    const int cc = img.channel_count();
    const uint8_t* s = img.samples.data();
    if (img.channels == Channels::Gray) {
        for (size_t i = 0; i < plane.v.size(); ++i)
            plane.v[i] = s[i];
        return plane;
    }
    for (size_t i = 0; i < plane.v.size(); ++i) {
        const uint8_t* px = s + i * cc;
        plane.v[i] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
    return plane;
}

uint8_t clamp_round_u8(double v)
{
    if (v <= 0.0)
        return 0;
    if (v >= 255.0)
        return 255;
    return static_cast<uint8_t>(std::lround(v));
}

RasterImage merge_luma(const RasterImage& original, const Plane& new_luma)
{
    if (new_luma.width != original.width || new_luma.height != original.height)
        raise(Errc::DimensionMismatch, "luma plane does not match image dimensions");

    RasterImage out = original;
    const int cc = original.channel_count();
    if (original.channels == Channels::Gray) {
        for (size_t i = 0; i < new_luma.v.size(); ++i)
            out.samples[i] = clamp_round_u8(new_luma.v[i]);
        return out;
    }

    const Plane old_luma = rgb_to_luma(original);
    for (size_t i = 0; i < new_luma.v.size(); ++i) {
        const double delta = new_luma.v[i] - old_luma.v[i];
        const uint8_t* src = original.samples.data() + i * cc;
        uint8_t* dst = out.samples.data() + i * cc;
        for (int c = 0; c < 3; ++c)
            dst[c] = clamp_round_u8(static_cast<double>(src[c]) + delta);
        // alpha (c == 3) left as copied
    }
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h)
{
    if (out_w < 1 || out_h < 1)
        raise(Errc::BadParams, "resize target must be at least 1x1");

    RasterImage out = RasterImage::blank(out_w, out_h, img.channels);
    const int cc = img.channel_count();
    const double sx_scale = static_cast<double>(img.width) / out_w;
    const double sy_scale = static_cast<double>(img.height) / out_h;

    for (int y = 0; y < out_h; ++y) {
        double sy = (y + 0.5) * sy_scale - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_w; ++x) {
            double sx = (x + 0.5) * sx_scale - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - x0;
            for (int c = 0; c < cc; ++c) {
                const double v00 = img.sample(y0, x0, c);
                const double v01 = img.sample(y0, x1, c);
                const double v10 = img.sample(y1, x0, c);
                const double v11 = img.sample(y1, x1, c);
                const double v = v00 * (1 - fy) * (1 - fx) + v01 * (1 - fy) * fx
                    + v10 * fy * (1 - fx) + v11 * fy * fx;
                out.sample(y, x, c) = clamp_round_u8(v);
            }
        }
    }
    return out;
}

Plane resize_bilinear(const Plane& plane, int out_w, int out_h)
{
    if (out_w < 1 || out_h < 1)
        raise(Errc::BadParams, "resize target must be at least 1x1");
    if (plane.empty())
        raise(Errc::EmptyPlane, "cannot resize empty plane");

    Plane out(out_w, out_h);
    const double sx_scale = static_cast<double>(plane.width) / out_w;
    const double sy_scale = static_cast<double>(plane.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double sy = (y + 0.5) * sy_scale - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(plane.height - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, plane.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_w; ++x) {
            double sx = (x + 0.5) * sx_scale - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(plane.width - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, plane.width - 1);
            const double fx = sx - x0;
            out.at(y, x) = plane.at(y0, x0) * (1 - fy) * (1 - fx)
                + plane.at(y0, x1) * (1 - fy) * fx
                + plane.at(y1, x0) * fy * (1 - fx)
                + plane.at(y1, x1) * fy * fx;
        }
    }
    return out;
}

RasterImage crop(const RasterImage& img, int x, int y, int w, int h)
{
    if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width || y + h > img.height)
        raise(Errc::BadParams, "crop rectangle out of bounds");
    RasterImage out = RasterImage::blank(w, h, img.channels);
    const int cc = img.channel_count();
    for (int row = 0; row < h; ++row) {
        const uint8_t* src = img.samples.data()
            + (static_cast<size_t>(y + row) * img.width + x) * cc;
        uint8_t* dst = out.samples.data() + static_cast<size_t>(row) * w * cc;
        std::memcpy(dst, src, static_cast<size_t>(w) * cc);
    }
    return out;
}

double psnr(const RasterImage& a, const RasterImage& b)
{
    if (!a.same_dimensions(b))
        raise(Errc::DimensionMismatch, "PSNR requires identical dimensions and channels");
    double se = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        const double d = static_cast<double>(a.samples[i]) - static_cast<double>(b.samples[i]);
        se += d * d;
    }
    if (se == 0.0)
        return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.samples.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace markinspect
