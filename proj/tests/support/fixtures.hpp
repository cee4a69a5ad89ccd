#pragma once

#include "markinspect/containers.hpp"

#include <string>
#include <vector>

namespace markinspect::test {

// Minimal TIFF/EXIF writer covering the tag types the parser reads. Values are
// laid out with an IFD0 and an optional Exif sub-IFD, in either byte order.
class TiffBuilder {
public:
    explicit TiffBuilder(bool little_endian)
        : le_(little_endian)
    {
    }

    TiffBuilder& ascii(uint16_t tag, const std::string& value, bool exif_ifd = false)
    {
        entries(exif_ifd).push_back({ tag, 2, value, 0 });
        return *this;
    }

    TiffBuilder& u16(uint16_t tag, uint16_t value, bool exif_ifd = false)
    {
        entries(exif_ifd).push_back({ tag, 3, {}, value });
        return *this;
    }

    TiffBuilder& u32(uint16_t tag, uint32_t value, bool exif_ifd = false)
    {
        entries(exif_ifd).push_back({ tag, 4, {}, value });
        return *this;
    }

    Bytes build() const
    {
        Bytes out;
        auto p16 = [&](Bytes& b, uint16_t v) { le_ ? put_u16le(b, v) : put_u16be(b, v); };
        auto p32 = [&](Bytes& b, uint32_t v) { le_ ? put_u32le(b, v) : put_u32be(b, v); };

        out.push_back(le_ ? 'I' : 'M');
        out.push_back(le_ ? 'I' : 'M');
        p16(out, 42);
        p32(out, 8); // IFD0 offset

        std::vector<Entry> ifd0 = ifd0_;
        const bool has_exif = !exif_ifd_.empty();
        if (has_exif)
            ifd0.push_back({ 0x8769, 4, {}, 0 }); // pointer patched below

        // IFD0 header+entries+next pointer, then its long values, then Exif IFD.
        const size_t ifd0_size = 2 + ifd0.size() * 12 + 4;
        size_t tail_offset = 8 + ifd0_size;
        Bytes tail;

        Bytes ifd;
        p16(ifd, static_cast<uint16_t>(ifd0.size()));
        for (const auto& e : ifd0) {
            if (e.tag == 0x8769)
                continue; // handled after tail grows
            append_entry(ifd, tail, tail_offset, e, p16, p32);
        }
        if (has_exif) {
            // Exif IFD lands right after IFD0's overflow values.
            const size_t exif_ifd_pos = tail_offset + tail.size();
            Bytes exif_ifd_bytes;
            Bytes exif_tail;
            size_t exif_tail_offset = exif_ifd_pos + 2 + exif_ifd_.size() * 12 + 4;
            p16(exif_ifd_bytes, static_cast<uint16_t>(exif_ifd_.size()));
            for (const auto& e : exif_ifd_)
                append_entry(exif_ifd_bytes, exif_tail, exif_tail_offset, e, p16, p32);
            p32(exif_ifd_bytes, 0); // no next IFD

            p16(ifd, 0x8769);
            p16(ifd, 4);
            p32(ifd, 1);
            p32(ifd, static_cast<uint32_t>(exif_ifd_pos));

            p32(ifd, 0); // IFD0 next pointer
            put_bytes(out, ifd);
            put_bytes(out, tail);
            put_bytes(out, exif_ifd_bytes);
            put_bytes(out, exif_tail);
            return out;
        }

        p32(ifd, 0); // next IFD pointer
        put_bytes(out, ifd);
        put_bytes(out, tail);
        return out;
    }

private:
    struct Entry {
        uint16_t tag;
        uint16_t type; // 2 ASCII, 3 SHORT, 4 LONG
        std::string text;
        uint32_t numeric;
    };

    std::vector<Entry>& entries(bool exif) { return exif ? exif_ifd_ : ifd0_; }

    template <typename P16, typename P32>
    static void append_entry(Bytes& ifd, Bytes& tail, size_t& tail_offset, const Entry& e,
                             P16 p16, P32 p32)
    {
        p16(ifd, e.tag);
        p16(ifd, e.type);
        if (e.type == 2) {
            const uint32_t count = static_cast<uint32_t>(e.text.size() + 1);
            p32(ifd, count);
            if (count <= 4) {
                Bytes inline_val(e.text.begin(), e.text.end());
                inline_val.resize(4, 0);
                put_bytes(ifd, inline_val);
            } else {
                p32(ifd, static_cast<uint32_t>(tail_offset + tail.size()));
                put_text(tail, e.text);
                tail.push_back(0);
            }
        } else if (e.type == 3) {
            p32(ifd, 1);
            p16(ifd, static_cast<uint16_t>(e.numeric));
            p16(ifd, 0);
        } else {
            p32(ifd, 1);
            p32(ifd, e.numeric);
        }
    }

    bool le_;
    std::vector<Entry> ifd0_;
    std::vector<Entry> exif_ifd_;
};

struct IimDataset {
    uint8_t record;
    uint8_t dataset;
    std::string value;
};

inline Bytes build_iim(const std::vector<IimDataset>& datasets)
{
    Bytes out;
    for (const auto& d : datasets) {
        out.push_back(0x1C);
        out.push_back(d.record);
        out.push_back(d.dataset);
        put_u16be(out, static_cast<uint16_t>(d.value.size()));
        put_text(out, d.value);
    }
    return out;
}

// APP13 payload: "Photoshop 3.0\0" + one 8BIM resource (0x0404) holding IIM.
inline Bytes build_app13_payload(const std::vector<IimDataset>& datasets)
{
    Bytes out;
    put_text(out, "Photoshop 3.0");
    out.push_back(0);
    put_text(out, "8BIM");
    put_u16be(out, 0x0404);
    out.push_back(0); // empty pascal name
    out.push_back(0); // pad to even
    const Bytes iim = build_iim(datasets);
    put_u32be(out, static_cast<uint32_t>(iim.size()));
    put_bytes(out, iim);
    if (iim.size() % 2 != 0)
        out.push_back(0);
    return out;
}

inline Bytes exif_app1_payload(const Bytes& tiff)
{
    Bytes out;
    put_text(out, std::string_view("Exif\0\0", 6));
    put_bytes(out, tiff);
    return out;
}

inline Bytes xmp_app1_payload(const std::string& packet)
{
    Bytes out;
    put_text(out, "http://ns.adobe.com/xap/1.0/");
    out.push_back(0);
    put_text(out, packet);
    return out;
}

// Splices extra marker segments into a JPEG right after SOI.
inline Bytes insert_jpeg_segments(const Bytes& jpeg, const std::vector<Bytes>& segments)
{
    Bytes out(jpeg.begin(), jpeg.begin() + 2);
    for (const auto& s : segments)
        put_bytes(out, s);
    out.insert(out.end(), jpeg.begin() + 2, jpeg.end());
    return out;
}

// Splices extra chunks into a PNG just before IEND.
inline Bytes insert_png_chunks(const Bytes& png, const std::vector<Bytes>& chunks)
{
    const Bytes iend = make_png_chunk("IEND", {});
    Bytes out(png.begin(), png.end() - static_cast<long>(iend.size()));
    for (const auto& c : chunks)
        put_bytes(out, c);
    out.insert(out.end(), png.end() - static_cast<long>(iend.size()), png.end());
    return out;
}

// Test-side JUMBF construction, independent of the production fixture writer.
inline Bytes jumbf_raw_box(const std::string& type, const Bytes& payload)
{
    Bytes out;
    put_u32be(out, static_cast<uint32_t>(8 + payload.size()));
    put_text(out, type);
    put_bytes(out, payload);
    return out;
}

inline Bytes jumbf_superbox(const std::string& label, const std::vector<Bytes>& children)
{
    Bytes desc;
    for (int i = 0; i < 16; ++i)
        desc.push_back(0x40); // opaque type UUID
    desc.push_back(0x03);     // requestable + label
    put_text(desc, label);
    desc.push_back(0);

    Bytes payload = jumbf_raw_box("jumd", desc);
    for (const auto& c : children)
        put_bytes(payload, c);
    return jumbf_raw_box("jumb", payload);
}

} // namespace markinspect::test
