#include "markinspect/containers.hpp"

#include <array>
#include <cstring>

namespace markinspect {

namespace {

    constexpr uint8_t kPngSignature[8] = { 0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A };

    bool is_chunk_type_char(uint8_t c)
    {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
    }

    ContainerMap parse_png(const FileBlob& blob)
    {
        const ByteSpan data = blob.span();
        if (data.size() < 8 || std::memcmp(data.data(), kPngSignature, 8) != 0)
            raise(Errc::CorruptContainer, "missing PNG signature");

        ContainerMap map;
        map.format = ImageFormat::Png;
        size_t pos = 8;
        bool saw_iend = false;

        while (pos < data.size()) {
            if (data.size() - pos < 12)
                raise(Errc::CorruptContainer,
                      "truncated chunk header at offset " + std::to_string(pos));
            const uint32_t len = static_cast<uint32_t>(data[pos]) << 24
                | static_cast<uint32_t>(data[pos + 1]) << 16
                | static_cast<uint32_t>(data[pos + 2]) << 8 | data[pos + 3];
            if (len > 0x7FFFFFFF)
                raise(Errc::CorruptContainer, "chunk length exceeds PNG limit");
            std::string type(reinterpret_cast<const char*>(data.data() + pos + 4), 4);
            for (char c : type)
                if (!is_chunk_type_char(static_cast<uint8_t>(c)))
                    raise(Errc::CorruptContainer,
                          "invalid chunk type at offset " + std::to_string(pos));
            if (data.size() - pos - 8 < static_cast<size_t>(len) + 4)
                raise(Errc::CorruptContainer,
                      "truncated chunk " + type + " at offset " + std::to_string(pos));

            const uint32_t stored_crc = static_cast<uint32_t>(data[pos + 8 + len]) << 24
                | static_cast<uint32_t>(data[pos + 9 + len]) << 16
                | static_cast<uint32_t>(data[pos + 10 + len]) << 8 | data[pos + 11 + len];
            const uint32_t computed = crc32_ieee(data.subspan(pos + 4, 4 + len));
            if (stored_crc != computed)
                raise(Errc::CorruptContainer, "bad CRC for chunk " + type);

            if (map.entries.empty() && type != "IHDR")
                raise(Errc::CorruptContainer, "first chunk is not IHDR");

            map.entries.push_back({ EntryKind::PngChunk, type, pos, 12ull + len, 0 });
            pos += 12ull + len;

            if (type == "IEND") {
                saw_iend = true;
                break;
            }
        }

        if (!saw_iend)
            raise(Errc::CorruptContainer, "missing IEND chunk");
        if (pos != data.size())
            raise(Errc::CorruptContainer, "trailing bytes after IEND");
        return map;
    }

    bool marker_has_payload(uint8_t marker)
    {
        return !(marker == 0xD8 || marker == 0xD9 || marker == 0x01
                 || (marker >= 0xD0 && marker <= 0xD7));
    }

    ContainerMap parse_jpeg(const FileBlob& blob)
    {
        const ByteSpan data = blob.span();
        if (data.size() < 2 || data[0] != 0xFF || data[1] != 0xD8)
            raise(Errc::CorruptContainer, "missing SOI marker");

        ContainerMap map;
        map.format = ImageFormat::Jpeg;
        map.entries.push_back({ EntryKind::JpegSegment, "SOI", 0, 2, 0xD8 });
        size_t pos = 2;

        while (true) {
            if (data.size() - pos < 2)
                raise(Errc::CorruptContainer, "unexpected end of stream before EOI");
            if (data[pos] != 0xFF)
                raise(Errc::CorruptContainer,
                      "expected marker at offset " + std::to_string(pos));
            const uint8_t marker = data[pos + 1];
            if (marker == 0xFF || marker == 0x00)
                raise(Errc::CorruptContainer,
                      "stray fill byte at offset " + std::to_string(pos));

            if (marker == 0xD9) {
                map.entries.push_back({ EntryKind::JpegSegment, "EOI", pos, 2, 0xD9 });
                pos += 2;
                break;
            }
            if (!marker_has_payload(marker))
                raise(Errc::CorruptContainer,
                      std::string("unexpected marker ") + jpeg_marker_name(marker)
                          + " outside entropy-coded data");

            if (data.size() - pos < 4)
                raise(Errc::CorruptContainer, "truncated segment length");
            const size_t seg_len = static_cast<size_t>(data[pos + 2]) << 8 | data[pos + 3];
            if (seg_len < 2)
                raise(Errc::CorruptContainer, "segment length below minimum");
            if (data.size() - pos - 2 < seg_len)
                raise(Errc::CorruptContainer,
                      std::string("truncated ") + jpeg_marker_name(marker) + " segment");

            map.entries.push_back({ EntryKind::JpegSegment, jpeg_marker_name(marker), pos,
                                    2 + seg_len, marker });
            pos += 2 + seg_len;

            if (marker == 0xDA) {
                // entropy-coded data runs to the next non-RST, non-stuffed marker
                const size_t ecs_start = pos;
                while (true) {
                    if (data.size() - pos < 2)
                        raise(Errc::CorruptContainer, "entropy data ends without EOI");
                    if (data[pos] == 0xFF && data[pos + 1] != 0x00
                        && !(data[pos + 1] >= 0xD0 && data[pos + 1] <= 0xD7))
                        break;
                    ++pos;
                }
                if (pos > ecs_start)
                    map.entries.push_back(
                        { EntryKind::JpegSegment, "ECS", ecs_start, pos - ecs_start, 0 });
            }
        }

        if (pos != data.size())
            raise(Errc::CorruptContainer, "trailing bytes after EOI");
        return map;
    }

} // namespace

const ContainerEntry* ContainerMap::find(const std::string& type_code) const
{
    for (const auto& e : entries)
        if (e.type_code == type_code)
            return &e;
    return nullptr;
}

ContainerMap parse_containers(const FileBlob& blob)
{
    switch (blob.format) {
    case ImageFormat::Png: return parse_png(blob);
    case ImageFormat::Jpeg: return parse_jpeg(blob);
    case ImageFormat::Unknown: break;
    }
    raise(Errc::UnsupportedFormat, "unrecognized container format");
}

Bytes serialize_containers(const ContainerMap& map, const FileBlob& source)
{
    Bytes out = map.format == ImageFormat::Png ? Bytes(kPngSignature, kPngSignature + 8)
                                               : Bytes();
    out.reserve(source.bytes.size());
    for (const auto& e : map.entries) {
        if (e.offset + e.length > source.bytes.size())
            raise(Errc::CorruptContainer, "entry range outside source blob");
        put_bytes(out, source.span().subspan(e.offset, e.length));
    }
    return out;
}

ByteSpan entry_payload(const ContainerEntry& entry, const FileBlob& source)
{
    const ByteSpan data = source.span();
    if (entry.offset + entry.length > data.size())
        raise(Errc::CorruptContainer, "entry range outside source blob");
    if (entry.kind == EntryKind::PngChunk)
        return data.subspan(entry.offset + 8, entry.length - 12);
    if (entry.is_entropy_data())
        return data.subspan(entry.offset, entry.length);
    if (entry.length <= 4)
        return {}; // bare markers (SOI, EOI)
    return data.subspan(entry.offset + 4, entry.length - 4);
}

Bytes make_png_chunk(const std::string& type, ByteSpan data)
{
    if (type.size() != 4)
        raise(Errc::BadParams, "PNG chunk type must be 4 characters");
    Bytes out;
    put_u32be(out, static_cast<uint32_t>(data.size()));
    Bytes body;
    put_text(body, type);
    put_bytes(body, data);
    put_bytes(out, body);
    put_u32be(out, crc32_ieee(body));
    return out;
}

Bytes make_jpeg_segment(uint8_t marker, ByteSpan payload)
{
    if (payload.size() + 2 > 0xFFFF)
        raise(Errc::BadParams, "JPEG segment payload too large");
    Bytes out;
    out.push_back(0xFF);
    out.push_back(marker);
    put_u16be(out, static_cast<uint16_t>(payload.size() + 2));
    put_bytes(out, payload);
    return out;
}

const char* jpeg_marker_name(uint8_t marker)
{
    switch (marker) {
    case 0xD8: return "SOI";
    case 0xD9: return "EOI";
    case 0xDA: return "SOS";
    case 0xDB: return "DQT";
    case 0xC4: return "DHT";
    case 0xC0: return "SOF0";
    case 0xC1: return "SOF1";
    case 0xC2: return "SOF2";
    case 0xC3: return "SOF3";
    case 0xC5: return "SOF5";
    case 0xC6: return "SOF6";
    case 0xC7: return "SOF7";
    case 0xC9: return "SOF9";
    case 0xCA: return "SOF10";
    case 0xCB: return "SOF11";
    case 0xCD: return "SOF13";
    case 0xCE: return "SOF14";
    case 0xCF: return "SOF15";
    case 0xCC: return "DAC";
    case 0xC8: return "JPG";
    case 0xDD: return "DRI";
    case 0xFE: return "COM";
    case 0x01: return "TEM";
    default:
        if (marker >= 0xE0 && marker <= 0xEF) {
            static const char* app[16] = { "APP0", "APP1", "APP2", "APP3", "APP4", "APP5",
                                           "APP6", "APP7", "APP8", "APP9", "APP10", "APP11",
                                           "APP12", "APP13", "APP14", "APP15" };
            return app[marker - 0xE0];
        }
        if (marker >= 0xD0 && marker <= 0xD7) {
            static const char* rst[8] = { "RST0", "RST1", "RST2", "RST3",
                                          "RST4", "RST5", "RST6", "RST7" };
            return rst[marker - 0xD0];
        }
        return "UNKNOWN";
    }
}

} // namespace markinspect
