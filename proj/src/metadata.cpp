#include "markinspect/metadata.hpp"

#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <map>

namespace markinspect {

namespace {

    std::string lower(std::string_view s)
    {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    }

    bool contains_ci(std::string_view haystack, std::string_view needle)
    {
        return lower(haystack).find(lower(needle)) != std::string::npos;
    }

    bool ends_with_ci(std::string_view s, std::string_view suffix)
    {
        if (s.size() < suffix.size())
            return false;
        return lower(s.substr(s.size() - suffix.size())) == lower(suffix);
    }

    void warn(std::vector<MetadataRecord>& records, const std::string& where,
              const std::string& why)
    {
        records.push_back({ MetadataStandard::Warning, where, why });
    }

    Bytes inflate_bytes(ByteSpan data, size_t size_limit = 1 << 24)
    {
        Bytes out(std::min<size_t>(std::max<size_t>(data.size() * 4, 1024), size_limit));
        while (true) {
            uLongf out_len = static_cast<uLongf>(out.size());
            const int rc = uncompress(out.data(), &out_len, data.data(),
                                      static_cast<uLong>(data.size()));
            if (rc == Z_OK) {
                out.resize(out_len);
                return out;
            }
            if (rc == Z_BUF_ERROR && out.size() < size_limit) {
                out.resize(std::min(out.size() * 2, size_limit));
                continue;
            }
            raise(Errc::CorruptContainer, "zlib inflate failed");
        }
    }

    // ---- EXIF / TIFF -------------------------------------------------------

    const char* exif_tag_name(uint16_t tag)
    {
        switch (tag) {
        case 0x010E: return "ImageDescription";
        case 0x010F: return "Make";
        case 0x0110: return "Model";
        case 0x0112: return "Orientation";
        case 0x011A: return "XResolution";
        case 0x011B: return "YResolution";
        case 0x0128: return "ResolutionUnit";
        case 0x0131: return "Software";
        case 0x0132: return "DateTime";
        case 0x013B: return "Artist";
        case 0x8298: return "Copyright";
        case 0x829A: return "ExposureTime";
        case 0x829D: return "FNumber";
        case 0x8769: return "ExifIFDPointer";
        case 0x8827: return "PhotographicSensitivity";
        case 0x9003: return "DateTimeOriginal";
        case 0x9004: return "DateTimeDigitized";
        case 0x920A: return "FocalLength";
        case 0x927C: return "MakerNote";
        case 0x9286: return "UserComment";
        case 0xA001: return "ColorSpace";
        case 0xA002: return "PixelXDimension";
        case 0xA003: return "PixelYDimension";
        case 0xA434: return "LensModel";
        default: return nullptr;
        }
    }

    size_t tiff_type_size(uint16_t type)
    {
        switch (type) {
        case 1: case 2: case 7: return 1; // BYTE, ASCII, UNDEFINED
        case 3: return 2;                 // SHORT
        case 4: case 9: return 4;         // LONG, SLONG
        case 5: case 10: return 8;        // RATIONAL, SRATIONAL
        default: return 0;
        }
    }

    struct TiffView {
        ByteSpan data;
        bool little_endian = true;

        uint16_t u16(size_t off) const
        {
            return little_endian
                ? static_cast<uint16_t>(data[off] | data[off + 1] << 8)
                : static_cast<uint16_t>(data[off] << 8 | data[off + 1]);
        }
        uint32_t u32(size_t off) const
        {
            return little_endian
                ? (static_cast<uint32_t>(data[off]) | static_cast<uint32_t>(data[off + 1]) << 8
                   | static_cast<uint32_t>(data[off + 2]) << 16
                   | static_cast<uint32_t>(data[off + 3]) << 24)
                : (static_cast<uint32_t>(data[off]) << 24
                   | static_cast<uint32_t>(data[off + 1]) << 16
                   | static_cast<uint32_t>(data[off + 2]) << 8
                   | static_cast<uint32_t>(data[off + 3]));
        }
    };

    std::string tiff_value_to_string(const TiffView& t, uint16_t type, uint32_t count,
                                     size_t value_off)
    {
        if (type == 2) { // ASCII, NUL-terminated
            std::string s(reinterpret_cast<const char*>(t.data.data() + value_off), count);
            while (!s.empty() && s.back() == '\0')
                s.pop_back();
            return s;
        }
        if (type == 7) { // UNDEFINED: show text when printable, size otherwise
            std::string s(reinterpret_cast<const char*>(t.data.data() + value_off), count);
            const bool printable = !s.empty()
                && std::all_of(s.begin(), s.end(), [](unsigned char c) {
                       return c == 0 || (c >= 0x20 && c < 0x7F);
                   });
            if (printable) {
                while (!s.empty() && s.back() == '\0')
                    s.pop_back();
                return s;
            }
            return "(" + std::to_string(count) + " bytes)";
        }

        std::string out;
        for (uint32_t i = 0; i < count; ++i) {
            if (!out.empty())
                out += " ";
            const size_t off = value_off + i * tiff_type_size(type);
            switch (type) {
            case 1: out += std::to_string(t.data[off]); break;
            case 3: out += std::to_string(t.u16(off)); break;
            case 4: out += std::to_string(t.u32(off)); break;
            case 9: out += std::to_string(static_cast<int32_t>(t.u32(off))); break;
            case 5:
                out += std::to_string(t.u32(off)) + "/" + std::to_string(t.u32(off + 4));
                break;
            case 10:
                out += std::to_string(static_cast<int32_t>(t.u32(off))) + "/"
                    + std::to_string(static_cast<int32_t>(t.u32(off + 4)));
                break;
            default: return "";
            }
        }
        return out;
    }

    void parse_tiff_ifd(const TiffView& t, size_t ifd_off, std::vector<MetadataRecord>& records,
                        int depth)
    {
        if (depth > 2)
            return;
        if (ifd_off + 2 > t.data.size()) {
            warn(records, "exif", "IFD offset outside TIFF block");
            return;
        }
        const uint16_t count = t.u16(ifd_off);
        if (ifd_off + 2 + static_cast<size_t>(count) * 12 > t.data.size()) {
            warn(records, "exif", "IFD entry table truncated");
            return;
        }
        for (uint16_t i = 0; i < count; ++i) {
            const size_t e = ifd_off + 2 + static_cast<size_t>(i) * 12;
            const uint16_t tag = t.u16(e);
            const uint16_t type = t.u16(e + 2);
            const uint32_t value_count = t.u32(e + 4);
            const size_t elem = tiff_type_size(type);
            if (elem == 0) {
                warn(records, "exif", "unknown TIFF type " + std::to_string(type));
                continue;
            }
            const size_t total = elem * value_count;
            size_t value_off = e + 8;
            if (total > 4) {
                value_off = t.u32(e + 8);
                if (value_off + total > t.data.size()) {
                    warn(records, "exif", "tag value outside TIFF block");
                    continue;
                }
            }

            if (tag == 0x8769 && (type == 4 || type == 3)) {
                parse_tiff_ifd(t, t.u32(e + 8), records, depth + 1);
                continue;
            }
            if (tag == 0x927C) { // MakerNote stays opaque
                records.push_back({ MetadataStandard::Exif, "MakerNote",
                                    "(" + std::to_string(value_count) + " bytes)" });
                continue;
            }

            const char* name = exif_tag_name(tag);
            char fallback[16];
            if (!name) {
                std::snprintf(fallback, sizeof fallback, "Tag0x%04X", tag);
                name = fallback;
            }
            records.push_back({ MetadataStandard::Exif, name,
                                tiff_value_to_string(t, type, value_count, value_off) });
        }
    }

    // ---- XMP ---------------------------------------------------------------

    std::string decode_xml_entities(std::string_view s)
    {
        std::string out;
        out.reserve(s.size());
        for (size_t i = 0; i < s.size();) {
            if (s[i] != '&') {
                out.push_back(s[i++]);
                continue;
            }
            const size_t end = s.find(';', i);
            if (end == std::string_view::npos) {
                out.push_back(s[i++]);
                continue;
            }
            const std::string_view ent = s.substr(i + 1, end - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else if (!ent.empty() && ent[0] == '#') {
                const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
                const long code = std::strtol(std::string(ent.substr(hex ? 2 : 1)).c_str(),
                                              nullptr, hex ? 16 : 10);
                if (code > 0 && code < 128)
                    out += static_cast<char>(code);
            } else {
                out += '&';
                out += ent;
                out += ';';
            }
            i = end + 1;
        }
        return out;
    }

    std::string trim(std::string_view s)
    {
        size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
            ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
            --e;
        return std::string(s.substr(b, e - b));
    }

    bool skip_property(std::string_view name)
    {
        return name.starts_with("xmlns") || name == "rdf:about" || name == "x:xmptk"
            || name.starts_with("rdf:parseType");
    }

    void parse_tag_attributes(std::string_view tag_body, std::vector<MetadataRecord>& records)
    {
        size_t i = 0;
        // skip the element name
        while (i < tag_body.size() && !std::isspace(static_cast<unsigned char>(tag_body[i])))
            ++i;
        while (i < tag_body.size()) {
            while (i < tag_body.size() && (std::isspace(static_cast<unsigned char>(tag_body[i]))
                                           || tag_body[i] == '/'))
                ++i;
            const size_t name_start = i;
            while (i < tag_body.size() && tag_body[i] != '=' && tag_body[i] != '>'
                   && !std::isspace(static_cast<unsigned char>(tag_body[i])))
                ++i;
            if (i >= tag_body.size() || tag_body[i] != '=')
                break;
            const std::string_view name = tag_body.substr(name_start, i - name_start);
            ++i;
            if (i >= tag_body.size() || (tag_body[i] != '"' && tag_body[i] != '\''))
                break;
            const char quote = tag_body[i++];
            const size_t val_start = i;
            while (i < tag_body.size() && tag_body[i] != quote)
                ++i;
            if (i >= tag_body.size())
                break;
            const std::string_view value = tag_body.substr(val_start, i - val_start);
            ++i;
            if (!skip_property(name))
                records.push_back({ MetadataStandard::Xmp, std::string(name),
                                    decode_xml_entities(value) });
        }
    }

    // Collects rdf:li item texts from an Alt/Bag/Seq body.
    std::string collect_li_items(std::string_view body)
    {
        std::string out;
        size_t pos = 0;
        while (true) {
            const size_t open = body.find("<rdf:li", pos);
            if (open == std::string_view::npos)
                break;
            const size_t open_end = body.find('>', open);
            if (open_end == std::string_view::npos)
                break;
            if (body[open_end - 1] == '/') {
                pos = open_end + 1;
                continue;
            }
            const size_t close = body.find("</rdf:li>", open_end);
            if (close == std::string_view::npos)
                break;
            const std::string item = trim(body.substr(open_end + 1, close - open_end - 1));
            if (!item.empty()) {
                if (!out.empty())
                    out += "; ";
                out += decode_xml_entities(item);
            }
            pos = close + 9;
        }
        return out;
    }

    void parse_description_children(std::string_view body, std::vector<MetadataRecord>& records)
    {
        size_t pos = 0;
        while (true) {
            const size_t open = body.find('<', pos);
            if (open == std::string_view::npos)
                break;
            if (open + 1 < body.size() && (body[open + 1] == '?' || body[open + 1] == '!')) {
                pos = body.find('>', open);
                if (pos == std::string_view::npos)
                    break;
                continue;
            }
            const size_t open_end = body.find('>', open);
            if (open_end == std::string_view::npos)
                break;
            std::string_view tag_body = body.substr(open + 1, open_end - open - 1);
            const bool self_closing = !tag_body.empty() && tag_body.back() == '/';
            size_t name_len = 0;
            while (name_len < tag_body.size() && tag_body[name_len] != '/'
                   && !std::isspace(static_cast<unsigned char>(tag_body[name_len])))
                ++name_len;
            const std::string name(tag_body.substr(0, name_len));
            if (name.empty() || name[0] == '/') {
                pos = open_end + 1;
                continue;
            }
            if (self_closing) {
                parse_tag_attributes(tag_body.substr(0, tag_body.size() - 1), records);
                pos = open_end + 1;
                continue;
            }
            const std::string close_tag = "</" + name + ">";
            const size_t close = body.find(close_tag, open_end);
            if (close == std::string_view::npos) {
                pos = open_end + 1;
                continue;
            }
            const std::string_view inner = body.substr(open_end + 1, close - open_end - 1);
            if (inner.find("<rdf:li") != std::string_view::npos) {
                records.push_back({ MetadataStandard::Xmp, name, collect_li_items(inner) });
            } else if (inner.find('<') == std::string_view::npos) {
                records.push_back(
                    { MetadataStandard::Xmp, name, decode_xml_entities(trim(inner)) });
            }
            pos = close + close_tag.size();
        }
    }

    // ---- IPTC-IIM ----------------------------------------------------------

    const char* iim_record2_name(uint8_t dataset)
    {
        switch (dataset) {
        case 5: return "ObjectName";
        case 25: return "Keywords";
        case 80: return "By-line";
        case 85: return "By-lineTitle";
        case 90: return "City";
        case 101: return "Country";
        case 105: return "Headline";
        case 110: return "Credit";
        case 115: return "Source";
        case 116: return "CopyrightNotice";
        case 120: return "Caption-Abstract";
        case 122: return "Writer-Editor";
        default: return nullptr;
        }
    }

    void parse_photoshop_8bim(ByteSpan data, std::vector<MetadataRecord>& records)
    {
        size_t pos = 0;
        while (pos + 12 <= data.size()) {
            if (std::memcmp(data.data() + pos, "8BIM", 4) != 0) {
                warn(records, "iptc", "unexpected resource block signature");
                return;
            }
            const uint16_t resource_id = static_cast<uint16_t>(data[pos + 4] << 8 | data[pos + 5]);
            size_t p = pos + 6;
            const uint8_t name_len = data[p];
            p += 1 + name_len;
            if ((1 + name_len) % 2 != 0)
                ++p; // pascal string padded to even
            if (p + 4 > data.size()) {
                warn(records, "iptc", "resource block truncated");
                return;
            }
            const uint32_t size = static_cast<uint32_t>(data[p]) << 24
                | static_cast<uint32_t>(data[p + 1]) << 16
                | static_cast<uint32_t>(data[p + 2]) << 8 | data[p + 3];
            p += 4;
            if (p + size > data.size()) {
                warn(records, "iptc", "resource data truncated");
                return;
            }
            if (resource_id == 0x0404) {
                auto sub = parse_iptc_iim(data.subspan(p, size));
                records.insert(records.end(), sub.begin(), sub.end());
            }
            p += size;
            if (size % 2 != 0)
                ++p; // data padded to even
            pos = p;
        }
    }

} // namespace

const char* metadata_standard_name(MetadataStandard s)
{
    switch (s) {
    case MetadataStandard::Exif: return "EXIF";
    case MetadataStandard::Xmp: return "XMP";
    case MetadataStandard::Iptc: return "IPTC";
    case MetadataStandard::PngText: return "PngText";
    case MetadataStandard::C2paPointer: return "C2paPointer";
    case MetadataStandard::Warning: return "Warning";
    }
    return "Unknown";
}

std::vector<MetadataRecord> parse_exif_tiff(ByteSpan tiff)
{
    std::vector<MetadataRecord> records;
    if (tiff.size() < 8) {
        warn(records, "exif", "TIFF header too short");
        return records;
    }
    TiffView t { tiff, true };
    if (tiff[0] == 'I' && tiff[1] == 'I')
        t.little_endian = true;
    else if (tiff[0] == 'M' && tiff[1] == 'M')
        t.little_endian = false;
    else {
        warn(records, "exif", "unknown TIFF byte order");
        return records;
    }
    if (t.u16(2) != 42) {
        warn(records, "exif", "bad TIFF magic");
        return records;
    }
    parse_tiff_ifd(t, t.u32(4), records, 0);
    return records;
}

std::vector<MetadataRecord> parse_xmp_packet(std::string_view xml)
{
    std::vector<MetadataRecord> records;

    // Limit to the packet body when the processing instructions are present.
    const size_t begin_pi = xml.find("<?xpacket begin");
    if (begin_pi != std::string_view::npos) {
        const size_t pi_end = xml.find("?>", begin_pi);
        if (pi_end != std::string_view::npos)
            xml = xml.substr(pi_end + 2);
    }
    const size_t end_pi = xml.find("<?xpacket end");
    if (end_pi != std::string_view::npos)
        xml = xml.substr(0, end_pi);

    size_t pos = 0;
    bool any = false;
    while (true) {
        const size_t open = xml.find("<rdf:Description", pos);
        if (open == std::string_view::npos)
            break;
        any = true;
        size_t open_end = open;
        char in_quote = 0;
        while (open_end < xml.size()) {
            const char c = xml[open_end];
            if (in_quote) {
                if (c == in_quote)
                    in_quote = 0;
            } else if (c == '"' || c == '\'') {
                in_quote = c;
            } else if (c == '>') {
                break;
            }
            ++open_end;
        }
        if (open_end >= xml.size())
            break;
        const std::string_view tag_body = xml.substr(open + 1, open_end - open - 1);
        const bool self_closing = !tag_body.empty() && tag_body.back() == '/';
        parse_tag_attributes(self_closing ? tag_body.substr(0, tag_body.size() - 1) : tag_body,
                             records);
        if (self_closing) {
            pos = open_end + 1;
            continue;
        }
        const size_t close = xml.find("</rdf:Description>", open_end);
        if (close == std::string_view::npos) {
            warn(records, "xmp", "unterminated rdf:Description");
            break;
        }
        parse_description_children(xml.substr(open_end + 1, close - open_end - 1), records);
        pos = close + 18;
    }
    if (!any)
        warn(records, "xmp", "no rdf:Description element found");
    return records;
}

std::vector<MetadataRecord> parse_iptc_iim(ByteSpan iim)
{
    std::vector<MetadataRecord> records;
    size_t pos = 0;
    while (pos < iim.size()) {
        if (iim.size() - pos < 5) {
            warn(records, "iptc", "trailing bytes after last dataset");
            return records;
        }
        if (iim[pos] != 0x1C) {
            warn(records, "iptc", "dataset marker missing");
            return records;
        }
        const uint8_t record = iim[pos + 1];
        const uint8_t dataset = iim[pos + 2];
        const uint16_t len = static_cast<uint16_t>(iim[pos + 3] << 8 | iim[pos + 4]);
        if (len & 0x8000) {
            warn(records, "iptc", "extended dataset length unsupported");
            return records;
        }
        if (iim.size() - pos - 5 < len) {
            warn(records, "iptc", "dataset value truncated");
            return records;
        }
        std::string value(reinterpret_cast<const char*>(iim.data() + pos + 5), len);
        std::string key;
        if (record == 2) {
            const char* name = iim_record2_name(dataset);
            key = name ? name : "2:" + std::to_string(dataset);
        } else {
            key = std::to_string(record) + ":" + std::to_string(dataset);
        }
        records.push_back({ MetadataStandard::Iptc, key, value });
        pos += 5ull + len;
    }
    return records;
}

namespace {

    constexpr std::string_view kXmpKeyword = "XML:com.adobe.xmp";
    constexpr std::string_view kExifHeader { "Exif\0\0", 6 };
    constexpr std::string_view kXmpHeader = "http://ns.adobe.com/xap/1.0/";
    constexpr std::string_view kPhotoshopHeader = "Photoshop 3.0";

    bool payload_starts_with(ByteSpan payload, std::string_view prefix)
    {
        return payload.size() >= prefix.size()
            && std::memcmp(payload.data(), prefix.data(), prefix.size()) == 0;
    }

    // iTXt payload: keyword NUL compflag compmethod NUL lang NUL translated NUL text
    bool is_xmp_itxt(ByteSpan payload)
    {
        return payload_starts_with(payload, kXmpKeyword)
            && payload.size() > kXmpKeyword.size() && payload[kXmpKeyword.size()] == 0;
    }

    void extract_png_text_chunk(const ContainerEntry& e, ByteSpan payload,
                                std::vector<MetadataRecord>& records)
    {
        const auto nul = std::find(payload.begin(), payload.end(), uint8_t(0));
        if (nul == payload.end()) {
            warn(records, e.type_code, "missing keyword terminator");
            return;
        }
        const std::string keyword(payload.begin(), nul);
        const size_t key_len = keyword.size();

        std::string text;
        if (e.type_code == "tEXt") {
            text.assign(payload.begin() + key_len + 1, payload.end());
        } else if (e.type_code == "zTXt") {
            if (payload.size() < key_len + 2 || payload[key_len + 1] != 0) {
                warn(records, "zTXt", "unsupported compression method");
                return;
            }
            try {
                Bytes plain = inflate_bytes(payload.subspan(key_len + 2));
                text.assign(plain.begin(), plain.end());
            } catch (const Error&) {
                warn(records, "zTXt", "corrupt deflate stream");
                return;
            }
        } else { // iTXt
            if (payload.size() < key_len + 3) {
                warn(records, "iTXt", "truncated header");
                return;
            }
            const uint8_t comp_flag = payload[key_len + 1];
            const uint8_t comp_method = payload[key_len + 2];
            size_t p = key_len + 3;
            for (int field = 0; field < 2; ++field) { // language, translated keyword
                while (p < payload.size() && payload[p] != 0)
                    ++p;
                if (p >= payload.size()) {
                    warn(records, "iTXt", "truncated language fields");
                    return;
                }
                ++p;
            }
            if (comp_flag == 0) {
                text.assign(payload.begin() + static_cast<long>(p), payload.end());
            } else if (comp_method == 0) {
                try {
                    Bytes plain = inflate_bytes(payload.subspan(p));
                    text.assign(plain.begin(), plain.end());
                } catch (const Error&) {
                    warn(records, "iTXt", "corrupt deflate stream");
                    return;
                }
            } else {
                warn(records, "iTXt", "unsupported compression method");
                return;
            }
        }

        if (keyword == kXmpKeyword) {
            auto sub = parse_xmp_packet(text);
            records.insert(records.end(), sub.begin(), sub.end());
        } else {
            records.push_back({ MetadataStandard::PngText, keyword, text });
        }
    }

} // namespace

std::vector<MetadataRecord> extract_records(const FileBlob& blob)
{
    std::vector<MetadataRecord> records;
    const ContainerMap map = parse_containers(blob);

    for (const auto& e : map.entries) {
        const ByteSpan payload = entry_payload(e, blob);
        if (map.format == ImageFormat::Png) {
            if (e.type_code == "tEXt" || e.type_code == "zTXt" || e.type_code == "iTXt") {
                extract_png_text_chunk(e, payload, records);
            } else if (e.type_code == "eXIf") {
                auto sub = parse_exif_tiff(payload);
                records.insert(records.end(), sub.begin(), sub.end());
            } else if (e.type_code == "caBX") {
                records.push_back({ MetadataStandard::C2paPointer, "caBX",
                                    "offset=" + std::to_string(e.offset)
                                        + " length=" + std::to_string(e.length) });
            }
            continue;
        }

        // JPEG
        if (e.marker == 0xE1 && payload_starts_with(payload, kExifHeader)) {
            auto sub = parse_exif_tiff(payload.subspan(6));
            records.insert(records.end(), sub.begin(), sub.end());
        } else if (e.marker == 0xE1 && payload_starts_with(payload, kXmpHeader)
                   && payload.size() > kXmpHeader.size()) {
            const std::string_view xml(
                reinterpret_cast<const char*>(payload.data() + kXmpHeader.size() + 1),
                payload.size() - kXmpHeader.size() - 1);
            auto sub = parse_xmp_packet(xml);
            records.insert(records.end(), sub.begin(), sub.end());
        } else if (e.marker == 0xED && payload_starts_with(payload, kPhotoshopHeader)) {
            parse_photoshop_8bim(payload.subspan(kPhotoshopHeader.size() + 1), records);
        } else if (e.marker == 0xEB && payload.size() >= 2 && payload[0] == 'J'
                   && payload[1] == 'P') {
            records.push_back({ MetadataStandard::C2paPointer, "APP11",
                                "offset=" + std::to_string(e.offset)
                                    + " length=" + std::to_string(e.length) });
        }
    }
    return records;
}

AiOriginRules AiOriginRules::defaults()
{
    return { { "AI", "DALL-E", "Stable Diffusion", "Midjourney", "generated" }, true };
}

AiOriginRules AiOriginRules::load(const std::string& path)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::BadParams, "rules " + path + ": " + e.what());
    }
    AiOriginRules rules;
    rules.terms = doc.at("terms").get<std::vector<std::string>>();
    rules.enable_heuristics = doc.value("enable_heuristics", true);
    return rules;
}

namespace {

    // Field roles eligible for the R3 term heuristic, keyed by the record name
    // with any namespace prefix removed.
    enum class FieldRole { None, Creator, Contributor, Software, Description };

    FieldRole role_of(const std::string& key)
    {
        std::string k = lower(key);
        const size_t colon = k.rfind(':');
        if (colon != std::string::npos)
            k = k.substr(colon + 1);

        static const std::map<std::string, FieldRole> kRoles = {
            { "artist", FieldRole::Creator },
            { "by-line", FieldRole::Creator },
            { "creator", FieldRole::Creator },
            { "author", FieldRole::Creator },
            { "contributor", FieldRole::Contributor },
            { "credit", FieldRole::Contributor },
            { "software", FieldRole::Software },
            { "creatortool", FieldRole::Software },
            { "processingsoftware", FieldRole::Software },
            { "imagedescription", FieldRole::Description },
            { "description", FieldRole::Description },
            { "caption-abstract", FieldRole::Description },
            { "headline", FieldRole::Description },
            { "comment", FieldRole::Description },
            { "title", FieldRole::Description },
            { "objectname", FieldRole::Description },
        };
        const auto it = kRoles.find(k);
        return it == kRoles.end() ? FieldRole::None : it->second;
    }

} // namespace

AiOriginFinding classify_ai_origin(const std::vector<MetadataRecord>& records,
                                   const AiOriginRules& rules)
{
    AiOriginFinding finding;
    bool any_explicit = false;

    for (const auto& r : records) {
        if (r.standard == MetadataStandard::Warning)
            continue;

        // R1: IPTC digital source type declares trained algorithmic media
        if ((r.standard == MetadataStandard::Xmp || r.standard == MetadataStandard::Iptc)
            && contains_ci(r.key, "digitalsourcetype")
            && ends_with_ci(r.value, "trainedalgorithmicmedia")) {
            finding.matched_rules.push_back({ "R1", r });
            any_explicit = true;
            continue;
        }

        // R2: a C2PA manifest pointer is itself a machine-readable declaration
        if (r.standard == MetadataStandard::C2paPointer) {
            finding.matched_rules.push_back({ "R2", r });
            any_explicit = true;
            continue;
        }

        // R3: configurable term list over creator/contributor/software/description
        if (rules.enable_heuristics && role_of(r.key) != FieldRole::None) {
            for (const auto& term : rules.terms) {
                if (!term.empty() && contains_ci(r.value, term)) {
                    finding.matched_rules.push_back({ "R3", r });
                    break;
                }
            }
        }
    }

    finding.is_ai_declared = !finding.matched_rules.empty();
    finding.confidence = any_explicit ? AiRuleConfidence::Explicit : AiRuleConfidence::Heuristic;
    return finding;
}

std::string build_xmp_packet(const AiDeclaration& decl)
{
    auto escape = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
            }
        }
        return out;
    };

    std::string xml;
    xml += "<?xpacket begin=\"\xEF\xBB\xBF\" id=\"W5M0MpCehiHzreSzNTczkc9d\"?>\n";
    xml += "<x:xmpmeta xmlns:x=\"adobe:ns:meta/\">\n";
    xml += " <rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\">\n";
    xml += "  <rdf:Description rdf:about=\"\"\n";
    xml += "    xmlns:xmp=\"http://ns.adobe.com/xap/1.0/\"\n";
    xml += "    xmlns:Iptc4xmpExt=\"http://iptc.org/std/Iptc4xmpExt/2008-02-29/\"\n";
    xml += "    xmp:CreatorTool=\"" + escape(decl.tool_name) + "\"\n";
    xml += "    Iptc4xmpExt:DigitalSourceType=\"" + escape(decl.source_type) + "\"/>\n";
    xml += " </rdf:RDF>\n";
    xml += "</x:xmpmeta>\n";
    xml += "<?xpacket end=\"w\"?>";
    return xml;
}

FileBlob embed_ai_metadata(const FileBlob& blob, const AiDeclaration& decl)
{
    const ContainerMap map = parse_containers(blob);
    const std::string packet = build_xmp_packet(decl);
    Bytes out;

    if (map.format == ImageFormat::Png) {
        Bytes itxt_payload;
        put_text(itxt_payload, kXmpKeyword);
        itxt_payload.push_back(0); // keyword terminator
        itxt_payload.push_back(0); // compression flag
        itxt_payload.push_back(0); // compression method
        itxt_payload.push_back(0); // empty language tag
        itxt_payload.push_back(0); // empty translated keyword
        put_text(itxt_payload, packet);
        const Bytes chunk = make_png_chunk("iTXt", itxt_payload);

        out = { 0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A };
        for (const auto& e : map.entries) {
            if (e.type_code == "iTXt" && is_xmp_itxt(entry_payload(e, blob)))
                continue; // replaced wholesale
            if (e.type_code == "IEND")
                put_bytes(out, chunk);
            put_bytes(out, blob.span().subspan(e.offset, e.length));
        }
        return FileBlob::from_bytes(std::move(out));
    }

    // JPEG: drop existing XMP APP1s, insert after the leading APP0/Exif run.
    Bytes segment_payload;
    put_text(segment_payload, kXmpHeader);
    segment_payload.push_back(0);
    put_text(segment_payload, packet);
    const Bytes segment = make_jpeg_segment(0xE1, segment_payload);

    size_t insert_index = 1; // after SOI
    for (size_t i = 1; i < map.entries.size(); ++i) {
        const auto& e = map.entries[i];
        if (e.marker == 0xE0
            || (e.marker == 0xE1 && payload_starts_with(entry_payload(e, blob), kExifHeader)))
            insert_index = i + 1;
        else
            break;
    }

    for (size_t i = 0; i < map.entries.size(); ++i) {
        if (i == insert_index)
            put_bytes(out, segment);
        const auto& e = map.entries[i];
        if (e.marker == 0xE1 && payload_starts_with(entry_payload(e, blob), kXmpHeader))
            continue;
        put_bytes(out, blob.span().subspan(e.offset, e.length));
    }
    return FileBlob::from_bytes(std::move(out));
}

FileBlob strip_metadata(const FileBlob& blob)
{
    const ContainerMap map = parse_containers(blob);
    Bytes out;

    if (map.format == ImageFormat::Png) {
        out = { 0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A };
        for (const auto& e : map.entries) {
            if (e.type_code == "IHDR" || e.type_code == "PLTE" || e.type_code == "tRNS"
                || e.type_code == "IDAT" || e.type_code == "IEND")
                put_bytes(out, blob.span().subspan(e.offset, e.length));
        }
        return FileBlob::from_bytes(std::move(out));
    }

    for (const auto& e : map.entries) {
        const bool drop = (e.marker >= 0xE1 && e.marker <= 0xED) || e.marker == 0xEF
            || e.marker == 0xFE;
        if (!drop)
            put_bytes(out, blob.span().subspan(e.offset, e.length));
    }
    return FileBlob::from_bytes(std::move(out));
}

} // namespace markinspect
