#include "markinspect/c2pa.hpp"

#include "markinspect/cbor.hpp"

#include <algorithm>
#include <cstring>
#include <map>

namespace markinspect {

namespace {

    bool printable_fourcc(ByteSpan s)
    {
        for (uint8_t c : s.first(4))
            if (c < 0x20 || c > 0x7E)
                return false;
        return true;
    }

    std::optional<std::string> parse_jumd_label(ByteSpan payload)
    {
        if (payload.size() < 17)
            raise(Errc::MalformedBox, "description box too short");
        const uint8_t toggles = payload[16];
        if (!(toggles & 0x02))
            return std::nullopt;
        const auto nul = std::find(payload.begin() + 17, payload.end(), uint8_t(0));
        if (nul == payload.end())
            raise(Errc::MalformedBox, "unterminated description label");
        return std::string(payload.begin() + 17, nul);
    }

    std::vector<JumbfBox> parse_boxes(ByteSpan stream, ByteSpan region, uint64_t region_offset);

    JumbfBox parse_one_box(ByteSpan stream, ByteSpan region, uint64_t region_offset, size_t pos,
                           size_t* consumed)
    {
        if (region.size() - pos < 8)
            raise(Errc::MalformedBox, "box header truncated");
        const uint32_t lbox = static_cast<uint32_t>(region[pos]) << 24
            | static_cast<uint32_t>(region[pos + 1]) << 16
            | static_cast<uint32_t>(region[pos + 2]) << 8 | region[pos + 3];
        if (!printable_fourcc(region.subspan(pos + 4, 4)))
            raise(Errc::MalformedBox, "box type is not printable");
        const std::string type(reinterpret_cast<const char*>(region.data() + pos + 4), 4);

        uint64_t box_size;
        if (lbox == 0) {
            box_size = region.size() - pos; // extends to the end of the region
        } else if (lbox == 1) {
            raise(Errc::MalformedBox, "64-bit box length unsupported");
        } else if (lbox < 8) {
            raise(Errc::MalformedBox, "box length underflow");
        } else {
            box_size = lbox;
        }
        if (box_size > region.size() - pos)
            raise(Errc::MalformedBox, "box length overflows container");

        JumbfBox box;
        box.type_code = type;
        box.box_offset = region_offset + pos;
        box.box_size = box_size;
        box.payload_offset = box.box_offset + 8;
        box.payload_size = box_size - 8;

        const ByteSpan payload = region.subspan(pos + 8, box_size - 8);
        if (type == "jumb") {
            // a superbox begins with its description box
            size_t desc_consumed = 0;
            JumbfBox desc = parse_one_box(stream, payload, box.payload_offset, 0, &desc_consumed);
            if (desc.type_code != "jumd")
                raise(Errc::MalformedBox, "superbox does not start with a description box");
            box.label = parse_jumd_label(
                stream.subspan(desc.payload_offset, desc.payload_size));
            box.children.push_back(std::move(desc));
            auto rest = parse_boxes(stream, payload.subspan(desc_consumed),
                                    box.payload_offset + desc_consumed);
            for (auto& child : rest)
                box.children.push_back(std::move(child));
        }

        *consumed = static_cast<size_t>(box_size);
        return box;
    }

    std::vector<JumbfBox> parse_boxes(ByteSpan stream, ByteSpan region, uint64_t region_offset)
    {
        std::vector<JumbfBox> out;
        size_t pos = 0;
        while (pos < region.size()) {
            size_t consumed = 0;
            out.push_back(parse_one_box(stream, region, region_offset, pos, &consumed));
            pos += consumed;
        }
        return out;
    }

    void collect_labels(const JumbfBox& box, std::vector<std::string>& labels)
    {
        if (box.label)
            labels.push_back(*box.label);
        for (const auto& child : box.children)
            collect_labels(child, labels);
    }

    const JumbfBox* find_labeled(const std::vector<JumbfBox>& boxes, std::string_view label)
    {
        for (const auto& b : boxes) {
            if (b.label && *b.label == label)
                return &b;
            if (const JumbfBox* found = find_labeled(b.children, label))
                return found;
        }
        return nullptr;
    }

} // namespace

const char* hard_binding_status_name(HardBindingStatus s)
{
    switch (s) {
    case HardBindingStatus::Valid: return "Valid";
    case HardBindingStatus::Invalid: return "Invalid";
    case HardBindingStatus::Missing: return "Missing";
    case HardBindingStatus::Unsupported: return "Unsupported";
    }
    return "Unknown";
}

std::vector<Bytes> locate_jumbf(const FileBlob& blob, const ContainerMap& map)
{
    std::vector<Bytes> out;

    if (map.format == ImageFormat::Png) {
        for (const auto& e : map.entries)
            if (e.type_code == "caBX") {
                const ByteSpan payload = entry_payload(e, blob);
                out.emplace_back(payload.begin(), payload.end());
            }
        return out;
    }

    // JPEG: APP11 segments with the JUMBF continuation header.
    struct Fragment {
        uint32_t sequence;
        Bytes header; // repeated LBox + TBox
        Bytes data;
    };
    std::map<uint16_t, std::vector<Fragment>> instances;

    for (const auto& e : map.entries) {
        if (e.marker != 0xEB)
            continue;
        const ByteSpan payload = entry_payload(e, blob);
        if (payload.size() < 16 || payload[0] != 'J' || payload[1] != 'P')
            continue; // APP11 that is not JUMBF
        const uint16_t instance = static_cast<uint16_t>(payload[2] << 8 | payload[3]);
        const uint32_t sequence = static_cast<uint32_t>(payload[4]) << 24
            | static_cast<uint32_t>(payload[5]) << 16 | static_cast<uint32_t>(payload[6]) << 8
            | payload[7];
        Fragment frag;
        frag.sequence = sequence;
        frag.header.assign(payload.begin() + 8, payload.begin() + 16);
        frag.data.assign(payload.begin() + 16, payload.end());
        instances[instance].push_back(std::move(frag));
    }

    for (auto& [instance, fragments] : instances) {
        std::sort(fragments.begin(), fragments.end(),
                  [](const Fragment& a, const Fragment& b) { return a.sequence < b.sequence; });
        Bytes stream;
        uint32_t expected = 1;
        for (const auto& f : fragments) {
            if (f.sequence != expected)
                raise(Errc::FragmentGap,
                      "box instance " + std::to_string(instance) + " missing packet "
                          + std::to_string(expected));
            if (f.header != fragments.front().header)
                raise(Errc::FragmentGap, "inconsistent continuation headers");
            if (expected == 1)
                put_bytes(stream, ByteSpan(f.header));
            put_bytes(stream, ByteSpan(f.data));
            ++expected;
        }
        out.push_back(std::move(stream));
    }
    return out;
}

ManifestStore parse_manifest_store(ByteSpan jumbf)
{
    if (jumbf.empty())
        raise(Errc::MalformedBox, "empty JUMBF stream");

    ManifestStore store;
    store.stream.assign(jumbf.begin(), jumbf.end());
    store.boxes = parse_boxes(ByteSpan(store.stream), ByteSpan(store.stream), 0);

    for (const auto& b : store.boxes) {
        if (b.type_code == "jumb" && b.label && b.label->starts_with("c2pa")) {
            store.present = true;
            collect_labels(b, store.manifest_labels);
        }
    }
    return store;
}

HardBindingStatus verify_hard_binding(const FileBlob& blob, const ManifestStore& store)
{
    const JumbfBox* assertion = find_labeled(store.boxes, "c2pa.hash.data");
    if (!assertion)
        return HardBindingStatus::Missing;

    const JumbfBox* content = nullptr;
    for (const auto& child : assertion->children)
        if (child.type_code == "cbor")
            content = &child;
    if (!content)
        return HardBindingStatus::Unsupported;

    CborValue doc;
    try {
        doc = cbor_decode(
            ByteSpan(store.stream).subspan(content->payload_offset, content->payload_size));
    } catch (const Error&) {
        return HardBindingStatus::Unsupported;
    }
    if (doc.type != CborValue::Type::Map)
        return HardBindingStatus::Unsupported;

    if (const CborValue* alg = doc.find("alg")) {
        if (alg->type != CborValue::Type::Text || alg->text != "sha256")
            return HardBindingStatus::Unsupported;
    }
    const CborValue* hash = doc.find("hash");
    if (!hash || hash->type != CborValue::Type::Bytes || hash->bytes.size() != 32)
        return HardBindingStatus::Unsupported;

    std::vector<std::pair<uint64_t, uint64_t>> exclusions;
    if (const CborValue* excl = doc.find("exclusions")) {
        if (excl->type != CborValue::Type::Array)
            return HardBindingStatus::Unsupported;
        for (const auto& item : excl->array) {
            const CborValue* start = item.find("start");
            const CborValue* length = item.find("length");
            if (!start || !length || !start->is_unsigned() || !length->is_unsigned())
                return HardBindingStatus::Unsupported;
            exclusions.emplace_back(start->uint_value, length->uint_value);
        }
    }

    std::sort(exclusions.begin(), exclusions.end());
    uint64_t cursor = 0;
    for (const auto& [start, length] : exclusions) {
        if (start < cursor || start + length > blob.bytes.size())
            return HardBindingStatus::Unsupported; // overlapping or out of range
        cursor = start + length;
    }

    // excluded bytes are omitted from the digest input
    Sha256 hasher;
    uint64_t pos = 0;
    for (const auto& [start, length] : exclusions) {
        hasher.update(blob.span().subspan(pos, start - pos));
        pos = start + length;
    }
    hasher.update(blob.span().subspan(pos));
    const Sha256Digest digest = hasher.finish();

    return std::memcmp(digest.data(), hash->bytes.data(), 32) == 0 ? HardBindingStatus::Valid
                                                                   : HardBindingStatus::Invalid;
}

ManifestFinding probe_c2pa(const FileBlob& blob)
{
    ManifestFinding finding;
    const ContainerMap map = parse_containers(blob);
    for (const Bytes& range : locate_jumbf(blob, map)) {
        ManifestStore store = parse_manifest_store(range);
        if (!store.present)
            continue;
        if (!finding.present) {
            finding.present = true;
            finding.hard_binding = verify_hard_binding(blob, store);
        }
        finding.manifest_labels.insert(finding.manifest_labels.end(),
                                       store.manifest_labels.begin(),
                                       store.manifest_labels.end());
    }
    return finding;
}

// ---- fixture support --------------------------------------------------------

namespace {

    Bytes jumbf_box(std::string_view type, ByteSpan payload)
    {
        Bytes out;
        put_u32be(out, static_cast<uint32_t>(8 + payload.size()));
        put_text(out, type);
        put_bytes(out, payload);
        return out;
    }

    Bytes jumd_payload(std::string_view uuid_fourcc, std::string_view label)
    {
        // JUMBF XT UUID pattern: 4cc followed by the fixed 00110010-8000-00AA00389B71 tail
        static const uint8_t kUuidTail[12] = { 0x00, 0x11, 0x00, 0x10, 0x80, 0x00,
                                               0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71 };
        Bytes out;
        put_text(out, uuid_fourcc);
        out.insert(out.end(), kUuidTail, kUuidTail + 12);
        out.push_back(0x03); // requestable + label present
        put_text(out, label);
        out.push_back(0);
        return out;
    }

    Bytes superbox(std::string_view uuid_fourcc, std::string_view label,
                   const std::vector<Bytes>& children)
    {
        Bytes payload = jumbf_box("jumd", jumd_payload(uuid_fourcc, label));
        for (const auto& child : children)
            put_bytes(payload, ByteSpan(child));
        return jumbf_box("jumb", payload);
    }

    Bytes hash_data_cbor(const std::vector<std::pair<uint64_t, uint64_t>>& exclusions,
                         const Sha256Digest& digest)
    {
        Bytes out;
        cbor_put_map_header(out, 3);
        cbor_put_text(out, "exclusions");
        cbor_put_array_header(out, exclusions.size());
        for (const auto& [start, length] : exclusions) {
            cbor_put_map_header(out, 2);
            cbor_put_text(out, "start");
            cbor_put_uint64(out, start); // fixed width keeps the layout stable
            cbor_put_text(out, "length");
            cbor_put_uint64(out, length);
        }
        cbor_put_text(out, "alg");
        cbor_put_text(out, "sha256");
        cbor_put_text(out, "hash");
        cbor_put_bytes_header(out, digest.size());
        out.insert(out.end(), digest.begin(), digest.end());
        return out;
    }

    Bytes opaque_note_cbor(std::string_view note)
    {
        Bytes out;
        cbor_put_map_header(out, 1);
        cbor_put_text(out, "note");
        cbor_put_text(out, note);
        return out;
    }

    Bytes build_store_bytes(const FixtureManifestOptions& opts,
                            const std::vector<std::pair<uint64_t, uint64_t>>& exclusions,
                            const Sha256Digest& digest)
    {
        const Bytes hash_assertion
            = superbox("cbor", "c2pa.hash.data", { jumbf_box("cbor", hash_data_cbor(exclusions, digest)) });
        const Bytes assertions = superbox("c2as", "c2pa.assertions", { hash_assertion });
        const Bytes claim
            = superbox("c2cl", "c2pa.claim", { jumbf_box("cbor", opaque_note_cbor("unsigned synthetic claim")) });
        const Bytes signature
            = superbox("c2cs", "c2pa.signature", { jumbf_box("cbor", opaque_note_cbor("no signature present")) });
        const Bytes manifest = superbox("c2ma", opts.manifest_label, { assertions, claim, signature });
        return superbox("c2pa", "c2pa", { manifest });
    }

    bool is_jumbf_app11(const ContainerEntry& e, const FileBlob& blob)
    {
        if (e.marker != 0xEB)
            return false;
        const ByteSpan p = entry_payload(e, blob);
        return p.size() >= 2 && p[0] == 'J' && p[1] == 'P';
    }

    struct Assembly {
        Bytes bytes;
        std::vector<std::pair<uint64_t, uint64_t>> exclusions;
    };

    Assembly assemble_png(const FileBlob& blob, const ContainerMap& map, const Bytes& store)
    {
        Assembly out;
        out.bytes = { 0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A };
        const Bytes chunk = make_png_chunk("caBX", ByteSpan(store));
        for (const auto& e : map.entries) {
            if (e.type_code == "caBX")
                continue; // replaced
            if (e.type_code == "IEND") {
                out.exclusions.emplace_back(out.bytes.size(), chunk.size());
                put_bytes(out.bytes, ByteSpan(chunk));
            }
            put_bytes(out.bytes, blob.span().subspan(e.offset, e.length));
        }
        return out;
    }

    Assembly assemble_jpeg(const FileBlob& blob, const ContainerMap& map, const Bytes& store,
                           bool split)
    {
        // Fragments carry the box header after the packet number; continuation
        // segments repeat it.
        const ByteSpan header = ByteSpan(store).first(8);
        const ByteSpan contents = ByteSpan(store).subspan(8);
        std::vector<ByteSpan> fragments;
        if (split && contents.size() >= 2) {
            const size_t half = (contents.size() + 1) / 2;
            fragments.push_back(contents.first(half));
            fragments.push_back(contents.subspan(half));
        } else {
            fragments.push_back(contents);
        }

        std::vector<Bytes> segments;
        for (size_t i = 0; i < fragments.size(); ++i) {
            Bytes payload;
            put_text(payload, "JP");
            put_u16be(payload, 1); // box instance
            put_u32be(payload, static_cast<uint32_t>(i + 1));
            put_bytes(payload, header);
            put_bytes(payload, fragments[i]);
            segments.push_back(make_jpeg_segment(0xEB, ByteSpan(payload)));
        }

        size_t insert_index = 1;
        for (size_t i = 1; i < map.entries.size(); ++i) {
            const uint8_t m = map.entries[i].marker;
            if (m == 0xE0 || m == 0xE1)
                insert_index = i + 1;
            else
                break;
        }

        Assembly out;
        for (size_t i = 0; i < map.entries.size(); ++i) {
            if (i == insert_index) {
                for (const auto& seg : segments) {
                    out.exclusions.emplace_back(out.bytes.size(), seg.size());
                    put_bytes(out.bytes, ByteSpan(seg));
                }
            }
            const auto& e = map.entries[i];
            if (is_jumbf_app11(e, blob))
                continue; // replaced
            put_bytes(out.bytes, blob.span().subspan(e.offset, e.length));
        }
        return out;
    }

    Sha256Digest hash_with_exclusions(ByteSpan file,
                                      const std::vector<std::pair<uint64_t, uint64_t>>& exclusions,
                                      const std::function<Sha256Digest(ByteSpan)>& hasher)
    {
        Bytes masked;
        masked.reserve(file.size());
        uint64_t pos = 0;
        for (const auto& [start, length] : exclusions) {
            put_bytes(masked, file.subspan(pos, start - pos));
            pos = start + length;
        }
        put_bytes(masked, file.subspan(pos));
        if (hasher)
            return hasher(ByteSpan(masked));
        return sha256(ByteSpan(masked));
    }

} // namespace

FileBlob embed_fixture_manifest(const FileBlob& blob, const FixtureManifestOptions& opts)
{
    const ContainerMap map = parse_containers(blob);
    const bool png = map.format == ImageFormat::Png;

    auto assemble = [&](const std::vector<std::pair<uint64_t, uint64_t>>& exclusions,
                        const Sha256Digest& digest) {
        const Bytes store = build_store_bytes(opts, exclusions, digest);
        return png ? assemble_png(blob, map, store)
                   : assemble_jpeg(blob, map, store, opts.split_app11);
    };

    // Three passes: discover layout, pin exclusion offsets, then fill in the
    // digest (which lives inside the excluded range, so it cannot disturb it).
    const Sha256Digest zero {};
    Assembly probe = assemble({ { 0, 0 } }, zero);
    // the probe used a placeholder exclusion list of the same shape
    std::vector<std::pair<uint64_t, uint64_t>> placeholder(probe.exclusions.size(), { 0, 0 });
    Assembly shaped = assemble(placeholder, zero);
    Assembly pinned = assemble(shaped.exclusions, zero);
    if (pinned.exclusions != shaped.exclusions)
        raise(Errc::EncodeFailure, "fixture manifest layout did not stabilize");

    const Sha256Digest digest
        = hash_with_exclusions(ByteSpan(pinned.bytes), pinned.exclusions, opts.hasher);
    Assembly final_assembly = assemble(pinned.exclusions, digest);
    return FileBlob::from_bytes(std::move(final_assembly.bytes));
}

} // namespace markinspect
