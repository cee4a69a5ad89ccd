#pragma once

#include "markinspect/image.hpp"

#include <string>

namespace markinspect {

enum class EntryKind { PngChunk, JpegSegment };

struct ContainerEntry {
    EntryKind kind;
    std::string type_code; // PNG: chunk type ("IHDR"); JPEG: marker mnemonic ("APP1", "ECS")
    uint64_t offset = 0;   // absolute byte offset of the entry
    uint64_t length = 0;   // total bytes including framing
    uint8_t marker = 0;    // JPEG marker byte; 0 for PNG chunks and entropy-coded data

    bool is_entropy_data() const { return kind == EntryKind::JpegSegment && type_code == "ECS"; }
};

// Lossless layout map: entries tile the file (after the PNG signature), so
// re-serializing an untouched map reproduces the input byte for byte.
struct ContainerMap {
    ImageFormat format = ImageFormat::Unknown;
    std::vector<ContainerEntry> entries;

    const ContainerEntry* find(const std::string& type_code) const;
};

ContainerMap parse_containers(const FileBlob& blob);

Bytes serialize_containers(const ContainerMap& map, const FileBlob& source);

// Payload view of an entry: PNG chunk data (between type and CRC), JPEG
// segment bytes after the length field. ECS entries are returned whole.
ByteSpan entry_payload(const ContainerEntry& entry, const FileBlob& source);

// Framing helpers for container edits and fixture construction.
Bytes make_png_chunk(const std::string& type, ByteSpan data);
Bytes make_jpeg_segment(uint8_t marker, ByteSpan payload);

const char* jpeg_marker_name(uint8_t marker);

} // namespace markinspect
