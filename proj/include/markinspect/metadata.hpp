#pragma once

#include "markinspect/containers.hpp"

#include <string>
#include <vector>

namespace markinspect {

enum class MetadataStandard { Exif, Xmp, Iptc, PngText, C2paPointer, Warning };

const char* metadata_standard_name(MetadataStandard s);

struct MetadataRecord {
    MetadataStandard standard;
    std::string key;
    std::string value;

    bool operator==(const MetadataRecord&) const = default;
};

// Pulls every record the file carries: EXIF (TIFF IFD0 + Exif IFD, both byte
// orders), XMP packets (JPEG APP1 and PNG iTXt), IPTC-IIM record 2 from the
// APP13 Photoshop resource block, PNG tEXt/zTXt/iTXt, and pointers to C2PA
// payloads. Malformed sub-blocks degrade to Warning records; nothing here is
// fatal.
std::vector<MetadataRecord> extract_records(const FileBlob& blob);

// Sub-parsers, exposed for fixtures and focused tests.
std::vector<MetadataRecord> parse_exif_tiff(ByteSpan tiff);
std::vector<MetadataRecord> parse_xmp_packet(std::string_view xml);
std::vector<MetadataRecord> parse_iptc_iim(ByteSpan iim);

inline constexpr const char* kTrainedAlgorithmicMedia
    = "http://cv.iptc.org/newscodes/digitalsourcetype/trainedAlgorithmicMedia";

enum class AiRuleConfidence { Explicit, Heuristic };

struct AiOriginRules {
    std::vector<std::string> terms;
    bool enable_heuristics = true;

    static AiOriginRules defaults();
    // Config file: {"terms": [...], "enable_heuristics": bool}
    static AiOriginRules load(const std::string& path);
};

struct AiOriginMatch {
    std::string rule_id; // R1 digital source type, R2 C2PA pointer, R3 term heuristic
    MetadataRecord record;
};

struct AiOriginFinding {
    bool is_ai_declared = false;
    std::vector<AiOriginMatch> matched_rules;
    AiRuleConfidence confidence = AiRuleConfidence::Heuristic;
};

AiOriginFinding classify_ai_origin(const std::vector<MetadataRecord>& records,
                                   const AiOriginRules& rules = AiOriginRules::defaults());

struct AiDeclaration {
    std::string tool_name;
    std::string source_type = kTrainedAlgorithmicMedia;
};

std::string build_xmp_packet(const AiDeclaration& decl);

// Replaces any existing XMP wholesale with a packet declaring the AI origin.
// Pixel data is untouched; the edit happens at the container level.
FileBlob embed_ai_metadata(const FileBlob& blob, const AiDeclaration& decl);

// Drops every block that is not required to decode pixels. PNG keeps
// IHDR/PLTE/tRNS/IDAT/IEND; JPEG keeps the coding segments plus APP0/APP14
// (they affect color interpretation). Idempotent.
FileBlob strip_metadata(const FileBlob& blob);

} // namespace markinspect
