#pragma once

#include "markinspect/containers.hpp"
#include "markinspect/sha256.hpp"

#include <functional>
#include <optional>
#include <string>

namespace markinspect {

struct JumbfBox {
    std::string type_code;             // box 4cc ("jumb", "jumd", "cbor", ...)
    std::optional<std::string> label;  // description-box label for superboxes
    std::vector<JumbfBox> children;
    uint64_t payload_offset = 0;       // into the manifest-store stream
    uint64_t payload_size = 0;
    uint64_t box_offset = 0;
    uint64_t box_size = 0;
};

enum class HardBindingStatus { Valid, Invalid, Missing, Unsupported };

const char* hard_binding_status_name(HardBindingStatus s);

struct ManifestStore {
    Bytes stream; // reassembled JUMBF bytes the box offsets refer to
    std::vector<JumbfBox> boxes;
    bool present = false; // a top-level superbox label begins with "c2pa"
    std::vector<std::string> manifest_labels;
};

struct ManifestFinding {
    bool present = false;
    std::vector<std::string> manifest_labels;
    HardBindingStatus hard_binding = HardBindingStatus::Missing;
};

// JPEG: reassembles APP11 JUMBF fragments (common "JP" identifier, box
// instance number, contiguous packet sequence numbers) into one stream per
// box instance; a missing sequence number raises FragmentGap. PNG: returns
// each caBX chunk payload.
std::vector<Bytes> locate_jumbf(const FileBlob& blob, const ContainerMap& map);

ManifestStore parse_manifest_store(ByteSpan jumbf);

// Checks the c2pa.hash.data assertion: SHA-256 over the file with the
// declared exclusion ranges omitted, compared against the stored digest.
// No signature or trust-list validation happens here: Valid means "the hash
// binds to these bytes", nothing more.
HardBindingStatus verify_hard_binding(const FileBlob& blob, const ManifestStore& store);

// Full pipeline: parse containers, locate, parse, verify.
ManifestFinding probe_c2pa(const FileBlob& blob);

// ---- fixture support -------------------------------------------------------
// Writes a minimal UNSIGNED manifest store (structure + hard binding only).
// Not conformant for production use: there is no claim signature and no
// certificate, so nothing here asserts authenticity. Tests and the synthetic
// corpus generator are the only intended consumers.

struct FixtureManifestOptions {
    std::string manifest_label = "urn:uuid:00000000-0000-4000-8000-000000000001";
    bool split_app11 = false; // JPEG only: spread the store over two APP11 segments
    std::function<Sha256Digest(ByteSpan)> hasher; // defaults to the production sha256
};

FileBlob embed_fixture_manifest(const FileBlob& blob, const FixtureManifestOptions& opts = {});

} // namespace markinspect
