#pragma once

#include "markinspect/attacks.hpp"
#include "markinspect/c2pa.hpp"
#include "markinspect/fingerprint.hpp"
#include "markinspect/metadata.hpp"
#include "markinspect/wm_dwtdct.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <optional>

namespace markinspect {

enum class Technique {
    Metadata,
    C2paManifest,
    C2paHardBindingValid,
    InvisibleWatermark,
    FingerprintMatch,
    LsbPayload,
};

const char* technique_name(Technique t);
std::optional<Technique> technique_from_name(std::string_view name);

struct TechniqueFinding {
    Technique technique;
    std::string label; // registry/fingerprint label where applicable

    bool operator==(const TechniqueFinding&) const = default;
};

struct Annotation {
    bool visible_mark = false;
    int deployment_category = 0; // 1..4
    std::string provider_name;
    std::string provider_country;
    std::string model_name;
};

// image_id -> human annotation sidecar (.json map or .csv)
using CorpusAnnotations = std::map<std::string, Annotation>;
CorpusAnnotations load_annotations(const std::string& path);

struct ProvenanceReport {
    std::string image_id;
    bool machine_readable_marking = false;
    std::vector<TechniqueFinding> techniques_found;
    std::optional<bool> visible_disclosure; // nullopt = unassessed, never inferred
    std::map<std::string, std::string> detector_versions;
    nlohmann::ordered_json detector_details = nlohmann::ordered_json::object();
};

// Plug-in seam for external detectors (e.g. a vendor's learned watermark
// decoder): any callable FileBlob -> DetectionResult.
using DetectorFn = std::function<DetectionResult(const FileBlob&)>;

struct PluginDetector {
    std::string name;
    DetectorFn fn;
};

struct ScanOptions {
    DwtDctParams dwtdct_params;
    AiOriginRules rules = AiOriginRules::defaults();
    int fingerprint_max_distance = kDefaultMaxHashDistance;
    std::vector<PluginDetector> plugins;
};

// Runs every detector; per-detector failures are recorded in the report's
// detail block and never abort the scan. A technique appears only when its
// detector affirmatively fired.
ProvenanceReport scan_image(const FileBlob& blob, const std::string& image_id,
                            const PayloadRegistry& registry, const RegistryStore& fingerprints,
                            const ScanOptions& options = {},
                            const std::optional<Annotation>& annotation = std::nullopt);

struct GroupBreakdown {
    int n = 0;
    int machine_readable = 0;
    int visible = 0;
};

struct CorpusSummary {
    int n_images = 0;
    int n_machine_readable = 0;
    int pct_machine_readable = 0;
    int n_visible = 0;
    int pct_visible = 0;
    std::map<std::string, int> technique_counts;           // per technique name
    std::map<int, GroupBreakdown> by_deployment_category;  // annotated images only
    std::map<std::string, GroupBreakdown> by_provider_country;
};

// Percentages are 100*count/n rounded half-up to whole percent.
int round_half_up_percent(int count, int n);

CorpusSummary aggregate_corpus(const std::vector<ProvenanceReport>& reports,
                               const CorpusAnnotations& annotations = {});

nlohmann::ordered_json report_to_json(const ProvenanceReport& report);
ProvenanceReport report_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json summary_to_json(const CorpusSummary& summary);

std::string render_report_json(const ProvenanceReport& report);
std::string render_report_markdown(const ProvenanceReport& report);
std::string render_summary_json(const CorpusSummary& summary);
std::string render_summary_markdown(const CorpusSummary& summary);

// Structural validation against the shipped JSON schema subset
// (type/properties/required/items). Raises BadParams on violations.
void validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema);

} // namespace markinspect
