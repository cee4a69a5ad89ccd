#include "markinspect/scanner.hpp"

#include "markinspect/version.hpp"
#include "markinspect/wm_lsb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace markinspect {

const char* technique_name(Technique t)
{
    switch (t) {
    case Technique::Metadata: return "metadata";
    case Technique::C2paManifest: return "c2pa_manifest";
    case Technique::C2paHardBindingValid: return "c2pa_hard_binding_valid";
    case Technique::InvisibleWatermark: return "invisible_watermark";
    case Technique::FingerprintMatch: return "fingerprint_match";
    case Technique::LsbPayload: return "lsb_payload";
    }
    return "unknown";
}

std::optional<Technique> technique_from_name(std::string_view name)
{
    for (Technique t : { Technique::Metadata, Technique::C2paManifest,
                         Technique::C2paHardBindingValid, Technique::InvisibleWatermark,
                         Technique::FingerprintMatch, Technique::LsbPayload })
        if (name == technique_name(t))
            return t;
    return std::nullopt;
}

namespace {

    Annotation annotation_from_json(const nlohmann::json& v)
    {
        Annotation a;
        a.visible_mark = v.at("visible_mark").get<bool>();
        a.deployment_category = v.at("deployment_category").get<int>();
        if (a.deployment_category < 1 || a.deployment_category > 4)
            raise(Errc::BadParams, "deployment_category must be 1..4");
        a.provider_name = v.value("provider_name", std::string());
        a.provider_country = v.value("provider_country", std::string());
        a.model_name = v.value("model_name", std::string());
        return a;
    }

    std::vector<std::string> split_csv_line(const std::string& line)
    {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream is(line);
        while (std::getline(is, field, ','))
            fields.push_back(field);
        if (!line.empty() && line.back() == ',')
            fields.push_back("");
        return fields;
    }

} // namespace

CorpusAnnotations load_annotations(const std::string& path)
{
    CorpusAnnotations out;
    const Bytes raw = read_file(path);
    const std::string text(raw.begin(), raw.end());

    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        std::istringstream is(text);
        std::string line;
        if (!std::getline(is, line))
            raise(Errc::BadParams, path + ": empty annotation file");
        const std::vector<std::string> header = split_csv_line(line);
        const std::vector<std::string> expected
            = { "image_id", "visible_mark", "deployment_category",
                "provider_name", "provider_country", "model_name" };
        if (header != expected)
            raise(Errc::BadParams, path + ": unexpected CSV header");
        size_t line_no = 1;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty())
                continue;
            const std::vector<std::string> f = split_csv_line(line);
            if (f.size() != expected.size())
                raise(Errc::BadParams,
                      path + ":" + std::to_string(line_no) + ": wrong field count");
            Annotation a;
            a.visible_mark = f[1] == "true" || f[1] == "1";
            a.deployment_category = std::stoi(f[2]);
            if (a.deployment_category < 1 || a.deployment_category > 4)
                raise(Errc::BadParams,
                      path + ":" + std::to_string(line_no) + ": category must be 1..4");
            a.provider_name = f[3];
            a.provider_country = f[4];
            a.model_name = f[5];
            out[f[0]] = std::move(a);
        }
        return out;
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::BadParams, path + ": " + e.what());
    }
    if (!doc.is_object())
        raise(Errc::BadParams, path + ": annotations must map image_id to fields");
    for (const auto& [id, v] : doc.items())
        out[id] = annotation_from_json(v);
    return out;
}

namespace {

    std::string payload_preview(const Bytes& payload)
    {
        const bool printable = !payload.empty()
            && std::all_of(payload.begin(), payload.end(),
                           [](uint8_t c) { return c >= 0x20 && c < 0x7F; });
        if (printable)
            return std::string(payload.begin(), payload.end());
        return "0x" + to_hex(ByteSpan(payload));
    }

} // namespace

ProvenanceReport scan_image(const FileBlob& blob, const std::string& image_id,
                            const PayloadRegistry& registry, const RegistryStore& fingerprints,
                            const ScanOptions& options,
                            const std::optional<Annotation>& annotation)
{
    ProvenanceReport report;
    report.image_id = image_id;
    report.detector_versions = detector_versions();
    if (annotation)
        report.visible_disclosure = annotation->visible_mark;

    auto run_detector = [&](const std::string& name, auto&& body) {
        nlohmann::ordered_json detail = nlohmann::ordered_json::object();
        try {
            body(detail);
            detail["status"] = "ok";
        } catch (const std::exception& e) {
            detail["status"] = "error";
            detail["error"] = e.what();
        }
        report.detector_details[name] = std::move(detail);
    };

    run_detector("metadata", [&](nlohmann::ordered_json& detail) {
        const std::vector<MetadataRecord> records = extract_records(blob);
        const AiOriginFinding finding = classify_ai_origin(records, options.rules);
        detail["n_records"] = records.size();
        nlohmann::ordered_json matches = nlohmann::ordered_json::array();
        for (const auto& m : finding.matched_rules)
            matches.push_back({ { "rule", m.rule_id },
                                { "key", m.record.key },
                                { "value", m.record.value } });
        detail["matched_rules"] = std::move(matches);
        detail["confidence"]
            = finding.confidence == AiRuleConfidence::Explicit ? "explicit" : "heuristic";
        if (finding.is_ai_declared)
            report.techniques_found.push_back({ Technique::Metadata, "" });
    });

    run_detector("c2pa", [&](nlohmann::ordered_json& detail) {
        const ManifestFinding finding = probe_c2pa(blob);
        detail["present"] = finding.present;
        detail["manifest_labels"] = finding.manifest_labels;
        detail["hard_binding"] = hard_binding_status_name(finding.hard_binding);
        if (finding.present) {
            report.techniques_found.push_back({ Technique::C2paManifest, "" });
            if (finding.hard_binding == HardBindingStatus::Valid)
                report.techniques_found.push_back({ Technique::C2paHardBindingValid, "" });
        }
    });

    // pixel-domain detectors share one decode
    RasterImage pixels;
    bool decoded = false;
    std::string decode_error;
    try {
        pixels = decode_raster(blob);
        decoded = true;
    } catch (const std::exception& e) {
        decode_error = e.what();
    }

    run_detector("lsb", [&](nlohmann::ordered_json& detail) {
        if (!decoded)
            throw Error(Errc::CorruptStream, decode_error);
        const LsbExtractResult r = lsb_extract(pixels);
        detail["found"] = r.status == LsbStatus::Found;
        if (r.status == LsbStatus::CorruptFrame)
            detail["note"] = "magic present but frame checksum failed";
        if (r.status == LsbStatus::Found) {
            detail["payload"] = payload_preview(r.payload);
            report.techniques_found.push_back({ Technique::LsbPayload, "" });
        }
    });

    run_detector("dwtdct", [&](nlohmann::ordered_json& detail) {
        if (!decoded)
            throw Error(Errc::CorruptStream, decode_error);
        const DetectionResult r = dwtdct_detect(pixels, registry, options.dwtdct_params);
        detail["detected"] = r.detected;
        detail["distance_fraction"] = r.distance_fraction;
        if (r.detected) {
            detail["label"] = r.label;
            report.techniques_found.push_back({ Technique::InvisibleWatermark, r.label });
        }
    });

    run_detector("fingerprint", [&](nlohmann::ordered_json& detail) {
        if (!decoded)
            throw Error(Errc::CorruptStream, decode_error);
        detail["phash"] = to_hex_u64(compute_phash(pixels));
        const auto match
            = match_fingerprint(fingerprints, pixels, options.fingerprint_max_distance);
        detail["matched"] = match.has_value();
        if (match) {
            detail["label"] = match->record.source_label;
            detail["distance"] = match->distance;
            report.techniques_found.push_back(
                { Technique::FingerprintMatch, match->record.source_label });
        }
    });

    for (const auto& plugin : options.plugins) {
        run_detector(plugin.name, [&](nlohmann::ordered_json& detail) {
            const DetectionResult r = plugin.fn(blob);
            detail["detected"] = r.detected;
            detail["distance_fraction"] = r.distance_fraction;
            if (r.detected) {
                detail["label"] = r.label;
                report.techniques_found.push_back({ Technique::InvisibleWatermark, r.label });
            }
        });
    }

    report.machine_readable_marking = !report.techniques_found.empty();
    return report;
}

int round_half_up_percent(int count, int n)
{
    if (n <= 0)
        raise(Errc::EmptyCorpus, "percentage over zero images");
    return static_cast<int>(std::floor(100.0 * count / n + 0.5));
}

CorpusSummary aggregate_corpus(const std::vector<ProvenanceReport>& reports,
                               const CorpusAnnotations& annotations)
{
    if (reports.empty())
        raise(Errc::EmptyCorpus, "no reports to aggregate");

    CorpusSummary summary;
    summary.n_images = static_cast<int>(reports.size());

    for (const auto& report : reports) {
        std::optional<bool> visible = report.visible_disclosure;
        const auto ann = annotations.find(report.image_id);
        if (!visible && ann != annotations.end())
            visible = ann->second.visible_mark;

        if (report.machine_readable_marking)
            summary.n_machine_readable += 1;
        if (visible.value_or(false))
            summary.n_visible += 1;

        // count each technique once per image
        std::vector<std::string> seen;
        for (const auto& f : report.techniques_found) {
            const std::string name = technique_name(f.technique);
            if (std::find(seen.begin(), seen.end(), name) == seen.end()) {
                seen.push_back(name);
                summary.technique_counts[name] += 1;
            }
        }

        if (ann != annotations.end()) {
            GroupBreakdown& cat = summary.by_deployment_category[ann->second.deployment_category];
            cat.n += 1;
            cat.machine_readable += report.machine_readable_marking ? 1 : 0;
            cat.visible += visible.value_or(false) ? 1 : 0;
            if (!ann->second.provider_country.empty()) {
                GroupBreakdown& country = summary.by_provider_country[ann->second.provider_country];
                country.n += 1;
                country.machine_readable += report.machine_readable_marking ? 1 : 0;
                country.visible += visible.value_or(false) ? 1 : 0;
            }
        }
    }

    summary.pct_machine_readable = round_half_up_percent(summary.n_machine_readable, summary.n_images);
    summary.pct_visible = round_half_up_percent(summary.n_visible, summary.n_images);
    return summary;
}

nlohmann::ordered_json report_to_json(const ProvenanceReport& report)
{
    nlohmann::ordered_json doc;
    doc["image_id"] = report.image_id;
    doc["machine_readable_marking"] = report.machine_readable_marking;
    nlohmann::ordered_json techniques = nlohmann::ordered_json::array();
    for (const auto& f : report.techniques_found) {
        nlohmann::ordered_json t;
        t["technique"] = technique_name(f.technique);
        t["label"] = f.label;
        techniques.push_back(std::move(t));
    }
    doc["techniques_found"] = std::move(techniques);
    if (report.visible_disclosure)
        doc["visible_disclosure"] = *report.visible_disclosure;
    else
        doc["visible_disclosure"] = nullptr;
    doc["detector_versions"] = report.detector_versions;
    doc["detectors"] = report.detector_details;
    return doc;
}

ProvenanceReport report_from_json(const nlohmann::ordered_json& doc)
{
    ProvenanceReport report;
    try {
        report.image_id = doc.at("image_id").get<std::string>();
        report.machine_readable_marking = doc.at("machine_readable_marking").get<bool>();
        for (const auto& t : doc.at("techniques_found")) {
            const auto technique = technique_from_name(t.at("technique").get<std::string>());
            if (!technique)
                raise(Errc::BadParams,
                      "unknown technique \"" + t.at("technique").get<std::string>() + "\"");
            report.techniques_found.push_back({ *technique, t.value("label", std::string()) });
        }
        if (!doc.at("visible_disclosure").is_null())
            report.visible_disclosure = doc.at("visible_disclosure").get<bool>();
        report.detector_versions
            = doc.at("detector_versions").get<std::map<std::string, std::string>>();
        report.detector_details = doc.value("detectors", nlohmann::ordered_json::object());
    } catch (const nlohmann::ordered_json::exception& e) {
        raise(Errc::BadParams, std::string("report JSON: ") + e.what());
    }
    return report;
}

nlohmann::ordered_json summary_to_json(const CorpusSummary& summary)
{
    nlohmann::ordered_json doc;
    doc["n_images"] = summary.n_images;
    doc["machine_readable"]
        = { { "count", summary.n_machine_readable }, { "percent", summary.pct_machine_readable } };
    doc["visible_disclosure"]
        = { { "count", summary.n_visible }, { "percent", summary.pct_visible } };
    doc["technique_counts"] = summary.technique_counts;

    nlohmann::ordered_json categories = nlohmann::ordered_json::object();
    for (const auto& [category, group] : summary.by_deployment_category)
        categories[std::to_string(category)] = { { "n", group.n },
                                                 { "machine_readable", group.machine_readable },
                                                 { "visible", group.visible } };
    doc["by_deployment_category"] = std::move(categories);

    nlohmann::ordered_json countries = nlohmann::ordered_json::object();
    for (const auto& [country, group] : summary.by_provider_country)
        countries[country] = { { "n", group.n },
                               { "machine_readable", group.machine_readable },
                               { "visible", group.visible } };
    doc["by_provider_country"] = std::move(countries);
    return doc;
}

std::string render_report_json(const ProvenanceReport& report)
{
    return report_to_json(report).dump(2) + "\n";
}

std::string render_summary_json(const CorpusSummary& summary)
{
    return summary_to_json(summary).dump(2) + "\n";
}

std::string render_report_markdown(const ProvenanceReport& report)
{
    std::ostringstream os;
    os << "# Provenance report: " << report.image_id << "\n\n";
    os << "| field | value |\n|---|---|\n";
    os << "| machine-readable marking | " << (report.machine_readable_marking ? "yes" : "no")
       << " |\n";
    os << "| visible disclosure | "
       << (report.visible_disclosure ? (*report.visible_disclosure ? "yes (annotated)"
                                                                   : "no (annotated)")
                                     : "unassessed")
       << " |\n\n";

    os << "## Techniques found\n\n";
    if (report.techniques_found.empty()) {
        os << "none\n";
    } else {
        for (const auto& f : report.techniques_found) {
            os << "- " << technique_name(f.technique);
            if (!f.label.empty())
                os << " (" << f.label << ")";
            os << "\n";
        }
    }

    os << "\n## Detectors\n\n";
    for (const auto& [name, detail] : report.detector_details.items())
        os << "### " << name << "\n\n```json\n" << detail.dump(2) << "\n```\n\n";
    return os.str();
}

std::string render_summary_markdown(const CorpusSummary& summary)
{
    std::ostringstream os;
    os << "# Corpus summary\n\n";
    os << "- images: " << summary.n_images << "\n";
    os << "- machine-readable: " << summary.n_machine_readable << "/" << summary.n_images << " ("
       << summary.pct_machine_readable << "%)\n";
    os << "- visible disclosure: " << summary.n_visible << "/" << summary.n_images << " ("
       << summary.pct_visible << "%)\n\n";

    os << "## Technique counts\n\n| technique | images |\n|---|---|\n";
    for (const auto& [name, count] : summary.technique_counts)
        os << "| " << name << " | " << count << " |\n";

    if (!summary.by_deployment_category.empty()) {
        os << "\n## By deployment category\n\n| category | n | machine-readable | visible |\n|---|---|---|---|\n";
        for (const auto& [category, group] : summary.by_deployment_category)
            os << "| " << category << " | " << group.n << " | " << group.machine_readable
               << " | " << group.visible << " |\n";
    }
    if (!summary.by_provider_country.empty()) {
        os << "\n## By provider country\n\n| country | n | machine-readable | visible |\n|---|---|---|---|\n";
        for (const auto& [country, group] : summary.by_provider_country)
            os << "| " << country << " | " << group.n << " | " << group.machine_readable
               << " | " << group.visible << " |\n";
    }
    return os.str();
}

namespace {

    bool type_matches(const nlohmann::json& value, const std::string& type)
    {
        if (type == "object")
            return value.is_object();
        if (type == "array")
            return value.is_array();
        if (type == "string")
            return value.is_string();
        if (type == "integer")
            return value.is_number_integer();
        if (type == "number")
            return value.is_number();
        if (type == "boolean")
            return value.is_boolean();
        if (type == "null")
            return value.is_null();
        return false;
    }

    void validate_node(const nlohmann::json& value, const nlohmann::json& schema,
                       const std::string& where)
    {
        if (schema.contains("type")) {
            const auto& type = schema["type"];
            bool ok = false;
            if (type.is_string())
                ok = type_matches(value, type.get<std::string>());
            else if (type.is_array())
                for (const auto& t : type)
                    ok = ok || type_matches(value, t.get<std::string>());
            if (!ok)
                raise(Errc::BadParams, where + ": type mismatch");
        }
        if (schema.contains("enum")) {
            bool ok = false;
            for (const auto& candidate : schema["enum"])
                ok = ok || candidate == value;
            if (!ok)
                raise(Errc::BadParams, where + ": value not in enum");
        }
        if (value.is_object()) {
            if (schema.contains("required"))
                for (const auto& key : schema["required"])
                    if (!value.contains(key.get<std::string>()))
                        raise(Errc::BadParams,
                              where + ": missing required key \"" + key.get<std::string>() + "\"");
            if (schema.contains("properties"))
                for (const auto& [key, sub] : schema["properties"].items())
                    if (value.contains(key))
                        validate_node(value[key], sub, where + "." + key);
            if (schema.contains("additionalProperties")
                && schema["additionalProperties"].is_object()) {
                const auto& props = schema.contains("properties") ? schema["properties"]
                                                                  : nlohmann::json::object();
                for (const auto& [key, sub] : value.items())
                    if (!props.contains(key))
                        validate_node(sub, schema["additionalProperties"], where + "." + key);
            }
        }
        if (value.is_array() && schema.contains("items")) {
            size_t i = 0;
            for (const auto& item : value)
                validate_node(item, schema["items"], where + "[" + std::to_string(i++) + "]");
        }
    }

} // namespace

void validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema)
{
    validate_node(doc, schema, "$");
}

} // namespace markinspect
