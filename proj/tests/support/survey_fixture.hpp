#pragma once

#include "markinspect/scanner.hpp"
#include "markinspect/version.hpp"

namespace markinspect::test {

// Reference corpus of 50 system results used to pin the aggregation
// arithmetic: 19 images carry some machine-readable marking (12 metadata, of
// which 5 are C2PA manifests with 4 valid hard bindings, plus 8 invisible
// watermarks overlapping the metadata set by one), and 9 carry a visible
// disclosure. Expected aggregate: 38% machine-readable, 18% visible.
struct SurveyFixture {
    std::vector<ProvenanceReport> reports;
    CorpusAnnotations annotations;
};

inline SurveyFixture make_survey_fixture()
{
    SurveyFixture fx;
    for (int i = 0; i < 50; ++i) {
        ProvenanceReport r;
        char buf[8];
        std::snprintf(buf, sizeof buf, "sys_%02d", i);
        r.image_id = buf;
        r.detector_versions = detector_versions();

        if (i < 12)
            r.techniques_found.push_back({ Technique::Metadata, "" });
        if (i < 5) {
            r.techniques_found.push_back({ Technique::C2paManifest, "" });
            if (i < 4)
                r.techniques_found.push_back({ Technique::C2paHardBindingValid, "" });
        }
        if (i >= 11 && i < 19)
            r.techniques_found.push_back({ Technique::InvisibleWatermark, "vendor-mark" });

        r.machine_readable_marking = !r.techniques_found.empty();

        Annotation ann;
        ann.visible_mark = i < 9;
        ann.deployment_category = 1 + i % 4;
        ann.provider_name = "Provider " + std::to_string(i);
        ann.provider_country = i % 5 == 0 ? "NL" : "US";
        fx.annotations[r.image_id] = ann;
        r.visible_disclosure = ann.visible_mark;

        fx.reports.push_back(std::move(r));
    }
    return fx;
}

} // namespace markinspect::test
