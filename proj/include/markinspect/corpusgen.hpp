#pragma once

#include "markinspect/scanner.hpp"

namespace markinspect {

// Synthetic stand-in for a collection of generator outputs: every image is a
// seeded gradient-plus-shapes composition (optionally noisy), marked with a
// configured combination of techniques, with ground truth written alongside.

struct FixtureGroup {
    int count = 0;
    std::vector<std::string> markings; // of {"dwtdct","lsb","metadata","c2pa","fingerprint"}
    std::string format = "png";        // "png" | "jpeg" (jpeg cannot carry lsb)
};

struct FixtureSpec {
    int width = 256;
    int height = 256;
    std::vector<FixtureGroup> groups;

    static FixtureSpec from_json(const nlohmann::json& doc);
    static FixtureSpec from_file(const std::string& path);
    void validate() const;
};

struct FixtureImageTruth {
    std::string id;
    std::string file; // relative to the corpus directory
    std::string format;
    std::vector<std::string> markings;
    std::string wm_label;        // dwtdct registry label
    std::string wm_payload_hex;  // dwtdct payload
    std::string lsb_payload_hex;
    std::string fp_label;
};

struct FixtureCorpus {
    std::string directory;
    std::vector<FixtureImageTruth> images;
    std::string images_dir;
    std::string ground_truth_path;
    std::string annotations_path;
    std::string registry_path;
    std::string fingerprints_path;
};

RasterImage synthesize_fixture_image(uint64_t seed, int index, int width, int height);

// Illustrative registry shipped with generated corpora. The payloads are
// arbitrary ASCII tags; no claim is made about any real vendor's payloads.
PayloadRegistry fixture_registry();

FixtureCorpus generate_fixture_corpus(const FixtureSpec& spec, uint64_t seed,
                                      const std::string& out_dir);

std::vector<FixtureImageTruth> load_ground_truth(const std::string& path);

} // namespace markinspect
