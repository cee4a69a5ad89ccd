#pragma once

#include "markinspect/fingerprint.hpp"
#include "markinspect/wm_dwtdct.hpp"

#include <string>
#include <vector>

namespace markinspect {

enum class AttackKind { Identity, JpegReencode, Resize, CenterCrop, GaussianNoise, MetadataStrip };

// Parameterized degradation. Construct via the factories so ranges are
// enforced once; apply_attack is deterministic given (input, attack, seed).
struct Attack {
    AttackKind kind = AttackKind::Identity;
    int quality = 0;       // JpegReencode, 1..100
    double scale = 0.0;    // Resize, 0.1..4.0
    double fraction = 0.0; // CenterCrop, 0.1..1.0
    double sigma = 0.0;    // GaussianNoise, counts, >= 0

    static Attack identity();
    static Attack jpeg_reencode(int quality);
    static Attack resize(double scale);
    static Attack center_crop(double fraction);
    static Attack gaussian_noise(double sigma);
    static Attack metadata_strip();

    static Attack from_json(const std::string& json_object_text);

    std::string name() const; // e.g. "jpeg85", "resize0.50", "strip"
};

FileBlob apply_attack(const FileBlob& blob, const Attack& attack, uint64_t seed = 0);

// Ground truth for one marked corpus item. Exactly one marking technique per
// item; the matrix runner applies the matching detector after each attack.
enum class MarkingTechnique { Lsb, DwtDct, Metadata, C2pa, Fingerprint };

const char* marking_technique_name(MarkingTechnique t);

struct MarkedItem {
    std::string id;
    FileBlob blob;
    MarkingTechnique technique;
    Bytes lsb_payload;           // Lsb
    WatermarkPayload payload;    // DwtDct
    std::string expected_label;  // DwtDct / Fingerprint
    uint64_t fingerprint_bits = 0;
};

struct MatrixCell {
    int n_items = 0;
    int n_survived = 0;
    double metric_sum = 0.0; // BER for watermarks, Hamming bits for fingerprints, 0/1 otherwise
    std::vector<std::string> errors;

    bool survived() const { return n_items > 0 && n_survived == n_items; }
    double survival_rate() const { return n_items == 0 ? 0.0 : double(n_survived) / n_items; }
    double mean_metric() const { return n_items == 0 ? 0.0 : metric_sum / n_items; }
};

struct RobustnessMatrix {
    std::vector<std::string> technique_names; // rows
    std::vector<std::string> attack_names;    // columns
    std::vector<std::vector<MatrixCell>> cells;

    const MatrixCell& at(size_t technique, size_t attack) const
    {
        return cells[technique][attack];
    }

    std::string to_csv() const;
    std::string to_json() const;
};

// Applies every attack to every item and re-runs the matching detector.
// Detector failures become cell-level errors; the run itself never aborts.
// Cell outcomes depend only on (items, attacks, registry, params, seed).
RobustnessMatrix run_robustness_matrix(const std::vector<MarkedItem>& items,
                                       const std::vector<Attack>& attacks,
                                       const PayloadRegistry& registry,
                                       const RegistryStore& fingerprints,
                                       const DwtDctParams& params = {},
                                       uint64_t seed = 0);

} // namespace markinspect
