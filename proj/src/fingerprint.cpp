#include "markinspect/fingerprint.hpp"

#include "markinspect/transforms.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

namespace markinspect {

uint64_t compute_phash(const RasterImage& img)
{
    const Plane luma = rgb_to_luma(img);
    const Plane small = resize_bilinear(luma, 32, 32);
    const Plane coeffs = dct2_square_forward(small);

    std::array<double, 63> ac;
    size_t k = 0;
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
            if (r == 0 && c == 0)
                continue;
            ac[k++] = coeffs.at(r, c);
        }

    std::array<double, 63> sorted = ac;
    std::nth_element(sorted.begin(), sorted.begin() + 31, sorted.end());
    const double median = sorted[31];

    // margin absorbs transform roundoff so a constant image stays all-zero
    constexpr double kTieMargin = 1e-6;
    uint64_t bits = 0;
    for (size_t i = 0; i < ac.size(); ++i)
        if (ac[i] > median + kTieMargin)
            bits |= 1ull << i;
    return bits;
}

int hamming_distance_u64(uint64_t a, uint64_t b)
{
    return std::popcount(a ^ b);
}

namespace {

    uint64_t parse_hex_bits(const std::string& hex)
    {
        if (hex.size() != 16)
            raise(Errc::StoreIoFailure, "hex_bits must be 16 hex digits");
        uint64_t v = 0;
        for (char c : hex) {
            int d;
            if (c >= '0' && c <= '9')
                d = c - '0';
            else if (c >= 'a' && c <= 'f')
                d = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F')
                d = c - 'A' + 10;
            else
                raise(Errc::StoreIoFailure, "bad hex digit in hex_bits");
            v = v << 4 | static_cast<uint64_t>(d);
        }
        return v;
    }

    std::string store_line(const Fingerprint& fp)
    {
        nlohmann::ordered_json rec = { { "hex_bits", to_hex_u64(fp.bits) },
                                       { "label", fp.source_label },
                                       { "created_at", fp.created_at } };
        return rec.dump() + "\n";
    }

} // namespace

RegistryStore RegistryStore::open(const std::string& path)
{
    RegistryStore store;
    store.path_ = path;

    std::ifstream f(path);
    if (!f)
        return store; // new store; file appears on first append

    std::string line;
    size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty())
            continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            Fingerprint fp;
            fp.bits = parse_hex_bits(rec.at("hex_bits").get<std::string>());
            fp.source_label = rec.at("label").get<std::string>();
            fp.created_at = rec.at("created_at").get<int64_t>();
            store.records_.push_back(std::move(fp));
        } catch (const nlohmann::json::exception& e) {
            raise(Errc::StoreIoFailure,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return store;
}

RegistryStore RegistryStore::in_memory()
{
    return RegistryStore();
}

void RegistryStore::append(const Fingerprint& fp)
{
    if (!path_.empty()) {
        std::ofstream f(path_, std::ios::app | std::ios::binary);
        if (!f)
            raise(Errc::StoreIoFailure, "cannot open " + path_ + " for append");
        f << store_line(fp);
        f.flush();
        if (!f)
            raise(Errc::StoreIoFailure, "append to " + path_ + " failed");
    }
    records_.push_back(fp);
}

Fingerprint register_fingerprint(RegistryStore& store, const RasterImage& img,
                                 const std::string& label, int64_t created_at)
{
    Fingerprint fp;
    fp.bits = compute_phash(img);
    fp.source_label = label;
    fp.created_at = created_at;
    store.append(fp);
    return fp;
}

std::optional<FingerprintMatch> match_fingerprint(const RegistryStore& store,
                                                  const RasterImage& img, int max_distance)
{
    const uint64_t bits = compute_phash(img);
    std::optional<FingerprintMatch> best;
    for (const auto& record : store.records()) {
        const int d = hamming_distance_u64(bits, record.bits);
        if (d <= max_distance && (!best || d < best->distance))
            best = FingerprintMatch { record, d };
    }
    return best;
}

} // namespace markinspect
