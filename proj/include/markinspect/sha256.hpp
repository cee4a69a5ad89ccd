#pragma once

#include "markinspect/bytes.hpp"

#include <array>

namespace markinspect {

using Sha256Digest = std::array<uint8_t, 32>;

class Sha256 {
public:
    Sha256();
    void update(ByteSpan data);
    Sha256Digest finish();

private:
    void process_block(const uint8_t* block);

    std::array<uint32_t, 8> state_;
    std::array<uint8_t, 64> buffer_;
    size_t buffer_len_ = 0;
    uint64_t total_len_ = 0;
};

Sha256Digest sha256(ByteSpan data);

} // namespace markinspect
