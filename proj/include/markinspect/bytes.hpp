#pragma once

#include "markinspect/errors.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace markinspect {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

// Sequential big/little-endian reader over a borrowed byte range.
// Out-of-range reads raise the error code supplied at construction, so each
// parser reports truncation in its own vocabulary.
class ByteReader {
public:
    explicit ByteReader(ByteSpan data, Errc truncation_error = Errc::CorruptStream)
        : data_(data)
        , err_(truncation_error)
    {
    }

    size_t pos() const noexcept { return pos_; }
    size_t remaining() const noexcept { return data_.size() - pos_; }
    bool eof() const noexcept { return pos_ >= data_.size(); }

    void seek(size_t pos)
    {
        if (pos > data_.size())
            raise(err_, "seek past end");
        pos_ = pos;
    }

    void skip(size_t n) { need(n), pos_ += n; }

    uint8_t u8() { return need(1), data_[pos_++]; }

    uint16_t u16be()
    {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    uint32_t u32be()
    {
        need(4);
        uint32_t v = static_cast<uint32_t>(data_[pos_]) << 24
            | static_cast<uint32_t>(data_[pos_ + 1]) << 16
            | static_cast<uint32_t>(data_[pos_ + 2]) << 8
            | static_cast<uint32_t>(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }

    uint16_t u16le()
    {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_ + 1] << 8 | data_[pos_]);
        pos_ += 2;
        return v;
    }

    uint32_t u32le()
    {
        need(4);
        uint32_t v = static_cast<uint32_t>(data_[pos_ + 3]) << 24
            | static_cast<uint32_t>(data_[pos_ + 2]) << 16
            | static_cast<uint32_t>(data_[pos_ + 1]) << 8
            | static_cast<uint32_t>(data_[pos_]);
        pos_ += 4;
        return v;
    }

    ByteSpan bytes(size_t n)
    {
        need(n);
        ByteSpan out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    void need(size_t n) const
    {
        if (remaining() < n)
            raise(err_, "truncated at offset " + std::to_string(pos_));
    }

private:
    ByteSpan data_;
    size_t pos_ = 0;
    Errc err_;
};

inline void put_u8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void put_u16be(Bytes& out, uint16_t v)
{
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void put_u32be(Bytes& out, uint32_t v)
{
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void put_u16le(Bytes& out, uint16_t v)
{
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void put_u32le(Bytes& out, uint32_t v)
{
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

inline void put_bytes(Bytes& out, ByteSpan data)
{
    out.insert(out.end(), data.begin(), data.end());
}

inline void put_text(Bytes& out, std::string_view s)
{
    out.insert(out.end(), s.begin(), s.end());
}

std::string to_hex(ByteSpan data);
std::string to_hex_u64(uint64_t v);
Bytes from_hex(std::string_view hex); // raises BadParams on odd length / bad digit

uint32_t crc32_ieee(ByteSpan data); // CRC-32/ISO-HDLC as used by PNG and the payload frame

Bytes read_file(const std::string& path);  // raises IoFailure
void write_file(const std::string& path, ByteSpan data);

} // namespace markinspect
