#include "markinspect/bytes.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>

namespace markinspect {

const char* errc_name(Errc c)
{
    switch (c) {
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptStream: return "CorruptStream";
    case Errc::EncodeFailure: return "EncodeFailure";
    case Errc::EmptyPlane: return "EmptyPlane";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadBlockSize: return "BadBlockSize";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::ImageTooSmall: return "ImageTooSmall";
    case Errc::EmptyRegistry: return "EmptyRegistry";
    case Errc::CorruptContainer: return "CorruptContainer";
    case Errc::FragmentGap: return "FragmentGap";
    case Errc::MalformedBox: return "MalformedBox";
    case Errc::StoreIoFailure: return "StoreIoFailure";
    case Errc::BadParams: return "BadParams";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::IoFailure: return "IoFailure";
    }
    return "Error";
}

std::string to_hex(ByteSpan data)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

std::string to_hex_u64(uint64_t v)
{
    Bytes b(8);
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<uint8_t>(v >> (56 - 8 * i));
    return to_hex(b);
}

static int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        raise(Errc::BadParams, "hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_digit(hex[i]);
        int lo = hex_digit(hex[i + 1]);
        if (hi < 0 || lo < 0)
            raise(Errc::BadParams, "bad hex digit in \"" + std::string(hex) + "\"");
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

uint32_t crc32_ieee(ByteSpan data)
{
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, data.data(), static_cast<uInt>(data.size()));
    return static_cast<uint32_t>(crc);
}

Bytes read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        raise(Errc::IoFailure, "cannot open " + path);
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad())
        raise(Errc::IoFailure, "read error on " + path);
    return data;
}

void write_file(const std::string& path, ByteSpan data)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        raise(Errc::IoFailure, "cannot create " + path);
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
    if (!f)
        raise(Errc::IoFailure, "write error on " + path);
}

} // namespace markinspect
