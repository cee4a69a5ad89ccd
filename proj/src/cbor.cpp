#include "markinspect/cbor.hpp"

#include "markinspect/errors.hpp"

namespace markinspect {

namespace {

    struct Decoder {
        ByteReader reader;
        int depth = 0;

        explicit Decoder(ByteSpan data)
            : reader(data, Errc::MalformedBox)
        {
        }

        uint64_t read_argument(uint8_t info)
        {
            if (info < 24)
                return info;
            switch (info) {
            case 24: return reader.u8();
            case 25: return reader.u16be();
            case 26: return reader.u32be();
            case 27: {
                const uint64_t hi = reader.u32be();
                return hi << 32 | reader.u32be();
            }
            default:
                raise(Errc::MalformedBox, "indefinite or reserved CBOR length");
            }
        }

        CborValue decode_item()
        {
            if (++depth > 32)
                raise(Errc::MalformedBox, "CBOR nesting too deep");
            const uint8_t head = reader.u8();
            const uint8_t major = head >> 5;
            const uint8_t info = head & 0x1F;
            CborValue v;
            switch (major) {
            case 0:
                v.type = CborValue::Type::Uint;
                v.uint_value = read_argument(info);
                break;
            case 1: {
                v.type = CborValue::Type::Int;
                const uint64_t n = read_argument(info);
                v.int_value = -1 - static_cast<int64_t>(n);
                break;
            }
            case 2: {
                const uint64_t len = read_argument(info);
                v.type = CborValue::Type::Bytes;
                const ByteSpan data = reader.bytes(len);
                v.bytes.assign(data.begin(), data.end());
                break;
            }
            case 3: {
                const uint64_t len = read_argument(info);
                v.type = CborValue::Type::Text;
                const ByteSpan data = reader.bytes(len);
                v.text.assign(data.begin(), data.end());
                break;
            }
            case 4: {
                const uint64_t len = read_argument(info);
                v.type = CborValue::Type::Array;
                for (uint64_t i = 0; i < len; ++i)
                    v.array.push_back(decode_item());
                break;
            }
            case 5: {
                const uint64_t len = read_argument(info);
                v.type = CborValue::Type::Map;
                for (uint64_t i = 0; i < len; ++i) {
                    CborValue key = decode_item();
                    CborValue value = decode_item();
                    v.map.emplace_back(std::move(key), std::move(value));
                }
                break;
            }
            case 7:
                if (info == 20 || info == 21) {
                    v.type = CborValue::Type::Bool;
                    v.bool_value = info == 21;
                } else if (info == 22) {
                    v.type = CborValue::Type::Null;
                } else {
                    raise(Errc::MalformedBox, "unsupported CBOR simple value");
                }
                break;
            default:
                raise(Errc::MalformedBox, "unsupported CBOR major type");
            }
            --depth;
            return v;
        }
    };

} // namespace

const CborValue* CborValue::find(const std::string& key) const
{
    if (type != Type::Map)
        return nullptr;
    for (const auto& [k, v] : map)
        if (k.type == Type::Text && k.text == key)
            return &v;
    return nullptr;
}

CborValue cbor_decode(ByteSpan data)
{
    Decoder d(data);
    CborValue v = d.decode_item();
    if (d.reader.remaining() != 0)
        raise(Errc::MalformedBox, "trailing bytes after CBOR item");
    return v;
}

void cbor_put_uint64(Bytes& out, uint64_t v)
{
    out.push_back(0x1B); // major 0, 8-byte argument
    for (int i = 7; i >= 0; --i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

namespace {

    void put_header(Bytes& out, uint8_t major, size_t len)
    {
        if (len < 24) {
            out.push_back(static_cast<uint8_t>(major << 5 | len));
        } else if (len <= 0xFF) {
            out.push_back(static_cast<uint8_t>(major << 5 | 24));
            out.push_back(static_cast<uint8_t>(len));
        } else if (len <= 0xFFFF) {
            out.push_back(static_cast<uint8_t>(major << 5 | 25));
            put_u16be(out, static_cast<uint16_t>(len));
        } else {
            out.push_back(static_cast<uint8_t>(major << 5 | 26));
            put_u32be(out, static_cast<uint32_t>(len));
        }
    }

} // namespace

void cbor_put_text(Bytes& out, std::string_view s)
{
    put_header(out, 3, s.size());
    put_text(out, s);
}

void cbor_put_bytes_header(Bytes& out, size_t len)
{
    put_header(out, 2, len);
}

void cbor_put_array_header(Bytes& out, size_t len)
{
    put_header(out, 4, len);
}

void cbor_put_map_header(Bytes& out, size_t len)
{
    put_header(out, 5, len);
}

} // namespace markinspect
