#pragma once

#include "markinspect/bytes.hpp"

#include <string>
#include <vector>

namespace markinspect {

// Definite-length CBOR subset: unsigned/negative integers, byte and text
// strings, arrays, maps, booleans and null. Enough for the C2PA data-hash
// assertion; anything else raises MalformedBox.
struct CborValue {
    enum class Type { Uint, Int, Bytes, Text, Array, Map, Bool, Null };

    Type type = Type::Null;
    uint64_t uint_value = 0;
    int64_t int_value = 0;
    bool bool_value = false;
    Bytes bytes;
    std::string text;
    std::vector<CborValue> array;
    std::vector<std::pair<CborValue, CborValue>> map;

    // Map lookup by text key; nullptr when absent or not a map.
    const CborValue* find(const std::string& key) const;

    bool is_unsigned() const { return type == Type::Uint; }
};

CborValue cbor_decode(ByteSpan data); // requires exactly one complete item

// Fixed-width encoders so value patches never change the layout.
void cbor_put_uint64(Bytes& out, uint64_t v);
void cbor_put_text(Bytes& out, std::string_view s);
void cbor_put_bytes_header(Bytes& out, size_t len);
void cbor_put_array_header(Bytes& out, size_t len);
void cbor_put_map_header(Bytes& out, size_t len);

} // namespace markinspect
