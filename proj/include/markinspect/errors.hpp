#pragma once

#include <stdexcept>
#include <string>

namespace markinspect {

enum class Errc {
    UnsupportedFormat,
    CorruptStream,
    EncodeFailure,
    EmptyPlane,
    DimensionMismatch,
    BadBlockSize,
    CapacityExceeded,
    ImageTooSmall,
    EmptyRegistry,
    CorruptContainer,
    FragmentGap,
    MalformedBox,
    StoreIoFailure,
    BadParams,
    EmptyCorpus,
    IoFailure,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message)
        , code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace markinspect
