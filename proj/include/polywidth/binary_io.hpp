#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "polywidth/errors.hpp"

namespace polywidth::detail {

// Fixed-width little-endian encoding independent of host byte order.
template <typename T>
void write_le(std::ostream &out, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed");
}

template <typename T>
T read_le(std::istream &in)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes{};
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!in)
        throw IoError("unexpected end of file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

inline void write_magic(std::ostream &out, const char (&magic)[5])
{
    out.write(magic, 4);
    if (!out)
        throw IoError("write failed");
}

inline void expect_magic(std::istream &in, const char (&magic)[5])
{
    char got[4] = {};
    in.read(got, 4);
    if (!in || std::memcmp(got, magic, 4) != 0)
        throw IoError(std::string("bad magic, expected ") + magic);
}

} // namespace polywidth::detail
