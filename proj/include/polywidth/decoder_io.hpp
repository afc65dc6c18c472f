#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "polywidth/decoder.hpp"

namespace polywidth {

inline constexpr std::uint32_t kDecoderFormatVersion = 1;

/// Binary layout, little-endian:
///   "PWDC" | version u32 | n u32 | p u32 | N u64 | T_p ... T_0 as column-major f64
void write_decoder(std::ostream &out, const PolynomialDecoder<double> &d);
PolynomialDecoder<double> read_decoder(std::istream &in);

void save_decoder(const std::filesystem::path &path, const PolynomialDecoder<double> &d);
PolynomialDecoder<double> load_decoder(const std::filesystem::path &path);

/// Lossless JSON with the same fields as the binary header plus one
/// {"degree", "rows", "cols", "data"} record per mapping matrix.
std::string decoder_to_json(const PolynomialDecoder<double> &d);
PolynomialDecoder<double> decoder_from_json(const std::string &text);

} // namespace polywidth
