#include "assocprf/varint.hpp"

namespace assocprf::varint {

void append(std::vector<std::uint8_t>& out, std::uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<std::uint8_t>((value & 0x7F) | 0x80));
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

bool read(std::span<const std::uint8_t> in, std::size_t& pos, std::uint64_t& value) {
  value = 0;
  unsigned shift = 0;
  while (pos < in.size()) {
    const std::uint8_t byte = in[pos++];
    if (shift == 63 && (byte & 0x7E) != 0) return false;
    value |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
    if ((byte & 0x80) == 0) return true;
    shift += 7;
    if (shift > 63) return false;
  }
  return false;
}

}  // namespace assocprf::varint
