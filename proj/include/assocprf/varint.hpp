#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace assocprf::varint {

// LEB128-style: 7 payload bits per byte, high bit set on every byte but the last.

void append(std::vector<std::uint8_t>& out, std::uint64_t value);

/// Decodes one value starting at `pos` and advances it. Returns false when the
/// input ends mid-value or the value overflows 64 bits.
bool read(std::span<const std::uint8_t> in, std::size_t& pos, std::uint64_t& value);

}  // namespace assocprf::varint
