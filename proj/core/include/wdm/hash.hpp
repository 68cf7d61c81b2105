#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace wdm {

/// 64-bit FNV-1a; stable across platforms, used for config and schedule fingerprints.
std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

}  // namespace wdm
