#pragma once

#include <cstdint>
#include <string_view>

namespace fapsm {

/// Expands a master seed into an independent stream seed for a named stage
/// (and optional item index), so every random draw is reproducible and does
/// not depend on the order stages run in.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index = 0) noexcept;

}  // namespace fapsm
