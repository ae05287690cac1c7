#pragma once

#include <optional>
#include <string_view>

namespace molpack {

inline constexpr int kMaxAtomicNumber = 118;

// Atomic number for an element symbol ("H" -> 1, "Og" -> 118), matched
// case-sensitively.  Returns nullopt for anything that is not a symbol.
std::optional<int> element_number(std::string_view symbol);

// Element symbol for an atomic number in [1, 118].  Throws BoundsError
// otherwise.
std::string_view element_symbol(int atomic_number);

}  // namespace molpack
