#include "molpack/elements.hpp"

#include <array>
#include <string>
#include <unordered_map>

#include "molpack/error.hpp"

namespace molpack {
namespace {

constexpr std::array<std::string_view, kMaxAtomicNumber + 1> kSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn",
    "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr",
    "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb",
    "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd",
    "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir",
    "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr",
    "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv",
    "Ts", "Og"};

const std::unordered_map<std::string_view, int>& symbol_table() {
  static const auto* table = [] {
    auto* t = new std::unordered_map<std::string_view, int>();
    for (int z = 1; z <= kMaxAtomicNumber; ++z) t->emplace(kSymbols[z], z);
    return t;
  }();
  return *table;
}

}  // namespace

std::optional<int> element_number(std::string_view symbol) {
  const auto& table = symbol_table();
  auto it = table.find(symbol);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string_view element_symbol(int atomic_number) {
  if (atomic_number < 1 || atomic_number > kMaxAtomicNumber) {
    throw BoundsError("element_symbol: atomic number " + std::to_string(atomic_number) +
                      " outside [1, " + std::to_string(kMaxAtomicNumber) + "]");
  }
  return kSymbols[static_cast<std::size_t>(atomic_number)];
}

}  // namespace molpack
