#include "gprseg/material.hpp"

#include <stdexcept>

namespace gprseg {

namespace {
// Air: eps 1, sigma 0. Water: eps 81, sigma 5e-4. Rebar: eps 300, sigma 1e8.
// Rock: eps 6..8, sigma 1e-3. Concrete: eps 8..10, sigma 1e-4.
const std::vector<MaterialSpec> kTable = {
    {kConcrete,      "concrete",       8.0,  10.0, 1e-4},
    {kRock,          "rock",           6.0,   8.0, 1e-3},
    {kRebar,         "rebar",        300.0, 300.0, 1e8},
    {kCrack,         "crack",          1.0,   1.0, 0.0},
    {kWetCrack,      "wet_crack",     81.0,  81.0, 5e-4},
    {kVoid,          "void",           1.0,   1.0, 0.0},
    {kWetVoid,       "wet_void",      81.0,  81.0, 5e-4},
    {kSeparation,    "separation",     1.0,   1.0, 0.0},
    {kWetSeparation, "wet_separation", 81.0, 81.0, 5e-4},
};
}  // namespace

const std::vector<MaterialSpec>& material_table() { return kTable; }

const MaterialSpec& material(uint8_t class_id) {
    if (class_id >= kTable.size()) throw std::out_of_range("class id out of range");
    return kTable[class_id];
}

}  // namespace gprseg
