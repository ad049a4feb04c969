#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gprseg {

// Class id order is fixed; label grids, network channels, metric tables and
// report palettes all index by it.
enum ClassId : uint8_t {
    kConcrete = 0,
    kRock = 1,
    kRebar = 2,
    kCrack = 3,
    kWetCrack = 4,
    kVoid = 5,
    kWetVoid = 6,
    kSeparation = 7,
    kWetSeparation = 8,
};
inline constexpr int kNumClasses = 9;

/// Electromagnetic properties of one material/defect class.
/// Dry defects carry air values, wet defects carry water values.
struct MaterialSpec {
    uint8_t class_id;
    std::string name;
    double eps_lo;   // relative permittivity range, dimensionless
    double eps_hi;
    double sigma;    // conductivity, S/m
};

/// The nine-class table. Indexed by class id.
const std::vector<MaterialSpec>& material_table();

const MaterialSpec& material(uint8_t class_id);

}  // namespace gprseg
