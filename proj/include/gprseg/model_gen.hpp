#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gprseg/common.hpp"
#include "gprseg/material.hpp"

namespace gprseg {

enum class Category {
    kNoDefect = 0,
    kDryNoRebar = 1,
    kWetNoRebar = 2,
    kDryRebar = 3,
    kWetRebar = 4,
};
inline constexpr int kNumCategories = 5;

enum class DefectKind { kCrack = 0, kVoid = 1, kSeparation = 2 };

// The six defect combinations a defective model can carry.
// Order matches the per-category report columns.
const std::vector<std::vector<DefectKind>>& defect_combos();
std::string defect_combo_name(const std::vector<DefectKind>& combo);

struct CrackGeom {
    double center_x;        // lateral position, m
    double center_d;        // depth, m
    double length;          // m
    int thickness_cells;    // 1 or 2
    double dip_deg;         // from horizontal, [-60, 60]
};

struct VoidGeom {
    double center_x;  // m
    double center_d;  // m
    double semi_x;    // lateral semi-axis, m
    double semi_d;    // depth semi-axis, m
};

struct SeparationGeom {
    double center_x;  // m
    double half_len;  // lateral half extent, m
    double thickness; // peak thickness of the lens, m
};

struct RebarGeom {
    double spacing;   // m
    double depth;     // m
    double phase_x;   // lateral position of the first bar, m
    int radius_cells; // 1 by default
};

/// One randomly drawn lining scenario. Deterministically rasterizable:
/// (descriptor, nothing else) fixes the model, including per-region
/// permittivity draws which are derived from `seed`.
struct ScenarioDescriptor {
    Category category = Category::kNoDefect;
    std::vector<DefectKind> defect_set;  // size 0..2, unique kinds
    bool water = false;
    bool has_rock_layer = false;
    bool has_rebar_row = false;
    double rock_depth = 0.0;  // m, valid when has_rock_layer

    std::optional<CrackGeom> crack;
    std::optional<VoidGeom> void_;
    std::optional<SeparationGeom> separation;
    std::optional<RebarGeom> rebar;

    uint64_t seed = 0;

    bool has_defect(DefectKind k) const;
};

struct GenerationConfig {
    int interior_rows = 70;       // depth cells
    int interior_cols = 200;      // lateral cells
    double cell_size = 0.01;      // m

    std::vector<double> category_weights = {1, 1, 1, 1, 1};      // five categories
    std::vector<double> defect_combo_weights = {1, 1, 1, 1, 1, 1};  // six combos

    double rock_prob = 0.8;            // rock layer probability when not forced
    double no_defect_rebar_prob = 0.5; // rebar probability in the no-defect category
    double rock_depth_lo = 0.45;       // m
    double rock_depth_hi = 0.65;

    double crack_len_lo = 0.1;   // m
    double crack_len_hi = 0.5;
    double crack_dip_deg = 60.0; // dip drawn uniform in [-dip, dip]
    int crack_thickness_lo = 1;  // cells
    int crack_thickness_hi = 2;

    double void_semi_lo = 0.03;  // m
    double void_semi_hi = 0.12;

    double sep_thickness_lo = 0.02;  // m
    double sep_thickness_hi = 0.05;
    double sep_half_len_lo = 0.15;   // m
    double sep_half_len_hi = 0.5;

    double rebar_spacing_lo = 0.1;   // m
    double rebar_spacing_hi = 0.25;
    double rebar_depth_lo = 0.05;    // m
    double rebar_depth_hi = 0.15;
    int rebar_radius_cells = 1;

    double width() const { return interior_cols * cell_size; }
    double depth() const { return interior_rows * cell_size; }

    /// Throws ConfigError("infeasible-geometry: ...") when the ranges cannot
    /// fit the interior region.
    void validate() const;
};

/// Permittivity, conductivity and class labels for one lining cross-section.
struct LiningModel {
    GridF eps;      // relative permittivity
    GridF sigma;    // conductivity, S/m
    GridU8 labels;  // class ids 0..8
    double cell_size = 0.01;  // m
    ScenarioDescriptor descriptor;
    int pad_cells = 0;  // 0 for interior-only models, 10 after CPML padding

    int rows() const { return eps.rows(); }
    int cols() const { return eps.cols(); }
};

ScenarioDescriptor sample_scenario(const GenerationConfig& config, uint64_t seed);

/// Paints the interior model. Painting order (later wins on overlap):
/// concrete, rock layer, separation lens, voids, cracks, rebar row.
LiningModel rasterize(const GenerationConfig& config, const ScenarioDescriptor& descriptor);

/// Expands the grid by n_cells on every side, replicating edge values.
/// Padding labels copy the nearest interior cell and are excluded from
/// losses and metrics downstream.
LiningModel pad_for_cpml(const LiningModel& model, int n_cells = 10);

}  // namespace gprseg
