#pragma once

#include <json.hpp>

#include "gprseg/manifest.hpp"

// JSON bindings for the configuration structs shared by the manifest reader
// and the CLI. The config structs accept partial JSON objects, falling back
// to the built-in defaults field by field; sample records are strict.

namespace gprseg {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    GenerationConfig, interior_rows, interior_cols, cell_size, category_weights,
    defect_combo_weights, rock_prob, no_defect_rebar_prob, rock_depth_lo,
    rock_depth_hi, crack_len_lo, crack_len_hi, crack_dip_deg, crack_thickness_lo,
    crack_thickness_hi, void_semi_lo, void_semi_hi, sep_thickness_lo,
    sep_thickness_hi, sep_half_len_lo, sep_half_len_hi, rebar_spacing_lo,
    rebar_spacing_hi, rebar_depth_lo, rebar_depth_hi, rebar_radius_cells)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    SimConfig, dx, dt, courant_factor, n_steps, f0, amplitude, cpml_cells,
    cpml_order, kappa_max, alpha_max, sigma_factor, src_row, n_traces,
    trace_offset_cells, trace_step_cells, pec_mode, pec_sigma_threshold)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    PreprocessConfig, static_threshold, f0, dt, band_lo_hz, band_hi_hz,
    filter_order, out_rows, out_cols, remove_mean)

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SampleRecord, index, seed, split, category,
                                   combo, water, rebar, paths, checksums)

}  // namespace gprseg
