#pragma once

#include <cstdint>
#include <vector>

#include "gprseg/common.hpp"
#include "gprseg/model_gen.hpp"

namespace gprseg {

/// Ricker wavelet, peak amplitude 1 at t = t0.
double ricker(double t, double f0, double t0);
inline double ricker_t0(double f0) { return 1.2 / f0; }
inline double ricker(double t, double f0) { return ricker(t, f0, ricker_t0(f0)); }

/// Largest stable time step for the 2-D Yee scheme on a square grid,
/// scaled by a safety factor.
double stable_dt(double dx, double courant_factor);

/// Semi-implicit update coefficients for a lossy Ez cell.
struct CellCoeffs {
    double ca;
    double cb;
};
CellCoeffs ez_cell_coefficients(double eps_r, double sigma, double dt, double dx);

struct SimConfig {
    double dx = 0.01;             // m
    double dt = 0.0;              // s; 0 derives stable_dt(dx, courant_factor)
    double courant_factor = 0.99;
    int n_steps = 800;
    double f0 = 600e6;            // Hz
    double amplitude = 1.0;

    int cpml_cells = 10;
    int cpml_order = 3;
    double kappa_max = 7.0;
    double alpha_max = 0.05;
    double sigma_factor = 0.8;    // scales the textbook optimum sigma_max

    int src_row = 10;             // colocated source/receiver row, padded grid
    int n_traces = 99;
    int trace_offset_cells = 12;  // first trace column, padded grid
    int trace_step_cells = 2;

    // Cells at or above pec_sigma_threshold can be clamped to Ez = 0 instead
    // of running the lossy-coefficient update. Off by default; the lossy path
    // is stable (|Ca| < 1) and keeps rebar cells ordinary material.
    bool pec_mode = false;
    double pec_sigma_threshold = 1e6;  // S/m

    /// Actual step used by the solver. An explicit dt may exceed the exact
    /// CFL bound by up to 0.5%; published GPR settings sit a hair above it
    /// and remain usable over 800 steps.
    double effective_dt() const;
    std::vector<int> trace_cols() const;
};

/// One radargram: rows are time samples, columns are traces.
struct Bscan {
    GridF data;
    double dt = 0.0;            // s
    double trace_spacing = 0.0; // m
    double f0 = 0.0;            // Hz, source wavelet
    std::vector<int> src_cols;  // grid columns of each trace
    int n_samples() const { return data.rows(); }
    int n_traces() const { return data.cols(); }
};

/// 2-D TMz FDTD solver with a convolutional PML on all four sides.
/// The model passed in must already include the absorbing-layer padding;
/// material coefficients are frozen at construction.
class FdtdSolver {
public:
    FdtdSolver(const LiningModel& padded_model, const SimConfig& config);

    /// Zeroes all fields and convolution accumulators.
    void reset();

    /// Advances every field by one time step and injects the source.
    /// `step_index` selects the source sample; callers advance it from 0.
    void step(int step_index, int src_row, int src_col);

    /// Runs n_steps from cold fields and returns Ez at the colocated
    /// receiver after each step. Throws InstabilityError if the field
    /// magnitude runs away.
    std::vector<float> run_ascan(int src_col);

    /// One A-scan per configured trace column.
    Bscan run_bscan();

    const GridF& ez() const { return ez_; }
    const GridF& hx() const { return hx_; }
    const GridF& hy() const { return hy_; }
    double dt() const { return dt_; }
    int rows() const { return nr_; }
    int cols() const { return nc_; }

private:
    void build_material_coefficients(const LiningModel& model);
    void build_pml_profiles(const LiningModel& model);
    void check_stability(int step_index) const;

    SimConfig cfg_;
    int nr_ = 0;
    int nc_ = 0;
    double dt_ = 0.0;

    GridF ca_, cb_;   // Ez update, per cell
    float db_ = 0.0f; // H update, uniform non-magnetic media

    GridF ez_;        // nr x nc
    GridF hx_;        // (nr-1) x nc, staggered across rows
    GridF hy_;        // nr x (nc-1), staggered across columns

    // CPML accumulators, full-size for simplicity; nonzero only in the
    // boundary strips.
    GridF psi_ezx_, psi_ezy_;
    GridF psi_hyx_, psi_hxy_;

    // Per-column/-row stretching profiles at both stagger positions.
    std::vector<float> inv_kappa_ex_, be_x_, ce_x_;  // Ez x-derivative, size nc
    std::vector<float> inv_kappa_ey_, be_y_, ce_y_;  // Ez y-derivative, size nr
    std::vector<float> inv_kappa_hx_, bh_x_, ch_x_;  // Hy nodes, size nc-1
    std::vector<float> inv_kappa_hy_, bh_y_, ch_y_;  // Hx nodes, size nr-1
};

/// Convenience wrapper: pads the interior model, runs the full B-scan.
Bscan simulate_bscan(const LiningModel& interior_model, const SimConfig& config);

}  // namespace gprseg
