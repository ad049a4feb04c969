#include "gprseg/fdtd.hpp"

#include <cmath>
#include <string>

namespace gprseg {

double ricker(double t, double f0, double t0) {
    if (f0 <= 0) throw ConfigError("ricker: f0 must be positive");
    const double arg = kPi * kPi * f0 * f0 * (t - t0) * (t - t0);
    return (1.0 - 2.0 * arg) * std::exp(-arg);
}

double stable_dt(double dx, double courant_factor) {
    if (dx <= 0 || courant_factor <= 0 || courant_factor > 1)
        throw ConfigError("stable_dt: dx must be positive and the factor in (0, 1]");
    return courant_factor * dx / (kC0 * std::sqrt(2.0));
}

CellCoeffs ez_cell_coefficients(double eps_r, double sigma, double dt, double dx) {
    if (eps_r <= 0) throw ConfigError("ez_cell_coefficients: eps_r must be positive");
    const double a = sigma * dt / (2.0 * kEps0 * eps_r);
    return {(1.0 - a) / (1.0 + a), (dt / (kEps0 * eps_r * dx)) / (1.0 + a)};
}

double SimConfig::effective_dt() const {
    if (dt <= 0.0) return stable_dt(dx, courant_factor);
    if (dt > stable_dt(dx, 1.0) * 1.005)
        throw ConfigError("SimConfig: dt exceeds the CFL bound");
    return dt;
}

std::vector<int> SimConfig::trace_cols() const {
    if (n_traces < 1 || trace_step_cells < 1 || trace_offset_cells < 1)
        throw ConfigError("SimConfig: bad trace layout");
    std::vector<int> cols(n_traces);
    for (int k = 0; k < n_traces; ++k)
        cols[k] = trace_offset_cells + k * trace_step_cells;
    return cols;
}

FdtdSolver::FdtdSolver(const LiningModel& padded_model, const SimConfig& config)
    : cfg_(config), nr_(padded_model.rows()), nc_(padded_model.cols()) {
    if (cfg_.cpml_cells < 1) throw ConfigError("FdtdSolver: cpml_cells must be at least 1");
    if (nr_ <= 2 * cfg_.cpml_cells + 2 || nc_ <= 2 * cfg_.cpml_cells + 2)
        throw ConfigError("FdtdSolver: grid too small for the absorbing layers");
    if (cfg_.n_steps < 1) throw ConfigError("FdtdSolver: n_steps must be positive");
    dt_ = cfg_.effective_dt();
    db_ = static_cast<float>(dt_ / (kMu0 * cfg_.dx));

    build_material_coefficients(padded_model);
    build_pml_profiles(padded_model);

    ez_ = GridF(nr_, nc_);
    hx_ = GridF(nr_ - 1, nc_);
    hy_ = GridF(nr_, nc_ - 1);
    psi_ezx_ = GridF(nr_, nc_);
    psi_ezy_ = GridF(nr_, nc_);
    psi_hyx_ = GridF(nr_, nc_ - 1);
    psi_hxy_ = GridF(nr_ - 1, nc_);
}

void FdtdSolver::build_material_coefficients(const LiningModel& model) {
    ca_ = GridF(nr_, nc_);
    cb_ = GridF(nr_, nc_);
    for (int r = 0; r < nr_; ++r) {
        for (int c = 0; c < nc_; ++c) {
            if (cfg_.pec_mode && model.sigma(r, c) >= cfg_.pec_sigma_threshold) {
                ca_(r, c) = 0.0f;
                cb_(r, c) = 0.0f;
                continue;
            }
            const auto coeffs =
                ez_cell_coefficients(model.eps(r, c), model.sigma(r, c), dt_, cfg_.dx);
            ca_(r, c) = static_cast<float>(coeffs.ca);
            cb_(r, c) = static_cast<float>(coeffs.cb);
        }
    }
}

void FdtdSolver::build_pml_profiles(const LiningModel& model) {
    const int npml = cfg_.cpml_cells;
    const int order = cfg_.cpml_order;
    const double delta = npml;  // thickness in cells; dx folds into sigma_max

    auto side_eps = [&](bool along_rows, int fixed) {
        double sum = 0.0;
        const int n = along_rows ? nc_ : nr_;
        for (int i = 0; i < n; ++i)
            sum += along_rows ? model.eps(fixed, i) : model.eps(i, fixed);
        return sum / n;
    };
    const double eps_top = side_eps(true, 0);
    const double eps_bottom = side_eps(true, nr_ - 1);
    const double eps_left = side_eps(false, 0);
    const double eps_right = side_eps(false, nc_ - 1);

    auto sigma_max = [&](double eps_edge) {
        return cfg_.sigma_factor * (order + 1) / (kEta0 * cfg_.dx * std::sqrt(eps_edge));
    };

    // rho in (0, 1]: 0 at the PML-interior interface, 1 at the outer wall.
    auto fill = [&](std::vector<float>& inv_kappa, std::vector<float>& b,
                    std::vector<float>& c, int n, double stagger, double eps_lo,
                    double eps_hi) {
        inv_kappa.assign(n, 1.0f);
        b.assign(n, 0.0f);
        c.assign(n, 0.0f);
        const double smax_lo = sigma_max(eps_lo);
        const double smax_hi = sigma_max(eps_hi);
        // Positions index Ez nodes (stagger 0) or the H nodes half a cell
        // between them (stagger 0.5); the far interface is measured from the
        // Ez wall at the high end either way.
        const double far_interface = (n - 1 + (stagger > 0.0 ? 1 : 0)) - npml;
        for (int i = 0; i < n; ++i) {
            const double pos = i + stagger;
            double rho = 0.0;
            double smax = 0.0;
            if (pos < npml) {
                rho = (npml - pos) / delta;
                smax = smax_lo;
            } else if (pos > far_interface) {
                rho = (pos - far_interface) / delta;
                smax = smax_hi;
            }
            if (rho <= 0.0) continue;
            const double poly = std::pow(rho, order);
            const double sigma = smax * poly;
            const double kappa = 1.0 + (cfg_.kappa_max - 1.0) * poly;
            const double alpha = cfg_.alpha_max * (1.0 - rho);
            const double bb = std::exp(-(sigma / kappa + alpha) * dt_ / kEps0);
            const double denom = (sigma + kappa * alpha) * kappa;
            const double cc = denom > 0.0 ? sigma * (bb - 1.0) / denom : 0.0;
            inv_kappa[i] = static_cast<float>(1.0 / kappa);
            b[i] = static_cast<float>(bb);
            c[i] = static_cast<float>(cc);
        }
    };

    fill(inv_kappa_ex_, be_x_, ce_x_, nc_, 0.0, eps_left, eps_right);
    fill(inv_kappa_ey_, be_y_, ce_y_, nr_, 0.0, eps_top, eps_bottom);
    fill(inv_kappa_hx_, bh_x_, ch_x_, nc_ - 1, 0.5, eps_left, eps_right);
    fill(inv_kappa_hy_, bh_y_, ch_y_, nr_ - 1, 0.5, eps_top, eps_bottom);
}

void FdtdSolver::reset() {
    ez_.fill(0.0f);
    hx_.fill(0.0f);
    hy_.fill(0.0f);
    psi_ezx_.fill(0.0f);
    psi_ezy_.fill(0.0f);
    psi_hyx_.fill(0.0f);
    psi_hxy_.fill(0.0f);
}

void FdtdSolver::step(int step_index, int src_row, int src_col) {
    // H updates from Ez at step n.
    for (int r = 0; r < nr_ - 1; ++r) {
        const float* ez_r0 = ez_.row(r);
        const float* ez_r1 = ez_.row(r + 1);
        float* hx = hx_.row(r);
        float* psi = psi_hxy_.row(r);
        const float bk = bh_y_[r];
        const float ck = ch_y_[r];
        const float ik = inv_kappa_hy_[r];
        for (int c = 0; c < nc_; ++c) {
            const float diff = ez_r1[c] - ez_r0[c];
            psi[c] = bk * psi[c] + ck * diff;
            hx[c] -= db_ * (diff * ik + psi[c]);
        }
    }
    for (int r = 0; r < nr_; ++r) {
        const float* ez = ez_.row(r);
        float* hy = hy_.row(r);
        float* psi = psi_hyx_.row(r);
        for (int c = 0; c < nc_ - 1; ++c) {
            const float diff = ez[c + 1] - ez[c];
            psi[c] = bh_x_[c] * psi[c] + ch_x_[c] * diff;
            hy[c] += db_ * (diff * inv_kappa_hx_[c] + psi[c]);
        }
    }

    // Ez update; the outermost ring stays zero (electric wall behind the PML).
    for (int r = 1; r < nr_ - 1; ++r) {
        float* ez = ez_.row(r);
        const float* hx0 = hx_.row(r - 1);
        const float* hx1 = hx_.row(r);
        const float* hy = hy_.row(r);
        float* psix = psi_ezx_.row(r);
        float* psiy = psi_ezy_.row(r);
        const float* ca = ca_.row(r);
        const float* cb = cb_.row(r);
        const float bky = be_y_[r];
        const float cky = ce_y_[r];
        const float iky = inv_kappa_ey_[r];
        for (int c = 1; c < nc_ - 1; ++c) {
            const float dhy = hy[c] - hy[c - 1];
            const float dhx = hx1[c] - hx0[c];
            psix[c] = be_x_[c] * psix[c] + ce_x_[c] * dhy;
            psiy[c] = bky * psiy[c] + cky * dhx;
            ez[c] = ca[c] * ez[c] +
                    cb[c] * (dhy * inv_kappa_ex_[c] - dhx * iky + psix[c] - psiy[c]);
        }
    }

    ez_(src_row, src_col) +=
        static_cast<float>(cfg_.amplitude * ricker((step_index + 1) * dt_, cfg_.f0));
}

void FdtdSolver::check_stability(int step_index) const {
    for (int r = 0; r < nr_; ++r) {
        const float* ez = ez_.row(r);
        for (int c = 0; c < nc_; ++c) {
            if (!std::isfinite(ez[c]) || std::abs(ez[c]) > 1e12f)
                throw InstabilityError("FDTD field magnitude exceeded 1e12 at step " +
                                       std::to_string(step_index));
        }
    }
}

std::vector<float> FdtdSolver::run_ascan(int src_col) {
    if (src_col < 1 || src_col > nc_ - 2 || cfg_.src_row < 1 || cfg_.src_row > nr_ - 2)
        throw ConfigError("run_ascan: source position outside the grid interior");
    reset();
    std::vector<float> trace(cfg_.n_steps);
    for (int n = 0; n < cfg_.n_steps; ++n) {
        step(n, cfg_.src_row, src_col);
        trace[n] = ez_(cfg_.src_row, src_col);
        if (n % 50 == 49 || n == cfg_.n_steps - 1) check_stability(n);
    }
    return trace;
}

Bscan FdtdSolver::run_bscan() {
    const auto cols = cfg_.trace_cols();
    if (cols.back() > nc_ - 2)
        throw ConfigError("run_bscan: trace columns run past the grid");
    Bscan scan;
    scan.dt = dt_;
    scan.trace_spacing = cfg_.trace_step_cells * cfg_.dx;
    scan.f0 = cfg_.f0;
    scan.src_cols = cols;
    scan.data = GridF(cfg_.n_steps, static_cast<int>(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k) {
        try {
            const auto trace = run_ascan(cols[k]);
            for (int n = 0; n < cfg_.n_steps; ++n)
                scan.data(n, static_cast<int>(k)) = trace[n];
        } catch (const InstabilityError& e) {
            throw InstabilityError("trace " + std::to_string(k) + ": " + e.what());
        }
    }
    return scan;
}

Bscan simulate_bscan(const LiningModel& interior_model, const SimConfig& config) {
    const LiningModel padded = pad_for_cpml(interior_model, config.cpml_cells);
    FdtdSolver solver(padded, config);
    return solver.run_bscan();
}

}  // namespace gprseg
