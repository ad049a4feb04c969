#include "gprseg/model_gen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gprseg {

namespace {

constexpr uint64_t kRasterStream = 0x72617374ULL;

const MaterialSpec& props_for(ClassId id) { return material(id); }

void paint(LiningModel& m, int r, int c, ClassId id, double eps, double sigma) {
    m.labels(r, c) = static_cast<uint8_t>(id);
    m.eps(r, c) = static_cast<float>(eps);
    m.sigma(r, c) = static_cast<float>(sigma);
}

}  // namespace

const std::vector<std::vector<DefectKind>>& defect_combos() {
    static const std::vector<std::vector<DefectKind>> combos = {
        {DefectKind::kCrack},
        {DefectKind::kVoid},
        {DefectKind::kSeparation},
        {DefectKind::kCrack, DefectKind::kVoid},
        {DefectKind::kCrack, DefectKind::kSeparation},
        {DefectKind::kVoid, DefectKind::kSeparation},
    };
    return combos;
}

std::string defect_combo_name(const std::vector<DefectKind>& combo) {
    if (combo.empty()) return "none";
    std::ostringstream out;
    for (size_t i = 0; i < combo.size(); ++i) {
        if (i) out << '+';
        switch (combo[i]) {
            case DefectKind::kCrack: out << "crack"; break;
            case DefectKind::kVoid: out << "void"; break;
            case DefectKind::kSeparation: out << "separation"; break;
        }
    }
    return out.str();
}

bool ScenarioDescriptor::has_defect(DefectKind k) const {
    return std::find(defect_set.begin(), defect_set.end(), k) != defect_set.end();
}

void GenerationConfig::validate() const {
    auto fail = [](const std::string& what) {
        throw ConfigError("infeasible-geometry: " + what);
    };
    if (interior_rows <= 0 || interior_cols <= 0 || cell_size <= 0)
        fail("interior dimensions and cell size must be positive");
    if (category_weights.size() != kNumCategories)
        throw ConfigError("category_weights must have 5 entries");
    if (defect_combo_weights.size() != defect_combos().size())
        throw ConfigError("defect_combo_weights must have 6 entries");
    for (double w : category_weights)
        if (w < 0) throw ConfigError("category_weights must be non-negative");
    for (double w : defect_combo_weights)
        if (w < 0) throw ConfigError("defect_combo_weights must be non-negative");
    if (rock_prob < 0 || rock_prob > 1 || no_defect_rebar_prob < 0 || no_defect_rebar_prob > 1)
        throw ConfigError("probabilities must lie in [0, 1]");

    const double w = width();
    const double d = depth();
    if (rock_depth_lo > rock_depth_hi || rock_depth_lo < 0.1 || rock_depth_hi > d - 0.03)
        fail("rock depth range must fit inside the lining");
    if (crack_len_lo > crack_len_hi || crack_len_lo <= 0)
        fail("crack length range is empty");
    if (crack_len_hi / 2 + 0.04 > w / 2)
        fail("longest crack cannot fit laterally");
    if (crack_len_lo > rock_depth_lo - 0.16)
        fail("shortest crack cannot fit above the rock interface");
    if (crack_thickness_lo < 1 || crack_thickness_lo > crack_thickness_hi)
        fail("crack thickness range is empty");
    if (crack_dip_deg < 0 || crack_dip_deg > 89)
        fail("crack dip bound must lie in [0, 89] degrees");
    if (void_semi_lo > void_semi_hi || void_semi_lo <= 0)
        fail("void semi-axis range is empty");
    if (void_semi_hi > (rock_depth_lo - 0.04) / 2 || void_semi_hi + 0.04 > w / 2)
        fail("largest void cannot fit inside the lining");
    if (sep_thickness_lo > sep_thickness_hi || sep_thickness_lo <= 0 || sep_thickness_hi > 0.05)
        fail("separation thickness must lie in (0, 0.05] m");
    if (sep_half_len_lo > sep_half_len_hi || sep_half_len_hi + 0.02 > w / 2)
        fail("separation lens cannot fit laterally");
    if (rebar_spacing_lo > rebar_spacing_hi || rebar_spacing_lo < 4 * cell_size)
        fail("rebar spacing range is empty or too tight");
    if (rebar_depth_lo > rebar_depth_hi || rebar_depth_lo < 0.02 || rebar_depth_hi > 0.3)
        fail("rebar depth range must lie in [0.02, 0.3] m");
    if (rebar_radius_cells < 1) fail("rebar radius must be at least one cell");
}

ScenarioDescriptor sample_scenario(const GenerationConfig& config, uint64_t seed) {
    config.validate();
    Rng rng(mix_seed(seed, 0x7363656eULL));

    ScenarioDescriptor desc;
    desc.seed = seed;
    desc.category = static_cast<Category>(rng.weighted(config.category_weights));

    switch (desc.category) {
        case Category::kNoDefect:
            desc.water = false;
            desc.has_rebar_row = rng.bernoulli(config.no_defect_rebar_prob);
            break;
        case Category::kDryNoRebar:
            desc.water = false;
            desc.has_rebar_row = false;
            break;
        case Category::kWetNoRebar:
            desc.water = true;
            desc.has_rebar_row = false;
            break;
        case Category::kDryRebar:
            desc.water = false;
            desc.has_rebar_row = true;
            break;
        case Category::kWetRebar:
            desc.water = true;
            desc.has_rebar_row = true;
            break;
    }
    if (desc.category != Category::kNoDefect)
        desc.defect_set = defect_combos()[rng.weighted(config.defect_combo_weights)];

    // A separation lens lives on the lining-rock interface, so it forces the
    // rock layer on.
    desc.has_rock_layer =
        desc.has_defect(DefectKind::kSeparation) || rng.bernoulli(config.rock_prob);
    if (desc.has_rock_layer)
        desc.rock_depth = rng.uniform(config.rock_depth_lo, config.rock_depth_hi);

    if (desc.has_rebar_row) {
        RebarGeom rb;
        rb.spacing = rng.uniform(config.rebar_spacing_lo, config.rebar_spacing_hi);
        rb.depth = rng.uniform(config.rebar_depth_lo, config.rebar_depth_hi);
        rb.phase_x = rng.uniform(0.0, rb.spacing);
        rb.radius_cells = config.rebar_radius_cells;
        desc.rebar = rb;
    }

    const double w = config.width();
    const double lining_bottom =
        desc.has_rock_layer ? desc.rock_depth : config.depth() - 0.02;

    if (desc.has_defect(DefectKind::kCrack)) {
        CrackGeom ck{};
        bool placed = false;
        for (int attempt = 0; attempt < 32 && !placed; ++attempt) {
            ck.length = rng.uniform(config.crack_len_lo, config.crack_len_hi);
            ck.dip_deg = rng.uniform(-config.crack_dip_deg, config.crack_dip_deg);
            ck.thickness_cells =
                rng.uniform_int(config.crack_thickness_lo, config.crack_thickness_hi);
            const double rad = ck.dip_deg * kPi / 180.0;
            const double t = ck.thickness_cells * config.cell_size;
            const double hx = ck.length / 2 * std::abs(std::cos(rad)) + t / 2;
            const double hd = ck.length / 2 * std::abs(std::sin(rad)) + t / 2;
            const double d_lo = std::max(0.12, hd + 0.02);
            const double d_hi = lining_bottom - hd - 0.02;
            if (d_hi <= d_lo) continue;
            ck.center_x = rng.uniform(hx + 0.02, w - hx - 0.02);
            ck.center_d = rng.uniform(d_lo, d_hi);
            placed = true;
        }
        if (!placed) {
            // A steep draw can refuse to fit a shallow rock layer; a short
            // horizontal crack always does.
            ck.length = config.crack_len_lo;
            ck.dip_deg = 0.0;
            ck.thickness_cells = config.crack_thickness_lo;
            const double hx = ck.length / 2 + config.cell_size;
            ck.center_x = rng.uniform(hx + 0.02, w - hx - 0.02);
            ck.center_d = rng.uniform(0.12, lining_bottom - 0.04);
        }
        desc.crack = ck;
    }

    if (desc.has_defect(DefectKind::kVoid)) {
        VoidGeom vd{};
        vd.semi_x = rng.uniform(config.void_semi_lo, config.void_semi_hi);
        vd.semi_d = rng.uniform(config.void_semi_lo, config.void_semi_hi);
        vd.center_x = rng.uniform(vd.semi_x + 0.02, w - vd.semi_x - 0.02);
        vd.center_d =
            rng.uniform(std::max(0.12, vd.semi_d + 0.02), lining_bottom - vd.semi_d - 0.02);
        desc.void_ = vd;
    }

    if (desc.has_defect(DefectKind::kSeparation)) {
        SeparationGeom sp{};
        sp.thickness = rng.uniform(config.sep_thickness_lo, config.sep_thickness_hi);
        sp.half_len = rng.uniform(config.sep_half_len_lo, config.sep_half_len_hi);
        sp.center_x = rng.uniform(sp.half_len + 0.02, w - sp.half_len - 0.02);
        desc.separation = sp;
    }

    return desc;
}

LiningModel rasterize(const GenerationConfig& config, const ScenarioDescriptor& descriptor) {
    config.validate();
    const int rows = config.interior_rows;
    const int cols = config.interior_cols;
    const double cell = config.cell_size;

    Rng rng(mix_seed(descriptor.seed, kRasterStream));
    const auto& concrete = props_for(ClassId::kConcrete);
    const auto& rock = props_for(ClassId::kRock);
    const double concrete_eps = rng.uniform(concrete.eps_lo, concrete.eps_hi);
    const double rock_eps = rng.uniform(rock.eps_lo, rock.eps_hi);

    LiningModel m;
    m.cell_size = cell;
    m.descriptor = descriptor;
    m.eps = GridF(rows, cols, static_cast<float>(concrete_eps));
    m.sigma = GridF(rows, cols, static_cast<float>(concrete.sigma));
    m.labels = GridU8(rows, cols, static_cast<uint8_t>(ClassId::kConcrete));

    auto center_d = [cell](int r) { return (r + 0.5) * cell; };
    auto center_x = [cell](int c) { return (c + 0.5) * cell; };

    if (descriptor.has_rock_layer) {
        for (int r = 0; r < rows; ++r) {
            if (center_d(r) < descriptor.rock_depth) continue;
            for (int c = 0; c < cols; ++c)
                paint(m, r, c, ClassId::kRock, rock_eps, rock.sigma);
        }
    }

    const ClassId sep_id = descriptor.water ? ClassId::kWetSeparation : ClassId::kSeparation;
    const ClassId void_id = descriptor.water ? ClassId::kWetVoid : ClassId::kVoid;
    const ClassId crack_id = descriptor.water ? ClassId::kWetCrack : ClassId::kCrack;

    if (descriptor.separation) {
        const auto& sp = *descriptor.separation;
        const auto& fill = props_for(sep_id);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double dx = std::abs(center_x(c) - sp.center_x);
                if (dx > sp.half_len) continue;
                const double frac = dx / sp.half_len;
                const double half_th = sp.thickness / 2 * (1.0 - frac * frac);
                if (std::abs(center_d(r) - descriptor.rock_depth) <= half_th)
                    paint(m, r, c, sep_id, fill.eps_lo, fill.sigma);
            }
        }
    }

    if (descriptor.void_) {
        const auto& vd = *descriptor.void_;
        const auto& fill = props_for(void_id);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double u = (center_x(c) - vd.center_x) / vd.semi_x;
                const double v = (center_d(r) - vd.center_d) / vd.semi_d;
                if (u * u + v * v <= 1.0)
                    paint(m, r, c, void_id, fill.eps_lo, fill.sigma);
            }
        }
    }

    if (descriptor.crack) {
        const auto& ck = *descriptor.crack;
        const auto& fill = props_for(crack_id);
        const double rad = ck.dip_deg * kPi / 180.0;
        const double ca = std::cos(rad);
        const double sa = std::sin(rad);
        const double half_len = ck.length / 2;
        const double half_th = ck.thickness_cells * cell / 2;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const double px = center_x(c) - ck.center_x;
                const double pd = center_d(r) - ck.center_d;
                const double along = px * ca + pd * sa;
                const double across = -px * sa + pd * ca;
                if (std::abs(along) <= half_len && std::abs(across) <= half_th)
                    paint(m, r, c, crack_id, fill.eps_lo, fill.sigma);
            }
        }
    }

    if (descriptor.rebar) {
        const auto& rb = *descriptor.rebar;
        const auto& fill = props_for(ClassId::kRebar);
        const double radius = rb.radius_cells * cell;
        for (double bx = rb.phase_x; bx < config.width() - cell; bx += rb.spacing) {
            const int c_lo = std::max(0, static_cast<int>((bx - radius) / cell) - 1);
            const int c_hi = std::min(cols - 1, static_cast<int>((bx + radius) / cell) + 1);
            const int r_lo =
                std::max(0, static_cast<int>((rb.depth - radius) / cell) - 1);
            const int r_hi =
                std::min(rows - 1, static_cast<int>((rb.depth + radius) / cell) + 1);
            for (int r = r_lo; r <= r_hi; ++r) {
                for (int c = c_lo; c <= c_hi; ++c) {
                    const double dx = center_x(c) - bx;
                    const double dd = center_d(r) - rb.depth;
                    if (dx * dx + dd * dd <= radius * radius)
                        paint(m, r, c, ClassId::kRebar, fill.eps_lo, fill.sigma);
                }
            }
        }
    }

    return m;
}

LiningModel pad_for_cpml(const LiningModel& model, int n_cells) {
    if (n_cells < 0) throw ConfigError("pad_for_cpml: n_cells must be non-negative");
    const int rows = model.rows();
    const int cols = model.cols();
    LiningModel out;
    out.cell_size = model.cell_size;
    out.descriptor = model.descriptor;
    out.pad_cells = model.pad_cells + n_cells;
    out.eps = GridF(rows + 2 * n_cells, cols + 2 * n_cells);
    out.sigma = GridF(rows + 2 * n_cells, cols + 2 * n_cells);
    out.labels = GridU8(rows + 2 * n_cells, cols + 2 * n_cells);
    for (int r = 0; r < out.rows(); ++r) {
        const int sr = std::clamp(r - n_cells, 0, rows - 1);
        for (int c = 0; c < out.cols(); ++c) {
            const int sc = std::clamp(c - n_cells, 0, cols - 1);
            out.eps(r, c) = model.eps(sr, sc);
            out.sigma(r, c) = model.sigma(sr, sc);
            out.labels(r, c) = model.labels(sr, sc);
        }
    }
    return out;
}

}  // namespace gprseg
