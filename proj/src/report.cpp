#include "gprseg/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gprseg/material.hpp"

namespace gprseg {

namespace fs = std::filesystem;

const std::array<std::array<uint8_t, 3>, kNumClasses>& class_palette() {
    static const std::array<std::array<uint8_t, 3>, kNumClasses> palette = {{
        {200, 200, 200},  // 0 concrete
        {139, 90, 43},    // 1 rock
        {40, 40, 40},     // 2 rebar
        {220, 20, 60},    // 3 crack
        {255, 140, 0},    // 4 wet crack
        {30, 144, 255},   // 5 void
        {0, 206, 209},    // 6 wet void
        {50, 205, 50},    // 7 separation
        {148, 0, 211},    // 8 wet separation
    }};
    return palette;
}

namespace {

void write_ppm(const std::string& path, int rows, int cols,
               const std::vector<uint8_t>& rgb) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("heatmap: cannot write " + path);
    out << "P6\n" << cols << " " << rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()),
              static_cast<std::streamsize>(rgb.size()));
    if (!out) throw IoError("heatmap: short write to " + path);
}

std::string palette_comment() {
    std::ostringstream out;
    out << "# palette:";
    for (int c = 0; c < kNumClasses; ++c) {
        const auto& p = class_palette()[static_cast<size_t>(c)];
        out << " " << c << "=" << material(static_cast<uint8_t>(c)).name << "("
            << int(p[0]) << "," << int(p[1]) << "," << int(p[2]) << ")";
    }
    return out.str();
}

std::string group_name(const CategoryRow& row) {
    std::string s = row.combo;
    s += row.water ? "|wet" : "|dry";
    s += row.rebar ? "|rebar" : "|no-rebar";
    return s;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

}  // namespace

void write_heatmap_ppm(const std::string& path, const GridU8& ids) {
    std::vector<uint8_t> rgb(ids.size() * 3);
    for (size_t i = 0; i < ids.size(); ++i) {
        const uint8_t c = ids.data()[i];
        if (c >= kNumClasses) throw ConfigError("heatmap: class id out of range");
        const auto& p = class_palette()[c];
        rgb[3 * i] = p[0];
        rgb[3 * i + 1] = p[1];
        rgb[3 * i + 2] = p[2];
    }
    write_ppm(path, ids.rows(), ids.cols(), rgb);
}

void write_overlay_ppm(const std::string& path, const GridF& scan,
                       const GridU8& ids, double alpha) {
    if (scan.rows() != ids.rows() || scan.cols() != ids.cols())
        throw ConfigError("overlay: scan and id map shapes differ");
    double lo = scan.data()[0], hi = scan.data()[0];
    for (size_t i = 0; i < scan.size(); ++i) {
        lo = std::min(lo, static_cast<double>(scan.data()[i]));
        hi = std::max(hi, static_cast<double>(scan.data()[i]));
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<uint8_t> rgb(ids.size() * 3);
    for (size_t i = 0; i < ids.size(); ++i) {
        const double gray =
            255.0 * (static_cast<double>(scan.data()[i]) - lo) / span;
        const uint8_t c = ids.data()[i];
        if (c >= kNumClasses) throw ConfigError("overlay: class id out of range");
        for (int k = 0; k < 3; ++k) {
            double v = gray;
            if (c != 0) {
                const auto& p = class_palette()[c];
                v = alpha * p[k] + (1.0 - alpha) * gray;
            }
            rgb[3 * i + static_cast<size_t>(k)] =
                static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    write_ppm(path, ids.rows(), ids.cols(), rgb);
}

GridU8 output_truth_map(const GridU8& interior_labels, int pad) {
    GridU8 out(interior_labels.rows() + 2 * pad, interior_labels.cols() + 2 * pad);
    out.fill(0);
    for (int r = 0; r < interior_labels.rows(); ++r)
        for (int c = 0; c < interior_labels.cols(); ++c)
            out(r + pad, c + pad) = interior_labels(r, c);
    return out;
}

EvalReport evaluate_split_report(Network& net, const std::string& method,
                                 const std::string& split,
                                 const std::vector<LoadedSample>& samples,
                                 int pad) {
    if (samples.empty()) throw ConfigError("eval: split '" + split + "' is empty");
    EvalReport rep;
    rep.method = method;
    rep.split = split;
    rep.n_samples = static_cast<int>(samples.size());

    std::map<std::string, size_t> group_of;
    for (const auto& s : samples) {
        const GridU8 truth = output_truth_map(s.labels, pad);
        const GridU8 pred = predict_output_map(net, s.scan);
        if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
            throw ConfigError("eval: output map extents do not match the labels");
        const int row_hi = pad + s.labels.rows();
        const int col_hi = pad + s.labels.cols();
        accumulate_confusion(rep.overall, pred, truth, pad, row_hi, pad, col_hi);

        CategoryRow key;
        key.combo = s.record.combo.empty() ? "none" : s.record.combo;
        key.water = s.record.water;
        key.rebar = s.record.rebar;
        const std::string name = group_name(key);
        auto it = group_of.find(name);
        if (it == group_of.end()) {
            group_of.emplace(name, rep.categories.size());
            rep.categories.push_back(key);
            it = group_of.find(name);
        }
        CategoryRow& row = rep.categories[it->second];
        row.n_samples += 1;
        accumulate_confusion(row.cm, pred, truth, pad, row_hi, pad, col_hi);
    }
    std::sort(rep.categories.begin(), rep.categories.end(),
              [](const CategoryRow& a, const CategoryRow& b) {
                  return group_name(a) < group_name(b);
              });
    return rep;
}

void write_report(const std::string& dir, const EvalReport& report) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("report: cannot create " + dir);
    const Metrics m = compute_metrics(report.overall);

    {
        std::ofstream out(fs::path(dir) / "report_summary.csv");
        if (!out) throw IoError("report: cannot write report_summary.csv");
        out << "# split=" << report.split << " samples=" << report.n_samples
            << "\n";
        out << palette_comment() << "\n";
        out << "metric," << report.method << "\n";
        out << "MPA," << fmt(m.mpa) << "\n";
        out << "MIoU," << fmt(m.miou) << "\n";
        out << "FWIoU," << fmt(m.fwiou) << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "report_classes.csv");
        if (!out) throw IoError("report: cannot write report_classes.csv");
        out << palette_comment() << "\n";
        out << "class_id,class_name,pixel_accuracy,iou,precision,recall,"
               "f_measure\n";
        for (int c = 0; c < kNumClasses; ++c) {
            const auto i = static_cast<size_t>(c);
            out << c << "," << material(static_cast<uint8_t>(c)).name << ","
                << fmt(m.pa[i]) << "," << fmt(m.iou[i]) << ","
                << fmt(m.precision[i]) << "," << fmt(m.recall[i]) << ","
                << fmt(m.f_measure[i]) << "\n";
        }
    }
    {
        std::ofstream out(fs::path(dir) / "report_categories.csv");
        if (!out) throw IoError("report: cannot write report_categories.csv");
        out << "combo,water,rebar,n_samples,mpa,miou,fwiou\n";
        for (const auto& row : report.categories) {
            const Metrics cm = compute_metrics(row.cm);
            out << row.combo << "," << (row.water ? "wet" : "dry") << ","
                << (row.rebar ? "rebar" : "no-rebar") << "," << row.n_samples
                << "," << fmt(cm.mpa) << "," << fmt(cm.miou) << ","
                << fmt(cm.fwiou) << "\n";
        }
    }
    {
        std::ofstream out(fs::path(dir) / "report_confusion.csv");
        if (!out) throw IoError("report: cannot write report_confusion.csv");
        out << "group,truth_id,pred_id,count\n";
        auto dump = [&out](const std::string& name, const ConfusionMatrix& cm) {
            for (int t = 0; t < kNumClasses; ++t)
                for (int p = 0; p < kNumClasses; ++p)
                    out << name << "," << t << "," << p << "," << cm.at(t, p)
                        << "\n";
        };
        dump("overall", report.overall);
        for (const auto& row : report.categories) dump(group_name(row), row.cm);
    }
}

std::vector<std::pair<std::string, ConfusionMatrix>> read_confusion_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("report: cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != "group,truth_id,pred_id,count")
        throw IoError("report: unexpected header in " + path);
    std::vector<std::pair<std::string, ConfusionMatrix>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string group, t, p, n;
        if (!std::getline(row, group, ',') || !std::getline(row, t, ',') ||
            !std::getline(row, p, ',') || !std::getline(row, n, ','))
            throw IoError("report: malformed row in " + path);
        if (out.empty() || out.back().first != group)
            out.emplace_back(group, ConfusionMatrix{});
        out.back().second.at(std::stoi(t), std::stoi(p)) += std::stoull(n);
    }
    return out;
}

void write_split_heatmaps(const std::string& dir, Network& net,
                          const std::vector<LoadedSample>& samples,
                          int max_count, int pad) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("report: cannot create " + dir);
    const int n = std::min<int>(max_count, static_cast<int>(samples.size()));
    for (int i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<size_t>(i)];
        char stem[32];
        std::snprintf(stem, sizeof(stem), "s%06d", s.record.index);
        write_heatmap_ppm((fs::path(dir) / (std::string(stem) + "_pred.ppm")).string(),
                          predict_output_map(net, s.scan));
        write_heatmap_ppm(
            (fs::path(dir) / (std::string(stem) + "_truth.ppm")).string(),
            output_truth_map(s.labels, pad));
    }
}

}  // namespace gprseg
