#include "dcda/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dcda/text.hpp"

namespace dcda {

std::string_view to_string(Domain d) { return d == Domain::source ? "source" : "target"; }
std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

void Dataset::validate() const {
    if (!labels) return;
    if (labels->size() != features.rows()) {
        throw std::invalid_argument("dataset '" + name + "': " + std::to_string(labels->size()) + " labels for " +
                                    std::to_string(features.rows()) + " rows");
    }
    for (std::size_t i = 0; i < labels->size(); ++i) {
        if ((*labels)[i] != 0 && (*labels)[i] != 1) {
            throw std::invalid_argument("dataset '" + name + "': label " + std::to_string((*labels)[i]) +
                                        " at row " + std::to_string(i));
        }
    }
}

Dataset gen_moons(std::size_t n_per_class, double noise_std, std::uint64_t seed) {
    if (n_per_class == 0) throw std::invalid_argument("gen_moons: n_per_class must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset ds;
    ds.name = "moons";
    ds.features = Matrix(2 * n_per_class, 2);
    ds.labels = std::vector<int>(2 * n_per_class);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const int cls = i < n_per_class ? 0 : 1;
        const double t = angle(rng);
        double x = cls == 0 ? std::cos(t) : 1.0 - std::cos(t);
        double y = cls == 0 ? std::sin(t) : 0.5 - std::sin(t);
        if (noise_std > 0.0) {
            x += noise_std * noise(rng);
            y += noise_std * noise(rng);
        }
        ds.features(i, 0) = x;
        ds.features(i, 1) = y;
        (*ds.labels)[i] = cls;
    }
    return ds;
}

Dataset gen_blobs(std::size_t n_per_class, const Matrix& centers, double std, std::uint64_t seed) {
    if (centers.rows() != 2) throw std::invalid_argument("gen_blobs: exactly two centers are required");
    if (std < 0.0) throw std::invalid_argument("gen_blobs: std must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset ds;
    ds.name = "blobs";
    ds.features = Matrix(2 * n_per_class, centers.cols());
    ds.labels = std::vector<int>(2 * n_per_class);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const std::size_t cls = i < n_per_class ? 0 : 1;
        for (std::size_t t = 0; t < centers.cols(); ++t) {
            ds.features(i, t) = centers(cls, t) + (std > 0.0 ? std * noise(rng) : 0.0);
        }
        (*ds.labels)[i] = static_cast<int>(cls);
    }
    return ds;
}

Dataset apply_shift(const Dataset& dataset, const ShiftSpec& spec, std::uint64_t seed) {
    if (!(spec.scale > 0.0)) throw std::invalid_argument("apply_shift: scale must be > 0");
    if (spec.noise_std < 0.0) throw std::invalid_argument("apply_shift: noise_std must be >= 0");
    const std::size_t d = dataset.dim();
    if (!spec.translation.empty() && spec.translation.size() != d) {
        throw std::invalid_argument("apply_shift: translation has " + std::to_string(spec.translation.size()) +
                                    " entries for " + std::to_string(d) + " features");
    }
    if (spec.rotation != 0.0 && d < 2) throw std::invalid_argument("apply_shift: rotation needs >= 2 features");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double c = std::cos(spec.rotation);
    const double s = std::sin(spec.rotation);
    Dataset out = dataset;
    out.domain = Domain::target;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto row = out.features.row(i);
        if (spec.rotation != 0.0) {
            const double x = row[0];
            const double y = row[1];
            row[0] = c * x - s * y;
            row[1] = s * x + c * y;
        }
        for (std::size_t t = 0; t < d; ++t) {
            double v = spec.scale * row[t];
            if (!spec.translation.empty()) v += spec.translation[t];
            if (spec.noise_std > 0.0) v += spec.noise_std * noise(rng);
            row[t] = v;
        }
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: " + path.string() + " is empty");
    const auto header = text::split(text::trim(line), ',');
    std::optional<std::size_t> label_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto name = text::trim(header[c]);
        if (name.empty()) {
            throw std::runtime_error("load_csv: " + path.string() + ": empty column name at column " +
                                     std::to_string(c + 1));
        }
        if (name == "label") label_col = c;
    }
    const std::size_t feature_cols = header.size() - (label_col ? 1 : 0);
    if (feature_cols == 0) throw std::runtime_error("load_csv: " + path.string() + " has no feature columns");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t row = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        ++row;
        const auto cells = text::split(text::trim(line), ',');
        const std::string where = path.string() + ": row " + std::to_string(row) + " (line " +
                                  std::to_string(line_no) + ")";
        if (cells.size() != header.size()) {
            throw std::runtime_error("load_csv: " + where + " has " + std::to_string(cells.size()) +
                                     " cells, header has " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (label_col && c == *label_col) {
                const auto v = text::parse_int(cells[c]);
                if (!v || (*v != 0 && *v != 1)) {
                    throw std::runtime_error("load_csv: " + where + ", column " + std::to_string(c + 1) +
                                             ": label '" + std::string(cells[c]) + "' is not 0 or 1");
                }
                labels.push_back(static_cast<int>(*v));
                continue;
            }
            const auto v = text::parse_double(cells[c]);
            if (!v || !std::isfinite(*v)) {
                throw std::runtime_error("load_csv: " + where + ", column " + std::to_string(c + 1) + ": '" +
                                         std::string(cells[c]) + "' is not a finite number");
            }
            values.push_back(*v);
        }
    }
    Dataset ds;
    ds.name = path.stem().string();
    ds.features = Matrix(row, feature_cols, std::move(values));
    if (label_col) ds.labels = std::move(labels);
    return ds;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open " + path.string() + " for writing");
    for (std::size_t c = 0; c < dataset.dim(); ++c) out << (c ? "," : "") << 'f' << c;
    if (dataset.has_labels()) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (std::size_t c = 0; c < dataset.dim(); ++c) {
            out << (c ? "," : "") << text::format_double(dataset.features(r, c));
        }
        if (dataset.has_labels()) out << ',' << (*dataset.labels)[r];
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_csv: failed writing " + path.string());
}

Benchmark make_moons_benchmark(std::uint64_t seed, const BenchmarkConfig& cfg) {
    const ShiftSpec shift{cfg.rotation_deg * std::numbers::pi / 180.0, cfg.translation, cfg.scale,
                          cfg.shift_noise_std};
    Benchmark b;
    b.source_train = gen_moons(cfg.n_per_class, cfg.noise_std, seed);
    b.source_train.name = "source_train";
    b.target_train = apply_shift(gen_moons(cfg.n_per_class, cfg.noise_std, seed + 1), shift, seed + 1);
    b.target_train.name = "target_train";
    b.target_test = apply_shift(gen_moons(cfg.n_per_class, cfg.noise_std, seed + 2), shift, seed + 2);
    b.target_test.name = "target_test";
    b.target_test.split = Split::test;
    return b;
}

}  // namespace dcda
