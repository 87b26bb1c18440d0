#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcda/matrix.hpp"

namespace dcda {

enum class Domain { source, target };
enum class Split { train, test };

std::string_view to_string(Domain d);
std::string_view to_string(Split s);

struct Dataset {
    Matrix features;                        // N x d
    std::optional<std::vector<int>> labels;  // 0 bona-fide, 1 attack
    Domain domain = Domain::source;
    Split split = Split::train;
    std::string name;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    bool has_labels() const { return labels.has_value(); }

    // Throws unless labels (when present) have one 0/1 entry per row.
    void validate() const;
};

// Two interleaving half circles. Class 0 is the upper unit half circle
// (cos t, sin t); class 1 the lower one (1 - cos t, 0.5 - sin t), t ~ U[0, pi].
Dataset gen_moons(std::size_t n_per_class, double noise_std, std::uint64_t seed);

// Isotropic Gaussian blob per class around centers.row(c).
Dataset gen_blobs(std::size_t n_per_class, const Matrix& centers, double std, std::uint64_t seed);

struct ShiftSpec {
    double rotation = 0.0;            // radians, acts on the first two coordinates
    std::vector<double> translation;  // empty or one entry per feature
    double scale = 1.0;
    double noise_std = 0.0;
};

// x <- scale * R(rotation) * x + translation + N(0, noise_std^2); labels kept,
// domain becomes target.
Dataset apply_shift(const Dataset& dataset, const ShiftSpec& spec, std::uint64_t seed);

// Header f0,...,f{d-1}[,label]. Any header names are accepted for feature
// columns; a column called "label" holds class labels.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

struct BenchmarkConfig {
    std::size_t n_per_class = 300;
    double noise_std = 0.08;
    double rotation_deg = 35.0;
    std::vector<double> translation{0.3, -0.1};
    double scale = 1.0;
    double shift_noise_std = 0.02;
};

struct Benchmark {
    Dataset source_train;
    Dataset target_train;
    Dataset target_test;
};

// Labelled source moons (seed), shifted target moons (seed + 1) and a
// separately drawn shifted target test split (seed + 2).
Benchmark make_moons_benchmark(std::uint64_t seed, const BenchmarkConfig& cfg = {});

}  // namespace dcda
