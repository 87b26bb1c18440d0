#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dcda/data.hpp"
#include "dcda/kv.hpp"
#include "dcda/matrix.hpp"

namespace dcda {

struct DcdaModel;

// Attack is the positive class.
struct ConfusionCounts {
    std::size_t tp = 0;  // attack predicted attack
    std::size_t tn = 0;  // bona-fide predicted bona-fide
    std::size_t fp = 0;  // bona-fide predicted attack
    std::size_t fn = 0;  // attack predicted bona-fide
};

struct MetricsReport {
    double apcer = 0.0;  // attacks accepted as bona-fide / attacks
    double bpcer = 0.0;  // bona-fide rejected as attack / bona-fide
    double acer = 0.0;   // (apcer + bpcer) / 2
    // Half total error rate at the same fixed threshold. Without a separate
    // threshold protocol it coincides with acer.
    double hter = 0.0;
    double accuracy = 0.0;
    double threshold = 0.5;
    ConfusionCounts counts;
    bool no_attacks = false;    // apcer defined as 0
    bool no_bona_fide = false;  // bpcer defined as 0
};

// 1 (attack) iff the attack probability (column 1) is >= threshold.
std::vector<int> classify_at_threshold(const Matrix& probs, double threshold);

MetricsReport compute_metrics(std::span<const int> predictions, std::span<const int> labels, double threshold);

std::string format_metrics(const MetricsReport& m);
KeyValueDoc metrics_document(const MetricsReport& m);

struct PcaResult {
    std::vector<double> mean;
    Matrix components;  // n_components x h, unit rows
    std::vector<double> explained_variance;
    Matrix projection;  // N x n_components
};

// Exact eigen-decomposition of the sample covariance. Each component is
// signed so that its largest-magnitude entry is positive.
PcaResult pca(const Matrix& points, std::size_t n_components = 2);

struct ExportedFiles {
    std::filesystem::path embeddings;
    std::filesystem::path projection;
    std::size_t rows = 0;
};

// Writes f0..f{h-1},domain,label,split for every row of every dataset, and a
// companion <stem>_pca.csv with the 2-D projection. Datasets without labels
// get nearest-centroid pseudo-labels.
ExportedFiles export_embeddings(const DcdaModel& model, std::span<const Dataset> datasets,
                                const std::filesystem::path& path);

}  // namespace dcda
