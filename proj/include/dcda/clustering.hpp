#pragma once

#include <span>
#include <vector>

#include "dcda/matrix.hpp"

namespace dcda {

// Index of the nearest row of `centers` under squared Euclidean distance;
// ties go to the lowest index (class 0, bona-fide).
std::size_t nearest_center(std::span<const double> point, const Matrix& centers);

// Row c = mean of the embeddings labelled c. Both classes must be present.
Matrix source_class_centers(const Matrix& embeddings, std::span<const int> labels);

struct KMeansOptions {
    std::size_t max_iters = 100;
    double tol = 1e-6;
};

struct KMeansResult {
    std::vector<int> labels;
    Matrix centers;
    double inertia = 0.0;
    std::size_t iterations = 0;
    // Inertia after every assignment step, starting with the initial centers.
    std::vector<double> inertia_trace;
};

// Lloyd's algorithm from the given centers. A cluster that empties is
// reseeded at the point farthest from its assigned center.
KMeansResult kmeans(const Matrix& points, const Matrix& init_centers, const KMeansOptions& opts = {});

struct ClusterState {
    Matrix centroids;               // K x h, rows [bona-fide, attack]
    std::vector<int> pseudo_labels;  // one per target training row
    std::size_t last_update_epoch = 0;
};

// Source class means seed k-means over the target embeddings; the k-means
// labels become the pseudo-labels and each centroid is the average of the
// source class mean and the matching target cluster center.
ClusterState init_cluster_state(const Matrix& source_embeddings, std::span<const int> source_labels,
                                const Matrix& target_embeddings, const KMeansOptions& opts = {});

std::vector<int> update_pseudo_labels(const Matrix& target_embeddings, const Matrix& centroids);

}  // namespace dcda
