#include "dcda/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dcda {

std::size_t nearest_center(std::span<const double> point, const Matrix& centers) {
    std::size_t best = 0;
    double best_d = squared_distance(point, centers.row(0));
    for (std::size_t c = 1; c < centers.rows(); ++c) {
        const double d = squared_distance(point, centers.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

Matrix source_class_centers(const Matrix& embeddings, std::span<const int> labels) {
    if (labels.size() != embeddings.rows()) {
        throw std::invalid_argument("source_class_centers: " + std::to_string(labels.size()) + " labels for " +
                                    std::to_string(embeddings.rows()) + " embeddings");
    }
    Matrix centers(2, embeddings.cols());
    std::size_t counts[2] = {0, 0};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw std::invalid_argument("source_class_centers: label " + std::to_string(labels[i]) + " at row " +
                                        std::to_string(i));
        }
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        for (std::size_t t = 0; t < embeddings.cols(); ++t) centers(c, t) += embeddings(i, t);
    }
    for (std::size_t c = 0; c < 2; ++c) {
        if (counts[c] == 0) {
            throw std::invalid_argument("source_class_centers: class " + std::to_string(c) +
                                        " has no samples; both classes are required");
        }
        for (std::size_t t = 0; t < embeddings.cols(); ++t) centers(c, t) /= static_cast<double>(counts[c]);
    }
    return centers;
}

namespace {

double assign(const Matrix& points, const Matrix& centers, std::vector<int>& labels) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const std::size_t c = nearest_center(points.row(i), centers);
        labels[i] = static_cast<int>(c);
        inertia += squared_distance(points.row(i), centers.row(c));
    }
    return inertia;
}

Matrix recompute_centers(const Matrix& points, const Matrix& old_centers, std::vector<int>& labels) {
    const std::size_t k = old_centers.rows();
    Matrix centers(k, points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        for (std::size_t t = 0; t < points.cols(); ++t) centers(c, t) += points(i, t);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t t = 0; t < points.cols(); ++t) centers(c, t) /= static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        // Farthest point from its own (updated) center, never taking the
        // last member of another cluster.
        std::size_t far = points.rows();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.rows(); ++i) {
            const auto own = static_cast<std::size_t>(labels[i]);
            if (counts[own] <= 1) continue;
            const double d = squared_distance(points.row(i), centers.row(own));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far == points.rows()) {
            throw std::runtime_error("kmeans: cannot reseed empty cluster " + std::to_string(c));
        }
        --counts[static_cast<std::size_t>(labels[far])];
        labels[far] = static_cast<int>(c);
        counts[c] = 1;
        for (std::size_t t = 0; t < points.cols(); ++t) centers(c, t) = points(far, t);
    }
    return centers;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, const Matrix& init_centers, const KMeansOptions& opts) {
    const std::size_t k = init_centers.rows();
    if (k == 0) throw std::invalid_argument("kmeans: no initial centers");
    if (points.rows() < k) {
        throw std::invalid_argument("kmeans: " + std::to_string(points.rows()) + " points for " + std::to_string(k) +
                                    " clusters");
    }
    if (points.cols() != init_centers.cols()) {
        throw std::invalid_argument("kmeans: points " + points.shape_string() + " vs centers " +
                                    init_centers.shape_string());
    }
    KMeansResult res;
    res.labels.assign(points.rows(), 0);
    res.centers = init_centers;
    res.inertia = assign(points, res.centers, res.labels);
    res.inertia_trace.push_back(res.inertia);

    std::vector<int> next(points.rows(), 0);
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        std::vector<int> working = res.labels;
        Matrix centers = recompute_centers(points, res.centers, working);
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            shift = std::max(shift, squared_distance(centers.row(c), res.centers.row(c)));
        }
        res.centers = std::move(centers);
        res.inertia = assign(points, res.centers, next);
        res.inertia_trace.push_back(res.inertia);
        res.iterations = it + 1;
        const bool changed = next != res.labels;
        res.labels.swap(next);
        if (!changed || std::sqrt(shift) < opts.tol) break;
    }
    return res;
}

ClusterState init_cluster_state(const Matrix& source_embeddings, std::span<const int> source_labels,
                                const Matrix& target_embeddings, const KMeansOptions& opts) {
    const Matrix source_centers = source_class_centers(source_embeddings, source_labels);
    KMeansResult km = kmeans(target_embeddings, source_centers, opts);
    ClusterState state;
    state.centroids = Matrix(source_centers.rows(), source_centers.cols());
    for (std::size_t i = 0; i < state.centroids.size(); ++i) {
        state.centroids.values()[i] = 0.5 * (source_centers.values()[i] + km.centers.values()[i]);
    }
    state.pseudo_labels = std::move(km.labels);
    return state;
}

std::vector<int> update_pseudo_labels(const Matrix& target_embeddings, const Matrix& centroids) {
    if (target_embeddings.cols() != centroids.cols()) {
        throw std::invalid_argument("update_pseudo_labels: embeddings " + target_embeddings.shape_string() +
                                    " vs centroids " + centroids.shape_string());
    }
    std::vector<int> labels(target_embeddings.rows());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<int>(nearest_center(target_embeddings.row(i), centroids));
    }
    return labels;
}

}  // namespace dcda
