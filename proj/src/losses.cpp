#include "dcda/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dcda/nn.hpp"

namespace dcda {

namespace {

void check_labels(const Matrix& probs, std::span<const int> labels, const char* what) {
    if (probs.rows() == 0) throw std::invalid_argument(std::string(what) + ": empty batch");
    if (labels.size() != probs.rows()) {
        throw std::invalid_argument(std::string(what) + ": " + std::to_string(labels.size()) + " labels for " +
                                    std::to_string(probs.rows()) + " rows");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probs.cols()) {
            throw std::invalid_argument(std::string(what) + ": label " + std::to_string(labels[i]) + " at row " +
                                        std::to_string(i) + " outside [0, " + std::to_string(probs.cols()) + ")");
        }
    }
}

double hard_cross_entropy(const Matrix& probs, std::span<const int> labels) {
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        sum -= std::log(std::max(probs(i, static_cast<std::size_t>(labels[i])), kLogFloor));
    }
    return sum / static_cast<double>(probs.rows());
}

Matrix hard_cross_entropy_grad(const Matrix& probs, std::span<const int> labels) {
    Matrix g(probs.rows(), probs.cols());
    const double n = static_cast<double>(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        const double p = probs(i, c);
        g(i, c) = p > kLogFloor ? -1.0 / (n * p) : 0.0;
    }
    return g;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shapes " + a.shape_string() + " and " + b.shape_string() +
                                    " differ");
    }
    if (a.rows() == 0) throw std::invalid_argument(std::string(what) + ": empty batch");
}

}  // namespace

bool is_row_stochastic(const AssignmentMatrix& m, double tol) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (double v : m.row(r)) {
            if (!(v >= 0.0 && v <= 1.0)) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

double task_loss(const AssignmentMatrix& probs, std::span<const int> labels) {
    check_labels(probs, labels, "task_loss");
    return hard_cross_entropy(probs, labels);
}

Matrix task_loss_grad(const AssignmentMatrix& probs, std::span<const int> labels) {
    check_labels(probs, labels, "task_loss");
    return hard_cross_entropy_grad(probs, labels);
}

double domain_loss(const AssignmentMatrix& domain_probs, std::span<const int> domain_labels) {
    check_labels(domain_probs, domain_labels, "domain_loss");
    return hard_cross_entropy(domain_probs, domain_labels);
}

Matrix domain_loss_grad(const AssignmentMatrix& domain_probs, std::span<const int> domain_labels) {
    check_labels(domain_probs, domain_labels, "domain_loss");
    return hard_cross_entropy_grad(domain_probs, domain_labels);
}

AssignmentMatrix student_t_assignment(const Matrix& embeddings, const Matrix& centroids, double alpha) {
    if (embeddings.cols() != centroids.cols()) {
        throw std::invalid_argument("student_t_assignment: embeddings " + embeddings.shape_string() +
                                    " vs centroids " + centroids.shape_string());
    }
    if (!(alpha > 0.0)) throw std::invalid_argument("student_t_assignment: alpha must be > 0");
    const double expo = (alpha + 1.0) / 2.0;
    const std::size_t k = centroids.rows();
    AssignmentMatrix p(embeddings.rows(), k);
    std::vector<double> logk(k);
    for (std::size_t j = 0; j < embeddings.rows(); ++j) {
        // Log domain keeps far-away centroids from underflowing the whole row.
        for (std::size_t c = 0; c < k; ++c) {
            logk[c] = -expo * std::log1p(squared_distance(embeddings.row(j), centroids.row(c)) / alpha);
        }
        const double mx = *std::max_element(logk.begin(), logk.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            p(j, c) = std::exp(logk[c] - mx);
            sum += p(j, c);
        }
        for (std::size_t c = 0; c < k; ++c) p(j, c) /= sum;
    }
    return p;
}

StudentTGrads student_t_backward(const Matrix& embeddings, const Matrix& centroids, double alpha,
                                 const AssignmentMatrix& assignment, const Matrix& grad_assignment) {
    if (!assignment.same_shape(grad_assignment) || assignment.rows() != embeddings.rows() ||
        assignment.cols() != centroids.rows()) {
        throw std::invalid_argument("student_t_backward: shape mismatch");
    }
    const double expo = (alpha + 1.0) / 2.0;
    const std::size_t h = embeddings.cols();
    StudentTGrads g{Matrix(embeddings.rows(), h), Matrix(centroids.rows(), h)};
    for (std::size_t j = 0; j < embeddings.rows(); ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < centroids.rows(); ++c) dot += grad_assignment(j, c) * assignment(j, c);
        for (std::size_t c = 0; c < centroids.rows(); ++c) {
            const double dlogk = assignment(j, c) * (grad_assignment(j, c) - dot);
            const double u = 1.0 + squared_distance(embeddings.row(j), centroids.row(c)) / alpha;
            // d logk / d dist^2 = -expo / (alpha * u); d dist^2 / dz = 2 (z - Z).
            const double coeff = dlogk * (-expo / (alpha * u)) * 2.0;
            for (std::size_t t = 0; t < h; ++t) {
                const double diff = embeddings(j, t) - centroids(c, t);
                g.embeddings(j, t) += coeff * diff;
                g.centroids(c, t) -= coeff * diff;
            }
        }
    }
    return g;
}

AuxiliaryDistribution auxiliary_distribution(const AssignmentMatrix& p) {
    AuxiliaryDistribution out{AssignmentMatrix(p.rows(), p.cols()), {}};
    std::vector<double> inv_sqrt(p.cols());
    for (std::size_t k = 0; k < p.cols(); ++k) {
        double f = 0.0;
        for (std::size_t j = 0; j < p.rows(); ++j) f += p(j, k);
        if (f <= 0.0) {
            f = kLogFloor;
            out.degenerate_clusters.push_back(k);
        }
        inv_sqrt[k] = 1.0 / std::sqrt(f);
    }
    for (std::size_t j = 0; j < p.rows(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.cols(); ++k) {
            out.q(j, k) = p(j, k) * inv_sqrt[k];
            s += out.q(j, k);
        }
        for (std::size_t k = 0; k < p.cols(); ++k) out.q(j, k) /= s;
    }
    return out;
}

Matrix auxiliary_distribution_backward(const AssignmentMatrix& p, const Matrix& grad_q) {
    if (!p.same_shape(grad_q)) throw std::invalid_argument("auxiliary_distribution_backward: shape mismatch");
    const std::size_t n = p.rows();
    const std::size_t kk = p.cols();
    std::vector<double> f(kk, 0.0);
    std::vector<bool> floored(kk, false);
    for (std::size_t k = 0; k < kk; ++k) {
        for (std::size_t j = 0; j < n; ++j) f[k] += p(j, k);
        if (f[k] <= 0.0) {
            f[k] = kLogFloor;
            floored[k] = true;
        }
    }
    // r = p / sqrt(f), q = r / rowsum(r)
    Matrix grad_r(n, kk);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < kk; ++k) s += p(j, k) / std::sqrt(f[k]);
        double dot = 0.0;
        for (std::size_t k = 0; k < kk; ++k) dot += grad_q(j, k) * (p(j, k) / std::sqrt(f[k]) / s);
        for (std::size_t k = 0; k < kk; ++k) grad_r(j, k) = (grad_q(j, k) - dot) / s;
    }
    Matrix grad_p(n, kk);
    for (std::size_t k = 0; k < kk; ++k) {
        const double inv_sqrt = 1.0 / std::sqrt(f[k]);
        double through_f = 0.0;
        if (!floored[k]) {
            for (std::size_t j = 0; j < n; ++j) through_f += grad_r(j, k) * p(j, k);
            through_f *= -0.5 * inv_sqrt / f[k];
        }
        for (std::size_t j = 0; j < n; ++j) grad_p(j, k) = grad_r(j, k) * inv_sqrt + through_f;
    }
    return grad_p;
}

AssignmentMatrix mix_pseudo(const AssignmentMatrix& q, std::span<const int> pseudo_labels, double weight) {
    check_labels(q, pseudo_labels, "mix_pseudo");
    if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("mix_pseudo: weight must be in [0, 1]");
    AssignmentMatrix out(q.rows(), q.cols());
    for (std::size_t j = 0; j < q.rows(); ++j) {
        for (std::size_t k = 0; k < q.cols(); ++k) {
            const double onehot = static_cast<std::size_t>(pseudo_labels[j]) == k ? 1.0 : 0.0;
            out(j, k) = (1.0 - weight) * q(j, k) + weight * onehot;
        }
    }
    return out;
}

double clustering_loss(const AssignmentMatrix& q, const AssignmentMatrix& p) {
    check_same_shape(q, p, "clustering_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        sum -= q.values()[i] * std::log(std::max(p.values()[i], kLogFloor));
    }
    return sum / static_cast<double>(q.rows());
}

Matrix clustering_loss_grad(const AssignmentMatrix& q, const AssignmentMatrix& p) {
    check_same_shape(q, p, "clustering_loss");
    Matrix g(p.rows(), p.cols());
    const double n = static_cast<double>(p.rows());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pv = p.values()[i];
        g.values()[i] = pv > kLogFloor ? -q.values()[i] / (n * pv) : 0.0;
    }
    return g;
}

double balance_regularizer(const AssignmentMatrix& q) {
    if (q.rows() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < q.cols(); ++k) {
        double mean = 0.0;
        for (std::size_t j = 0; j < q.rows(); ++j) mean += q(j, k);
        mean /= static_cast<double>(q.rows());
        total += mean * std::log(std::max(mean, kLogFloor));
    }
    return total;
}

Matrix balance_regularizer_grad(const AssignmentMatrix& q) {
    Matrix g(q.rows(), q.cols());
    if (q.rows() == 0) return g;
    const double n = static_cast<double>(q.rows());
    for (std::size_t k = 0; k < q.cols(); ++k) {
        double mean = 0.0;
        for (std::size_t j = 0; j < q.rows(); ++j) mean += q(j, k);
        mean /= n;
        const double d = mean > kLogFloor ? (std::log(mean) + 1.0) / n : std::log(kLogFloor) / n;
        for (std::size_t j = 0; j < q.rows(); ++j) g(j, k) = d;
    }
    return g;
}

}  // namespace dcda
