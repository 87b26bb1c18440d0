#pragma once

// Loss terms of the clustering-guided adaptation objective and their
// gradients with respect to the probabilities that feed them.
//
// Probability matrices are N x K, one row per sample (an "assignment
// matrix": rows sum to one, entries in [0, 1]). Column 0 is bona-fide,
// column 1 attack, matching class labels 0 and 1.

#include <span>
#include <vector>

#include "dcda/matrix.hpp"

namespace dcda {

using AssignmentMatrix = Matrix;

bool is_row_stochastic(const AssignmentMatrix& m, double tol = 1e-9);

// Mean of -log p[label] over rows; labels must index columns of probs.
double task_loss(const AssignmentMatrix& probs, std::span<const int> labels);
Matrix task_loss_grad(const AssignmentMatrix& probs, std::span<const int> labels);

// Cross-entropy over source (0) and target (1) domain labels.
double domain_loss(const AssignmentMatrix& domain_probs, std::span<const int> domain_labels);
Matrix domain_loss_grad(const AssignmentMatrix& domain_probs, std::span<const int> domain_labels);

// p_jc proportional to (1 + |z_j - Z_c|^2 / alpha)^(-(alpha + 1) / 2).
AssignmentMatrix student_t_assignment(const Matrix& embeddings, const Matrix& centroids, double alpha);

struct StudentTGrads {
    Matrix embeddings;  // N x h
    Matrix centroids;   // K x h
};

// Pulls dLoss/dp back through the Student's t kernel. `assignment` must be
// the output of student_t_assignment on the same inputs.
StudentTGrads student_t_backward(const Matrix& embeddings, const Matrix& centroids, double alpha,
                                 const AssignmentMatrix& assignment, const Matrix& grad_assignment);

struct AuxiliaryDistribution {
    AssignmentMatrix q;
    // Columns whose total mass was zero; their divisor was floored at 1e-12.
    std::vector<std::size_t> degenerate_clusters;
};

// q_jk = (p_jk / sqrt(f_k)) / sum_k' (p_jk' / sqrt(f_k')), f_k = sum_j p_jk.
AuxiliaryDistribution auxiliary_distribution(const AssignmentMatrix& p);

// Pulls dLoss/dq back to dLoss/dp through auxiliary_distribution.
Matrix auxiliary_distribution_backward(const AssignmentMatrix& p, const Matrix& grad_q);

// (1 - weight) * q + weight * onehot(pseudo_labels). The default weight 0.5
// gives the equal mix of the current assignment and the previous labels.
AssignmentMatrix mix_pseudo(const AssignmentMatrix& q, std::span<const int> pseudo_labels, double weight = 0.5);

// -(1/N) sum_j sum_k q_jk log p_jk with q held constant.
double clustering_loss(const AssignmentMatrix& q, const AssignmentMatrix& p);
Matrix clustering_loss_grad(const AssignmentMatrix& q, const AssignmentMatrix& p);

// sum_k qbar_k log qbar_k, qbar_k the column mean of q. Lies in [-log K, 0].
double balance_regularizer(const AssignmentMatrix& q);
Matrix balance_regularizer_grad(const AssignmentMatrix& q);

}  // namespace dcda
