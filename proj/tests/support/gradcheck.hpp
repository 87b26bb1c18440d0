#pragma once

// Central finite differences against compute_gradients, one loss term at a
// time. A parameter whose perturbation flips any ReLU between active and
// inactive is skipped: the loss has a kink there and the difference
// quotient does not estimate the derivative.

#include <algorithm>
#include <cmath>
#include <random>
#include <string_view>
#include <vector>

#include "dcda/losses.hpp"
#include "dcda/model.hpp"
#include "dcda/trainer.hpp"
#include "support/oracles.hpp"

namespace gradcheck {

enum class Term { source_cls, domain, target_cls, cluster };
inline constexpr Term kTerms[] = {Term::source_cls, Term::domain, Term::target_cls, Term::cluster};

inline std::string_view to_string(Term t) {
    switch (t) {
        case Term::source_cls: return "source_cls";
        case Term::domain: return "domain";
        case Term::target_cls: return "target_cls";
        case Term::cluster: return "cluster";
    }
    return "?";
}

struct Instance {
    dcda::DcdaModel model;
    dcda::Batch source, target;
    dcda::TrainConfig config;
    double lambda = 0.5;
};

inline Instance make_instance(std::uint64_t seed, std::size_t d = 4, std::size_t h = 8, std::size_t batch = 16) {
    std::mt19937_64 rng(seed * 7919 + 17);
    Instance in;
    in.config.mode = dcda::TrainMode::dcda_full;
    in.config.feature_hidden = {12};
    in.config.embed_dim = h;
    in.config.discriminator_hidden = {8};
    in.model = dcda::DcdaModel::create(in.config.arch(d), seed);
    in.source = {oracle::random_matrix(rng, batch, d), oracle::random_labels(rng, batch)};
    in.target = {oracle::random_matrix(rng, batch, d, -0.5, 1.5), oracle::random_labels(rng, batch)};
    in.model.centroids = oracle::random_matrix(rng, dcda::kNumClasses, h, -0.5, 0.5);
    in.lambda = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    return in;
}

inline dcda::Matrix stacked_embeddings(const dcda::DcdaModel& m, const Instance& in) {
    return dcda::embed(m, dcda::Matrix::vstack(in.source.features, in.target.features));
}

// Soft target of the clustering cross-entropy at the unperturbed model.
inline dcda::Matrix cluster_target(const Instance& in) {
    const std::size_t ns = in.source.features.rows();
    const dcda::Matrix zt = stacked_embeddings(in.model, in).slice_rows(ns, ns + in.target.features.rows());
    const dcda::Matrix p = dcda::student_t_assignment(zt, in.model.centroids, in.config.alpha);
    return dcda::mix_pseudo(dcda::auxiliary_distribution(p).q, in.target.labels, in.config.mix_weight);
}

inline double term_loss(const dcda::DcdaModel& m, const Instance& in, Term term, const dcda::Matrix& q_fixed) {
    switch (term) {
        case Term::source_cls:
            return dcda::task_loss(dcda::classify_probs(m, in.source.features), in.source.labels);
        case Term::target_cls:
            return dcda::task_loss(dcda::classify_probs(m, in.target.features), in.target.labels);
        case Term::domain: {
            const std::size_t ns = in.source.features.rows();
            std::vector<int> dom(ns + in.target.features.rows(), 1);
            std::fill_n(dom.begin(), ns, 0);
            return dcda::domain_loss(dcda::discriminate_probs(m, stacked_embeddings(m, in), in.lambda).probs, dom);
        }
        case Term::cluster: {
            const std::size_t ns = in.source.features.rows();
            const dcda::Matrix zt = stacked_embeddings(m, in).slice_rows(ns, ns + in.target.features.rows());
            const dcda::Matrix p = dcda::student_t_assignment(zt, m.centroids, in.config.alpha);
            const dcda::Matrix q = dcda::mix_pseudo(dcda::auxiliary_distribution(p).q, in.target.labels,
                                                    in.config.mix_weight);
            return dcda::clustering_loss(q_fixed, p) + dcda::balance_regularizer(q);
        }
    }
    return 0.0;
}

inline void append_pattern(std::vector<bool>& out, const dcda::LayerStack& stack, const dcda::Matrix& input) {
    const dcda::ForwardResult f = dcda::forward(stack, input);
    for (std::size_t l = 0; l < stack.depth(); ++l) {
        if (stack.layers()[l].activation != dcda::Activation::relu) continue;
        for (double v : f.tape.pre[l].values()) out.push_back(v > 0.0);
    }
}

inline std::vector<bool> relu_pattern(const dcda::DcdaModel& m, const Instance& in) {
    std::vector<bool> out;
    const dcda::Matrix x = dcda::Matrix::vstack(in.source.features, in.target.features);
    append_pattern(out, m.feature_extractor, x);
    const dcda::Matrix z = dcda::embed(m, x);
    append_pattern(out, m.classifier, z);
    append_pattern(out, m.discriminator, z);
    return out;
}

struct Report {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t nonzero = 0;  // analytic entries with |g| > 0
};

inline constexpr double kRelFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
    return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), kRelFloor});
}

inline Report check(const Instance& in, Term term, double eps = 1e-5) {
    dcda::TrainConfig cfg = in.config;
    cfg.weight_source_cls = term == Term::source_cls ? 1.0 : 0.0;
    cfg.weight_domain = term == Term::domain ? 1.0 : 0.0;
    cfg.weight_target_cls = term == Term::target_cls ? 1.0 : 0.0;
    cfg.weight_cluster = term == Term::cluster ? 1.0 : 0.0;
    const dcda::GradientResult g = dcda::compute_gradients(in.model, in.source, in.target, cfg, in.lambda);

    const dcda::Matrix q_fixed = cluster_target(in);
    const std::vector<bool> base_pattern = relu_pattern(in.model, in);
    dcda::DcdaModel m = in.model;

    struct Group {
        std::vector<std::span<double>> params;
        std::vector<std::span<const double>> grads;
        double sign;  // analytic = sign * numeric
    };
    auto blocks = [](const std::vector<dcda::LayerGrads>& lg) {
        std::vector<std::span<const double>> out;
        for (const auto& l : lg) {
            out.emplace_back(l.weight.values());
            out.emplace_back(l.bias);
        }
        return out;
    };
    const double f_sign = term == Term::domain ? -in.lambda : 1.0;
    Group groups[] = {
        {m.feature_extractor.parameter_blocks(), blocks(g.grads.feature_extractor), f_sign},
        {m.classifier.parameter_blocks(), blocks(g.grads.classifier), 1.0},
        {m.discriminator.parameter_blocks(), blocks(g.grads.discriminator), 1.0},
        {{m.centroids.values()}, {g.grads.centroids.values()}, 1.0},
    };

    Report r;
    for (Group& grp : groups) {
        for (std::size_t b = 0; b < grp.params.size(); ++b) {
            for (std::size_t i = 0; i < grp.params[b].size(); ++i) {
                double& p = grp.params[b][i];
                const double saved = p;
                p = saved + eps;
                const double up = term_loss(m, in, term, q_fixed);
                const bool up_kink = relu_pattern(m, in) != base_pattern;
                p = saved - eps;
                const double down = term_loss(m, in, term, q_fixed);
                const bool down_kink = relu_pattern(m, in) != base_pattern;
                p = saved;
                if (up_kink || down_kink) {
                    ++r.skipped;
                    continue;
                }
                const double numeric = grp.sign * (up - down) / (2.0 * eps);
                const double analytic = grp.grads[b][i];
                if (analytic != 0.0) ++r.nonzero;
                r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic, numeric));
                ++r.checked;
            }
        }
    }
    return r;
}

}  // namespace gradcheck
