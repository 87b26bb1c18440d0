#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dcda/trainer.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace dcda;

namespace {

std::string model_text(const DcdaModel& m) {
    std::ostringstream out;
    save_model(m, out);
    return out.str();
}

TrainConfig quick_config(TrainMode mode) {
    TrainConfig c;
    c.mode = mode;
    c.epochs = 3;
    c.feature_hidden = {8};
    c.embed_dim = 4;
    c.discriminator_hidden = {4};
    c.seed = 11;
    return c;
}

Benchmark small_benchmark() {
    BenchmarkConfig b;
    b.n_per_class = 40;
    return make_moons_benchmark(4, b);
}

}  // namespace

TEST_CASE("lambda schedule") {
    CHECK(lambda_schedule(0.0, 10.0, 1.0) == 0.0);
    CHECK(lambda_schedule(1.0, 10.0, 1.0) == doctest::Approx(0.9999092042625951312).epsilon(1e-15));
    CHECK(lambda_schedule(1.0, 10.0, 0.5) == doctest::Approx(0.5 * 0.9999092042625951312).epsilon(1e-15));
    CHECK(lambda_schedule(2.0, 10.0, 1.0) == lambda_schedule(1.0, 10.0, 1.0));
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        const double l = lambda_schedule(i / 100.0, 10.0, 1.0);
        CHECK(l > prev);
        prev = l;
    }
}

TEST_CASE("config documents round trip and reject unknown or bad keys") {
    TrainConfig c;
    c.lr = 0.0123;
    c.mode = TrainMode::da_only;
    c.feature_hidden = {7, 3};
    c.soft_target_cls = true;
    const TrainConfig back = TrainConfig::from_document(KeyValueDoc::parse(c.to_document().render(), "cfg"));
    CHECK(back.to_document().entries() == c.to_document().entries());
    CHECK(back.lr == 0.0123);

    TrainConfig d;
    CHECK_THROWS_WITH_AS(d.set("learning_rate", "1"), doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(d.set("lr", "fast"), doctest::Contains("lr"), std::invalid_argument);
    CHECK_THROWS_AS(d.set("mode", "dcda"), std::invalid_argument);
    CHECK_THROWS_AS(d.set("feature_hidden", "8,0"), std::invalid_argument);
    d.mix_weight = 1.5;
    CHECK_THROWS_WITH_AS(d.validate(), doctest::Contains("mix_weight"), std::invalid_argument);
    for (TrainMode m : kAllModes) CHECK(train_mode_from_string(to_string(m)) == m);
}

TEST_CASE("compute_gradients: each term's gradient matches finite differences") {
    for (std::uint64_t seed = 100; seed < 103; ++seed) {
        const gradcheck::Instance in = gradcheck::make_instance(seed);
        for (gradcheck::Term t : gradcheck::kTerms) {
            const gradcheck::Report r = gradcheck::check(in, t);
            INFO(gradcheck::to_string(t), " seed ", seed);
            CHECK(r.max_rel_error < 1e-5);
            CHECK(r.nonzero > 0);
        }
    }
}

TEST_CASE("mode gating of the objective") {
    const gradcheck::Instance in = gradcheck::make_instance(1);
    TrainConfig cfg = in.config;

    cfg.mode = TrainMode::source_only;
    const GradientResult so = compute_gradients(in.model, in.source, Batch{}, cfg, 0.5);
    CHECK(so.losses.domain == 0.0);
    CHECK(so.losses.cluster == 0.0);
    CHECK(so.losses.target_cls == 0.0);
    CHECK(so.losses.total == so.losses.source_cls);
    for (double v : so.grads.centroids.values()) CHECK(v == 0.0);

    cfg.mode = TrainMode::da_only;
    const GradientResult da = compute_gradients(in.model, in.source, in.target, cfg, 0.5);
    CHECK(da.losses.domain > 0.0);
    CHECK(da.losses.cluster == 0.0);
    CHECK(da.losses.target_cls == 0.0);

    cfg.mode = TrainMode::dcda_no_target_cls;
    const GradientResult nt = compute_gradients(in.model, in.source, in.target, cfg, 0.5);
    CHECK(nt.losses.cluster > 0.0);
    CHECK(nt.losses.target_cls == 0.0);
    // Without the target classification term the classifier never sees pseudo-labels.
    Batch flipped = in.target;
    for (int& y : flipped.labels) y = 1 - y;
    cfg.mix_weight = 0.0;
    const GradientResult a = compute_gradients(in.model, in.source, in.target, cfg, 0.5);
    const GradientResult b = compute_gradients(in.model, in.source, flipped, cfg, 0.5);
    for (std::size_t l = 0; l < a.grads.classifier.size(); ++l) {
        CHECK(a.grads.classifier[l].weight == b.grads.classifier[l].weight);
    }

    cfg = in.config;
    const GradientResult full = compute_gradients(in.model, in.source, in.target, cfg, 0.5);
    CHECK(full.losses.target_cls > 0.0);
}

TEST_CASE("total is the weighted sum of the reported terms") {
    gradcheck::Instance in = gradcheck::make_instance(2);
    in.config.weight_source_cls = 0.7;
    in.config.weight_target_cls = 0.3;
    in.config.weight_domain = 1.9;
    in.config.weight_cluster = 0.4;
    const StepLosses l = compute_gradients(in.model, in.source, in.target, in.config, 0.5).losses;
    CHECK(l.total == doctest::Approx(0.7 * l.source_cls + 0.3 * l.target_cls + 1.9 * l.domain +
                                     0.4 * (l.cluster + l.balance))
                         .epsilon(1e-14));
}

TEST_CASE("lambda = 0 removes the domain term from the feature extractor only") {
    const gradcheck::Instance in = gradcheck::make_instance(3);
    TrainConfig with = in.config;
    TrainConfig without = in.config;
    without.weight_domain = 0.0;
    const GradientResult a = compute_gradients(in.model, in.source, in.target, with, 0.0);
    const GradientResult b = compute_gradients(in.model, in.source, in.target, without, 0.0);
    for (std::size_t l = 0; l < a.grads.feature_extractor.size(); ++l) {
        const Matrix& wa = a.grads.feature_extractor[l].weight;
        const Matrix& wb = b.grads.feature_extractor[l].weight;
        for (std::size_t i = 0; i < wa.size(); ++i) CHECK(wa.values()[i] == doctest::Approx(wb.values()[i]).epsilon(1e-14).scale(1e-300));
    }
    double d_norm = 0.0;
    for (const auto& l : a.grads.discriminator) {
        for (double v : l.weight.values()) d_norm += std::fabs(v);
    }
    CHECK(d_norm > 0.0);
}

TEST_CASE("one training step is a plain momentum update of every group") {
    const gradcheck::Instance in = gradcheck::make_instance(4);
    TrainConfig cfg = in.config;
    cfg.lr = 0.05;
    cfg.momentum = 0.9;
    TrainState state(in.model, cfg);
    const GradientResult g1 = compute_gradients(in.model, in.source, in.target, cfg, 0.4);
    state.step(in.source, in.target, 0.4);

    auto expect_step = [&](const LayerStack& before, const LayerStack& after, const std::vector<LayerGrads>& g) {
        for (std::size_t l = 0; l < g.size(); ++l) {
            const Matrix& w0 = before.layers()[l].weight;
            const Matrix& w1 = after.layers()[l].weight;
            for (std::size_t i = 0; i < w0.size(); ++i) {
                CHECK(w1.values()[i] == w0.values()[i] - cfg.lr * g[l].weight.values()[i]);
            }
            for (std::size_t i = 0; i < g[l].bias.size(); ++i) {
                CHECK(after.layers()[l].bias[i] == before.layers()[l].bias[i] - cfg.lr * g[l].bias[i]);
            }
        }
    };
    expect_step(in.model.feature_extractor, state.model().feature_extractor, g1.grads.feature_extractor);
    expect_step(in.model.classifier, state.model().classifier, g1.grads.classifier);
    expect_step(in.model.discriminator, state.model().discriminator, g1.grads.discriminator);
    for (std::size_t i = 0; i < g1.grads.centroids.size(); ++i) {
        CHECK(state.model().centroids.values()[i] ==
              in.model.centroids.values()[i] - cfg.lr * g1.grads.centroids.values()[i]);
    }

    // Second step carries the first gradient through the momentum buffer.
    const DcdaModel mid = state.model();
    const GradientResult g2 = compute_gradients(mid, in.source, in.target, cfg, 0.4);
    state.step(in.source, in.target, 0.4);
    for (std::size_t i = 0; i < g2.grads.centroids.size(); ++i) {
        const double v = cfg.momentum * g1.grads.centroids.values()[i] + g2.grads.centroids.values()[i];
        CHECK(state.model().centroids.values()[i] == mid.centroids.values()[i] - cfg.lr * v);
    }
}

TEST_CASE("inactive groups are left untouched") {
    const gradcheck::Instance in = gradcheck::make_instance(5);
    TrainConfig cfg = in.config;
    cfg.mode = TrainMode::source_only;
    TrainState so(in.model, cfg);
    so.step(in.source, Batch{}, 0.5);
    CHECK(so.model().discriminator == in.model.discriminator);
    CHECK(so.model().centroids == in.model.centroids);
    CHECK_FALSE(so.model().classifier == in.model.classifier);

    cfg.mode = TrainMode::da_only;
    TrainState da(in.model, cfg);
    da.step(in.source, in.target, 0.5);
    CHECK(da.model().centroids == in.model.centroids);
    CHECK_FALSE(da.model().discriminator == in.model.discriminator);
}

TEST_CASE("training is deterministic and never reads target labels") {
    const Benchmark b = small_benchmark();
    for (TrainMode mode : kAllModes) {
        const TrainConfig cfg = quick_config(mode);
        const std::string ref = model_text(train(cfg, b.source_train, &b.target_train).model);
        CHECK(model_text(train(cfg, b.source_train, &b.target_train).model) == ref);

        Dataset unlabelled = b.target_train;
        unlabelled.labels.reset();
        CHECK(model_text(train(cfg, b.source_train, &unlabelled).model) == ref);

        Dataset shuffled = b.target_train;
        std::mt19937_64 rng(1);
        std::shuffle(shuffled.labels->begin(), shuffled.labels->end(), rng);
        CHECK(model_text(train(cfg, b.source_train, &shuffled).model) == ref);
    }
}

TEST_CASE("source_only ignores the target entirely") {
    const Benchmark b = small_benchmark();
    const TrainConfig cfg = quick_config(TrainMode::source_only);
    Dataset bigger = b.target_train;
    bigger.features = Matrix::vstack(bigger.features, bigger.features);
    bigger.labels.reset();
    const std::string none = model_text(train(cfg, b.source_train, nullptr).model);
    CHECK(model_text(train(cfg, b.source_train, &b.target_train).model) == none);
    CHECK(model_text(train(cfg, b.source_train, &bigger).model) == none);
}

TEST_CASE("training report and cluster state") {
    const Benchmark b = small_benchmark();
    TrainConfig cfg = quick_config(TrainMode::dcda_full);
    const Dataset eval[] = {b.target_test};
    std::size_t observed = 0;
    const TrainResult r = train(cfg, b.source_train, &b.target_train, eval,
                                [&](std::size_t epoch, const DcdaModel&, const ClusterState& cs) {
                                    CHECK(cs.last_update_epoch == epoch + 1);
                                    ++observed;
                                });
    CHECK(observed == 3);
    CHECK(r.report.epochs.size() == 3);
    CHECK(r.report.iters_per_epoch == 3);  // ceil(80 / 32)
    CHECK(r.cluster_state.pseudo_labels.size() == b.target_train.size());
    CHECK(r.cluster_state.centroids == r.model.centroids);
    REQUIRE(r.report.final_metrics.size() == 1);
    CHECK(r.report.final_metrics[0].name == "target_test");
    CHECK(r.report.epochs.back().lambda > r.report.epochs.front().lambda);
}

TEST_CASE("training argument errors") {
    const Benchmark b = small_benchmark();
    Dataset unlabelled = b.source_train;
    unlabelled.labels.reset();
    CHECK_THROWS_WITH_AS(train(quick_config(TrainMode::source_only), unlabelled, nullptr), doctest::Contains("labels"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(train(quick_config(TrainMode::da_only), b.source_train, nullptr),
                         doctest::Contains("da_only needs target"), std::invalid_argument);
    Dataset wide = b.target_train;
    wide.features = Matrix(wide.size(), 3);
    CHECK_THROWS_AS(train(quick_config(TrainMode::dcda_full), b.source_train, &wide), std::invalid_argument);
}

TEST_CASE("ablation results do not depend on the worker count") {
    TrainConfig cfg = quick_config(TrainMode::dcda_full);
    BenchmarkConfig bench;
    bench.n_per_class = 30;
    const AblationResult one = run_ablation(cfg, bench, 0, 2, 1);
    const AblationResult three = run_ablation(cfg, bench, 0, 2, 3);
    REQUIRE(one.cells.size() == 8);
    for (std::size_t i = 0; i < one.cells.size(); ++i) {
        CHECK(one.cells[i].mode == three.cells[i].mode);
        CHECK(one.cells[i].target_acer == three.cells[i].target_acer);
    }
    CHECK(one.table().find("dcda_no_target_cls") != std::string::npos);
}
