#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcda/clustering.hpp"
#include "dcda/data.hpp"
#include "dcda/kv.hpp"
#include "dcda/metrics.hpp"
#include "dcda/model.hpp"
#include "dcda/nn.hpp"

namespace dcda {

// Ablation rows: supervised baseline, adversarial alignment only, clustering
// without the pseudo-label classification loss, and the full objective.
enum class TrainMode { source_only, da_only, dcda_no_target_cls, dcda_full };

std::string_view to_string(TrainMode m);
TrainMode train_mode_from_string(std::string_view s);
inline constexpr TrainMode kAllModes[] = {TrainMode::source_only, TrainMode::da_only, TrainMode::dcda_no_target_cls,
                                          TrainMode::dcda_full};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t epochs = 60;
    std::size_t iters_per_epoch = 0;  // 0: ceil(max(N_s, N_t) / batch_size)
    double lr = 0.01;
    double momentum = 0.9;
    double alpha = 1.0;  // Student's t degrees of freedom
    double gamma = 10.0;
    double max_lambda = 1.0;
    double mix_weight = 0.5;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::dcda_full;
    bool soft_target_cls = false;
    bool reinit_kmeans_each_epoch = false;

    double weight_source_cls = 1.0;
    double weight_target_cls = 0.5;
    double weight_domain = 1.0;
    double weight_cluster = 1.0;

    std::vector<std::size_t> feature_hidden{64, 32};
    std::size_t embed_dim = 16;
    std::vector<std::size_t> discriminator_hidden{32};

    std::size_t kmeans_max_iters = 100;
    double kmeans_tol = 1e-6;

    void validate() const;
    ModelArch arch(std::size_t input_dim) const;
    KMeansOptions kmeans_options() const { return {kmeans_max_iters, kmeans_tol}; }

    // Flat keys named exactly like the fields; unknown keys are rejected.
    void apply(const KeyValueDoc& doc);
    void set(std::string_view key, std::string_view value);
    KeyValueDoc to_document() const;
    static TrainConfig from_document(const KeyValueDoc& doc);
};

// max_lambda * (2 / (1 + exp(-gamma * progress)) - 1)
double lambda_schedule(double progress, double gamma, double max_lambda);

struct Batch {
    Matrix features;
    std::vector<int> labels;  // true labels (source) or pseudo-labels (target)
};

struct StepLosses {
    double source_cls = 0.0;
    double target_cls = 0.0;
    double domain = 0.0;
    double cluster = 0.0;  // cross-entropy part of the clustering loss
    double balance = 0.0;  // cluster-balance regularizer, added to cluster
    double total = 0.0;    // weighted sum driving the feature extractor
};

struct ModelGrads {
    std::vector<LayerGrads> feature_extractor;
    std::vector<LayerGrads> classifier;
    std::vector<LayerGrads> discriminator;
    Matrix centroids;
};

struct GradientResult {
    StepLosses losses;
    ModelGrads grads;
};

// Gradients of the mode-gated objective for one pair of batches:
//   F  <- sum of all active terms, domain term through the reverse layer
//   C  <- source and target classification
//   D  <- domain discrimination
//   Z  <- clustering (with balance regularizer)
// target may be empty in source_only mode.
GradientResult compute_gradients(const DcdaModel& model, const Batch& source, const Batch& target,
                                 const TrainConfig& config, double lambda);

// Model plus optimizer state for one run.
class TrainState {
public:
    TrainState(DcdaModel model, const TrainConfig& config);

    DcdaModel& model() { return model_; }
    const DcdaModel& model() const { return model_; }

    // One update of every parameter group from compute_gradients.
    StepLosses step(const Batch& source, const Batch& target, double lambda);

private:
    DcdaModel model_;
    TrainConfig config_;
    SgdMomentum opt_feature_, opt_classifier_, opt_discriminator_, opt_centroids_;
};

struct EpochRecord {
    StepLosses mean;  // averaged over the epoch's steps
    double lambda = 0.0;
    std::size_t pseudo_label_flips = 0;
};

struct SplitMetrics {
    std::string name;
    MetricsReport metrics;
};

struct TrainReport {
    TrainConfig config;
    std::size_t iters_per_epoch = 0;
    std::string kernels;
    std::vector<EpochRecord> epochs;
    std::vector<SplitMetrics> final_metrics;

    void write(const std::filesystem::path& path) const;
};

struct TrainResult {
    DcdaModel model;
    TrainReport report;
    ClusterState cluster_state;  // empty unless the mode clusters
};

// Full training run. Target labels are never read; evaluation sets (which
// may include the target) are scored at the end at threshold 0.5.
using EpochObserver = std::function<void(std::size_t epoch, const DcdaModel&, const ClusterState&)>;

TrainResult train(const TrainConfig& config, const Dataset& source, const Dataset* target,
                  std::span<const Dataset> eval_sets = {}, const EpochObserver& on_epoch = {});

struct AblationCell {
    TrainMode mode;
    std::uint64_t seed;
    double target_acer;
};

struct AblationResult {
    std::vector<AblationCell> cells;
    double mean_acer(TrainMode mode) const;
    std::string table() const;
};

// Called once per finished run, from the worker thread that trained it.
using AblationObserver = std::function<void(const AblationCell&, const TrainResult&)>;

// Every mode on the moons benchmark for seeds base_seed .. base_seed+n-1.
// Seed s trains with config seed s on the benchmark drawn from seed 10 * s.
// Runs execute on up to `jobs` threads; results do not depend on it.
AblationResult run_ablation(const TrainConfig& base, const BenchmarkConfig& bench, std::uint64_t base_seed,
                            std::size_t n_seeds, std::size_t jobs = 1, const AblationObserver& on_run = {});

}  // namespace dcda
