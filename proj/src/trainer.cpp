#include "dcda/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dcda/kernels.hpp"
#include "dcda/losses.hpp"
#include "dcda/text.hpp"

namespace dcda {

std::string_view to_string(TrainMode m) {
    switch (m) {
        case TrainMode::source_only: return "source_only";
        case TrainMode::da_only: return "da_only";
        case TrainMode::dcda_no_target_cls: return "dcda_no_target_cls";
        case TrainMode::dcda_full: return "dcda_full";
    }
    return "dcda_full";
}

TrainMode train_mode_from_string(std::string_view s) {
    for (TrainMode m : kAllModes) {
        if (to_string(m) == s) return m;
    }
    throw std::invalid_argument("unknown mode '" + std::string(s) +
                                "' (expected source_only, da_only, dcda_no_target_cls or dcda_full)");
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string join_dims(const std::vector<std::size_t>& dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? "," : "") + std::to_string(dims[i]);
    return out;
}

std::vector<std::size_t> parse_dims(std::string_view key, std::string_view v) {
    std::vector<std::size_t> dims;
    if (text::trim(v).empty()) return dims;
    for (auto part : text::split(v, ',')) {
        const auto n = text::parse_int(part);
        if (!n || *n <= 0) throw std::invalid_argument(std::string(key) + ": bad dimension '" + std::string(part) + "'");
        dims.push_back(static_cast<std::size_t>(*n));
    }
    return dims;
}

double parse_real(std::string_view key, std::string_view v) {
    const auto d = text::parse_double(v);
    if (!d) throw std::invalid_argument(std::string(key) + ": '" + std::string(v) + "' is not a number");
    return *d;
}

std::size_t parse_count(std::string_view key, std::string_view v) {
    const auto n = text::parse_int(v);
    if (!n || *n < 0) throw std::invalid_argument(std::string(key) + ": '" + std::string(v) + "' is not a count");
    return static_cast<std::size_t>(*n);
}

bool parse_flag(std::string_view key, std::string_view v) {
    v = text::trim(v);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument(std::string(key) + ": '" + std::string(v) + "' is not true/false");
}

}  // namespace

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (batch_size < 2) fail("batch_size must be >= 2");
    if (epochs < 1) fail("epochs must be >= 1");
    if (!(lr > 0.0)) fail("lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
    if (!(alpha > 0.0)) fail("alpha must be > 0");
    if (!(gamma >= 0.0)) fail("gamma must be >= 0");
    if (!(max_lambda >= 0.0)) fail("max_lambda must be >= 0");
    if (!(mix_weight >= 0.0 && mix_weight <= 1.0)) fail("mix_weight must be in [0, 1]");
    for (double w : {weight_source_cls, weight_target_cls, weight_domain, weight_cluster}) {
        if (!(w >= 0.0) || !std::isfinite(w)) fail("loss weights must be finite and >= 0");
    }
    if (embed_dim < 1) fail("embed_dim must be >= 1");
    if (kmeans_max_iters < 1) fail("kmeans_max_iters must be >= 1");
}

ModelArch TrainConfig::arch(std::size_t input_dim) const {
    return ModelArch{input_dim, feature_hidden, embed_dim, discriminator_hidden};
}

void TrainConfig::set(std::string_view key, std::string_view value) {
    value = text::trim(value);
    if (key == "batch_size") batch_size = parse_count(key, value);
    else if (key == "epochs") epochs = parse_count(key, value);
    else if (key == "iters_per_epoch") iters_per_epoch = parse_count(key, value);
    else if (key == "lr") lr = parse_real(key, value);
    else if (key == "momentum") momentum = parse_real(key, value);
    else if (key == "alpha") alpha = parse_real(key, value);
    else if (key == "gamma") gamma = parse_real(key, value);
    else if (key == "max_lambda") max_lambda = parse_real(key, value);
    else if (key == "mix_weight") mix_weight = parse_real(key, value);
    else if (key == "seed") seed = parse_count(key, value);
    else if (key == "mode") mode = train_mode_from_string(value);
    else if (key == "soft_target_cls") soft_target_cls = parse_flag(key, value);
    else if (key == "reinit_kmeans_each_epoch") reinit_kmeans_each_epoch = parse_flag(key, value);
    else if (key == "weight_source_cls") weight_source_cls = parse_real(key, value);
    else if (key == "weight_target_cls") weight_target_cls = parse_real(key, value);
    else if (key == "weight_domain") weight_domain = parse_real(key, value);
    else if (key == "weight_cluster") weight_cluster = parse_real(key, value);
    else if (key == "feature_hidden") feature_hidden = parse_dims(key, value);
    else if (key == "embed_dim") embed_dim = parse_count(key, value);
    else if (key == "discriminator_hidden") discriminator_hidden = parse_dims(key, value);
    else if (key == "kmeans_max_iters") kmeans_max_iters = parse_count(key, value);
    else if (key == "kmeans_tol") kmeans_tol = parse_real(key, value);
    else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

void TrainConfig::apply(const KeyValueDoc& doc) {
    for (const auto& [k, v] : doc.entries()) set(k, v);
}

KeyValueDoc TrainConfig::to_document() const {
    KeyValueDoc d;
    d.set("batch_size", std::to_string(batch_size));
    d.set("epochs", std::to_string(epochs));
    d.set("iters_per_epoch", std::to_string(iters_per_epoch));
    d.set("lr", text::format_double(lr));
    d.set("momentum", text::format_double(momentum));
    d.set("alpha", text::format_double(alpha));
    d.set("gamma", text::format_double(gamma));
    d.set("max_lambda", text::format_double(max_lambda));
    d.set("mix_weight", text::format_double(mix_weight));
    d.set("seed", std::to_string(seed));
    d.set("mode", std::string(to_string(mode)));
    d.set("soft_target_cls", soft_target_cls ? "true" : "false");
    d.set("reinit_kmeans_each_epoch", reinit_kmeans_each_epoch ? "true" : "false");
    d.set("weight_source_cls", text::format_double(weight_source_cls));
    d.set("weight_target_cls", text::format_double(weight_target_cls));
    d.set("weight_domain", text::format_double(weight_domain));
    d.set("weight_cluster", text::format_double(weight_cluster));
    d.set("feature_hidden", join_dims(feature_hidden));
    d.set("embed_dim", std::to_string(embed_dim));
    d.set("discriminator_hidden", join_dims(discriminator_hidden));
    d.set("kmeans_max_iters", std::to_string(kmeans_max_iters));
    d.set("kmeans_tol", text::format_double(kmeans_tol));
    return d;
}

TrainConfig TrainConfig::from_document(const KeyValueDoc& doc) {
    TrainConfig c;
    c.apply(doc);
    c.validate();
    return c;
}

double lambda_schedule(double progress, double gamma, double max_lambda) {
    progress = std::clamp(progress, 0.0, 1.0);
    return max_lambda * (2.0 / (1.0 + std::exp(-gamma * progress)) - 1.0);
}

// ---------------------------------------------------------------------------
// Gradients

namespace {

struct ModeTerms {
    bool target = false;
    bool domain = false;
    bool cluster = false;
    bool target_cls = false;
};

ModeTerms terms_for(TrainMode m) {
    switch (m) {
        case TrainMode::source_only: return {false, false, false, false};
        case TrainMode::da_only: return {true, true, false, false};
        case TrainMode::dcda_no_target_cls: return {true, true, true, false};
        case TrainMode::dcda_full: return {true, true, true, true};
    }
    return {};
}

void check_finite(double v, const char* term) {
    if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite loss in term ") + term);
}

void add_rows(Matrix& dst, std::size_t row_offset, const Matrix& src, double weight) {
    for (std::size_t r = 0; r < src.rows(); ++r) {
        for (std::size_t c = 0; c < src.cols(); ++c) dst(row_offset + r, c) += weight * src(r, c);
    }
}

std::vector<LayerGrads> zero_grads(const LayerStack& stack) {
    std::vector<LayerGrads> g;
    for (const Layer& l : stack.layers()) {
        g.push_back({Matrix(l.in_dim(), l.out_dim()), std::vector<double>(l.out_dim(), 0.0)});
    }
    return g;
}

std::vector<std::span<const double>> blocks_of(const std::vector<LayerGrads>& g) {
    std::vector<std::span<const double>> out;
    for (const LayerGrads& l : g) {
        out.emplace_back(l.weight.values());
        out.emplace_back(l.bias);
    }
    return out;
}

}  // namespace

GradientResult compute_gradients(const DcdaModel& model, const Batch& source, const Batch& target,
                                 const TrainConfig& config, double lambda) {
    const ModeTerms terms = terms_for(config.mode);
    const std::size_t ns = source.features.rows();
    const std::size_t nt = terms.target ? target.features.rows() : 0;
    if (ns == 0) throw std::invalid_argument("compute_gradients: empty source batch");
    if (terms.target && nt == 0) throw std::invalid_argument("compute_gradients: mode needs a target batch");
    if (terms.cluster && target.labels.size() != nt) {
        throw std::invalid_argument("compute_gradients: target batch needs one pseudo-label per row");
    }

    GradientResult res;
    StepLosses& L = res.losses;
    const Matrix input = terms.target ? Matrix::vstack(source.features, target.features) : source.features;
    const ForwardResult fwd_f = forward(model.feature_extractor, input);
    const Matrix& z = fwd_f.output;
    Matrix dz(z.rows(), z.cols());

    // Clustering of the target embeddings against the learnable centroids.
    Matrix q;
    if (terms.cluster) {
        const Matrix zt = z.slice_rows(ns, ns + nt);
        const AssignmentMatrix p = student_t_assignment(zt, model.centroids, config.alpha);
        q = mix_pseudo(auxiliary_distribution(p).q, target.labels, config.mix_weight);
        L.cluster = clustering_loss(q, p);
        L.balance = balance_regularizer(q);
        check_finite(L.cluster, "cluster");
        check_finite(L.balance, "balance");

        // The cross-entropy treats q as fixed; the balance term sees q as a
        // function of p through the closed-form update and the mixing.
        Matrix grad_p = clustering_loss_grad(q, p);
        Matrix grad_q = balance_regularizer_grad(q);
        for (double& v : grad_q.values()) v *= (1.0 - config.mix_weight);
        const Matrix grad_p_bal = auxiliary_distribution_backward(p, grad_q);
        for (std::size_t i = 0; i < grad_p.size(); ++i) {
            grad_p.values()[i] = config.weight_cluster * (grad_p.values()[i] + grad_p_bal.values()[i]);
        }
        StudentTGrads st = student_t_backward(zt, model.centroids, config.alpha, p, grad_p);
        add_rows(dz, ns, st.embeddings, 1.0);
        res.grads.centroids = std::move(st.centroids);
    } else {
        res.grads.centroids = Matrix(model.centroids.rows(), model.centroids.cols());
    }

    // Classifier: labelled source rows, pseudo-labelled target rows.
    {
        const ForwardResult fwd_c = forward(model.classifier, z);
        Matrix grad(fwd_c.output.rows(), fwd_c.output.cols());
        const Matrix ps = fwd_c.output.slice_rows(0, ns);
        L.source_cls = task_loss(ps, source.labels);
        check_finite(L.source_cls, "source_cls");
        add_rows(grad, 0, task_loss_grad(ps, source.labels), config.weight_source_cls);
        if (terms.target_cls) {
            const Matrix pt = fwd_c.output.slice_rows(ns, ns + nt);
            if (config.soft_target_cls) {
                if (q.empty()) throw std::logic_error("soft target classification needs the clustering term");
                L.target_cls = clustering_loss(q, pt);
                add_rows(grad, ns, clustering_loss_grad(q, pt), config.weight_target_cls);
            } else {
                L.target_cls = task_loss(pt, target.labels);
                add_rows(grad, ns, task_loss_grad(pt, target.labels), config.weight_target_cls);
            }
            check_finite(L.target_cls, "target_cls");
        }
        BackwardResult bwd = backward(model.classifier, fwd_c.tape, grad);
        res.grads.classifier = std::move(bwd.layers);
        for (std::size_t i = 0; i < dz.size(); ++i) dz.values()[i] += bwd.input_grad.values()[i];
    }

    // Domain discriminator behind the gradient reverse layer.
    if (terms.domain) {
        const DomainForward fwd_d = discriminate_probs(model, z, lambda);
        std::vector<int> domains(ns + nt, 1);
        std::fill_n(domains.begin(), ns, 0);
        L.domain = domain_loss(fwd_d.probs, domains);
        check_finite(L.domain, "domain");
        Matrix grad = domain_loss_grad(fwd_d.probs, domains);
        for (double& v : grad.values()) v *= config.weight_domain;
        DomainBackward bwd = discriminate_backward(model, fwd_d, grad, lambda);
        res.grads.discriminator = std::move(bwd.discriminator.layers);
        for (std::size_t i = 0; i < dz.size(); ++i) dz.values()[i] += bwd.embedding_grad.values()[i];
    } else {
        res.grads.discriminator = zero_grads(model.discriminator);
    }

    res.grads.feature_extractor = backward(model.feature_extractor, fwd_f.tape, dz).layers;

    L.total = config.weight_source_cls * L.source_cls;
    if (terms.target_cls) L.total += config.weight_target_cls * L.target_cls;
    if (terms.domain) L.total += config.weight_domain * L.domain;
    if (terms.cluster) L.total += config.weight_cluster * (L.cluster + L.balance);
    return res;
}

// ---------------------------------------------------------------------------
// Training state

TrainState::TrainState(DcdaModel model, const TrainConfig& config)
    : model_(std::move(model)),
      config_(config),
      opt_feature_(config.lr, config.momentum),
      opt_classifier_(config.lr, config.momentum),
      opt_discriminator_(config.lr, config.momentum),
      opt_centroids_(config.lr, config.momentum) {
    model_.validate();
}

StepLosses TrainState::step(const Batch& source, const Batch& target, double lambda) {
    GradientResult g = compute_gradients(model_, source, target, config_, lambda);
    const ModeTerms terms = terms_for(config_.mode);

    auto fp = model_.feature_extractor.parameter_blocks();
    auto fg = blocks_of(g.grads.feature_extractor);
    opt_feature_.step(fp, fg, "feature extractor (sum of active losses)");

    auto cp = model_.classifier.parameter_blocks();
    auto cg = blocks_of(g.grads.classifier);
    opt_classifier_.step(cp, cg, "classifier (source_cls + target_cls)");

    if (terms.domain) {
        auto dp = model_.discriminator.parameter_blocks();
        auto dg = blocks_of(g.grads.discriminator);
        opt_discriminator_.step(dp, dg, "discriminator (domain)");
    }
    if (terms.cluster) {
        std::span<double> zp[] = {model_.centroids.values()};
        std::span<const double> zg[] = {g.grads.centroids.values()};
        opt_centroids_.step(zp, zg, "centroids (cluster + balance)");
    }
    return g.losses;
}

// ---------------------------------------------------------------------------
// Full run

namespace {

std::vector<std::size_t> draw_indices(std::mt19937_64& rng, std::size_t n, std::size_t count) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    std::vector<std::size_t> idx(count);
    for (auto& i : idx) i = dist(rng);
    return idx;
}

void accumulate(StepLosses& acc, const StepLosses& s) {
    acc.source_cls += s.source_cls;
    acc.target_cls += s.target_cls;
    acc.domain += s.domain;
    acc.cluster += s.cluster;
    acc.balance += s.balance;
    acc.total += s.total;
}

void scale(StepLosses& acc, double f) {
    acc.source_cls *= f;
    acc.target_cls *= f;
    acc.domain *= f;
    acc.cluster *= f;
    acc.balance *= f;
    acc.total *= f;
}

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& source, const Dataset* target,
                  std::span<const Dataset> eval_sets, const EpochObserver& on_epoch) {
    config.validate();
    source.validate();
    if (!source.labels) throw std::invalid_argument("train: the source dataset needs labels");
    if (source.size() == 0) throw std::invalid_argument("train: the source dataset is empty");
    const ModeTerms terms = terms_for(config.mode);
    if (terms.target) {
        if (target == nullptr || target->size() == 0) {
            throw std::invalid_argument("train: mode " + std::string(to_string(config.mode)) +
                                        " needs target training data");
        }
        if (target->dim() != source.dim()) {
            throw std::invalid_argument("train: source has " + std::to_string(source.dim()) +
                                        " features, target has " + std::to_string(target->dim()));
        }
    }

    TrainState state(DcdaModel::create(config.arch(source.dim()), config.seed), config);
    std::mt19937_64 rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
    const std::vector<int>& source_labels = *source.labels;

    TrainResult result;
    TrainReport& report = result.report;

    auto draw_source = [&] {
        const auto si = draw_indices(rng, source.size(), config.batch_size);
        Batch sb{source.features.gather_rows(si), {}};
        sb.labels.reserve(si.size());
        for (auto i : si) sb.labels.push_back(source_labels[i]);
        return sb;
    };

    ClusterState& clusters = result.cluster_state;
    if (terms.cluster) {
        clusters = init_cluster_state(embed(state.model(), source.features), source_labels,
                                      embed(state.model(), target->features), config.kmeans_options());
        state.model().centroids = clusters.centroids;
    }

    // source_only never looks at the target, not even for its size.
    const std::size_t n_max = terms.target ? std::max(source.size(), target->size()) : source.size();
    const std::size_t iters =
        config.iters_per_epoch > 0 ? config.iters_per_epoch : (n_max + config.batch_size - 1) / config.batch_size;
    const double total_steps = static_cast<double>(config.epochs * iters);

    report.config = config;
    report.iters_per_epoch = iters;
    report.kernels = kernels::active().name;

    std::size_t step_index = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        EpochRecord rec;
        for (std::size_t it = 0; it < iters; ++it, ++step_index) {
            const double lambda =
                lambda_schedule(static_cast<double>(step_index) / total_steps, config.gamma, config.max_lambda);
            rec.lambda = lambda;

            Batch sb = draw_source();
            Batch tb;
            if (terms.target) {
                const auto ti = draw_indices(rng, target->size(), config.batch_size);
                tb.features = target->features.gather_rows(ti);
                if (terms.cluster) {
                    for (auto i : ti) tb.labels.push_back(clusters.pseudo_labels[i]);
                }
            }
            try {
                accumulate(rec.mean, state.step(sb, tb, lambda));
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("epoch " + std::to_string(epoch) + ", step " + std::to_string(it) + ": " +
                                         e.what());
            }
        }
        scale(rec.mean, 1.0 / static_cast<double>(iters));

        if (terms.cluster) {
            const Matrix zt = embed(state.model(), target->features);
            std::vector<int> fresh;
            if (config.reinit_kmeans_each_epoch) {
                ClusterState re = init_cluster_state(embed(state.model(), source.features), source_labels, zt,
                                                     config.kmeans_options());
                state.model().centroids = re.centroids;
                fresh = std::move(re.pseudo_labels);
            } else {
                fresh = update_pseudo_labels(zt, state.model().centroids);
            }
            for (std::size_t i = 0; i < fresh.size(); ++i) {
                rec.pseudo_label_flips += fresh[i] != clusters.pseudo_labels[i] ? 1 : 0;
            }
            clusters.pseudo_labels = std::move(fresh);
            clusters.centroids = state.model().centroids;
            clusters.last_update_epoch = epoch + 1;
        }
        report.epochs.push_back(rec);
        if (on_epoch) on_epoch(epoch, state.model(), clusters);
    }

    for (const Dataset& ds : eval_sets) {
        if (!ds.labels) continue;
        const auto preds = classify_at_threshold(classify_probs(state.model(), ds.features), 0.5);
        report.final_metrics.push_back({ds.name, compute_metrics(preds, *ds.labels, 0.5)});
    }
    result.model = std::move(state.model());
    return result;
}

void TrainReport::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "# dcda training report\n";
    out << config.to_document().render();
    out << "effective_iters_per_epoch = " << iters_per_epoch << "\n";
    out << "kernels = " << kernels << "\n";
    out << "\n[epochs]\n";
    out << "epoch,lambda,source_cls,target_cls,domain,cluster,balance,total,pseudo_label_flips\n";
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const EpochRecord& r = epochs[e];
        out << e << ',' << text::format_double(r.lambda) << ',' << text::format_double(r.mean.source_cls) << ','
            << text::format_double(r.mean.target_cls) << ',' << text::format_double(r.mean.domain) << ','
            << text::format_double(r.mean.cluster) << ',' << text::format_double(r.mean.balance) << ','
            << text::format_double(r.mean.total) << ',' << r.pseudo_label_flips << '\n';
    }
    out << "\n[metrics]\n";
    out << "split,apcer,bpcer,acer,hter,accuracy,threshold\n";
    for (const SplitMetrics& m : final_metrics) {
        out << m.name << ',' << text::format_double(m.metrics.apcer) << ',' << text::format_double(m.metrics.bpcer)
            << ',' << text::format_double(m.metrics.acer) << ',' << text::format_double(m.metrics.hter) << ','
            << text::format_double(m.metrics.accuracy) << ',' << text::format_double(m.metrics.threshold) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Ablation

double AblationResult::mean_acer(TrainMode mode) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells) {
        if (c.mode == mode) {
            sum += c.target_acer;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

std::string AblationResult::table() const {
    std::vector<std::uint64_t> seeds;
    for (const auto& c : cells) {
        if (std::find(seeds.begin(), seeds.end(), c.seed) == seeds.end()) seeds.push_back(c.seed);
    }
    std::ostringstream out;
    out << std::left << std::setw(22) << "mode";
    for (auto s : seeds) out << std::right << std::setw(9) << ("s" + std::to_string(s));
    out << std::right << std::setw(10) << "mean" << "\n";
    out << std::fixed << std::setprecision(2);
    for (TrainMode m : kAllModes) {
        out << std::left << std::setw(22) << to_string(m);
        for (auto s : seeds) {
            double v = 0.0;
            for (const auto& c : cells) {
                if (c.mode == m && c.seed == s) v = c.target_acer;
            }
            out << std::right << std::setw(9) << 100.0 * v;
        }
        out << std::right << std::setw(10) << 100.0 * mean_acer(m) << "\n";
    }
    out << "(target-test ACER % at threshold 0.5)\n";
    return out.str();
}

AblationResult run_ablation(const TrainConfig& base, const BenchmarkConfig& bench, std::uint64_t base_seed,
                            std::size_t n_seeds, std::size_t jobs, const AblationObserver& on_run) {
    AblationResult result;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        for (TrainMode m : kAllModes) result.cells.push_back({m, base_seed + s, 0.0});
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(result.cells.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) {
            AblationCell& cell = result.cells[i];
            try {
                const Benchmark b = make_moons_benchmark(cell.seed * 10, bench);
                TrainConfig cfg = base;
                cfg.mode = cell.mode;
                cfg.seed = cell.seed;
                const Dataset eval[] = {b.target_test};
                const TrainResult r = train(cfg, b.source_train, &b.target_train, eval);
                cell.target_acer = r.report.final_metrics.front().metrics.acer;
                if (on_run) on_run(cell, r);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, result.cells.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("ablation " + std::string(to_string(result.cells[i].mode)) + " seed " +
                                     std::to_string(result.cells[i].seed) + ": " + errors[i]);
        }
    }
    return result;
}

}  // namespace dcda
