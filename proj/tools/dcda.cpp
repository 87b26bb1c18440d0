#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "dcda/data.hpp"
#include "dcda/manifest.hpp"
#include "dcda/metrics.hpp"
#include "dcda/model.hpp"
#include "dcda/text.hpp"
#include "dcda/trainer.hpp"

namespace fs = std::filesystem;
using namespace dcda;

namespace {

// One string slot per TrainConfig key, so every key is also a flag.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "key = value file; flags override it")->check(CLI::ExistingFile);
        const KeyValueDoc defaults = TrainConfig{}.to_document();
        for (const auto& [key, def] : defaults.entries()) {
            options[key] = app.add_option("--" + key, values[key], "default " + def);
        }
    }

    TrainConfig resolve() const {
        TrainConfig cfg;
        if (!config_file.empty()) cfg.apply(KeyValueDoc::read(config_file));
        for (const auto& [key, opt] : options) {
            if (opt->count() > 0) cfg.set(key, values.at(key));
        }
        cfg.validate();
        return cfg;
    }
};

Dataset load_tagged(const fs::path& path, Domain domain, Split split) {
    Dataset ds = load_csv(path);
    ds.domain = domain;
    ds.split = split;
    return ds;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

// --- gen ---------------------------------------------------------------------

struct GenArgs {
    fs::path out;
    std::uint64_t seed = 0;
    BenchmarkConfig bench;
    std::string translation = "0.3,-0.1";
};

void run_gen(const GenArgs& a) {
    BenchmarkConfig bench = a.bench;
    bench.translation.clear();
    for (auto part : text::split(a.translation, ',')) {
        const auto v = text::parse_double(text::trim(part));
        if (!v) throw std::invalid_argument("--translation: not a number: '" + std::string(part) + "'");
        bench.translation.push_back(*v);
    }
    fs::create_directories(a.out);
    const Benchmark b = make_moons_benchmark(a.seed, bench);
    RunManifest m("gen");
    m.set("seed", std::to_string(a.seed));
    m.set("bench.n_per_class", std::to_string(bench.n_per_class));
    m.set("bench.noise_std", text::format_double(bench.noise_std));
    m.set("bench.rotation_deg", text::format_double(bench.rotation_deg));
    m.set("bench.translation", a.translation);
    m.set("bench.scale", text::format_double(bench.scale));
    m.set("bench.shift_noise_std", text::format_double(bench.shift_noise_std));
    for (const Dataset* ds : {&b.source_train, &b.target_train, &b.target_test}) {
        const fs::path p = a.out / (ds->name + ".csv");
        save_csv(*ds, p);
        m.add_output(ds->name, p);
    }
    m.write(a.out / "manifest.txt");
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
    ConfigFlags flags;
    fs::path source, target, out;
    std::vector<fs::path> eval;
};

void run_train(const TrainArgs& a) {
    const TrainConfig cfg = a.flags.resolve();
    RunManifest m("train");
    const Dataset source = load_tagged(a.source, Domain::source, Split::train);
    m.add_input("source", a.source);

    std::optional<Dataset> target;
    if (!a.target.empty()) {
        if (cfg.mode == TrainMode::source_only) {
            std::cerr << "dcda: note: mode source_only does not read the target file\n";
        } else {
            target = load_tagged(a.target, Domain::target, Split::train);
            m.add_input("target", a.target);
        }
    }
    std::vector<Dataset> eval;
    for (std::size_t i = 0; i < a.eval.size(); ++i) {
        eval.push_back(load_tagged(a.eval[i], Domain::target, Split::test));
        if (!eval.back().labels) throw std::invalid_argument(a.eval[i].string() + ": evaluation data needs a label column");
        m.add_input("eval" + std::to_string(i), a.eval[i]);
    }

    const TrainResult r = train(cfg, source, target ? &*target : nullptr, eval);

    fs::create_directories(a.out);
    m.set("seed", std::to_string(cfg.seed));
    m.add_config(cfg.to_document());
    save_model_file(r.model, a.out / "model.txt");
    r.report.write(a.out / "report.txt");
    m.add_output("model", a.out / "model.txt");
    m.add_output("report", a.out / "report.txt");
    m.write(a.out / "manifest.txt");
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
    fs::path model, data, out;
    double threshold = 0.5;
    std::string domain = "target";
    std::string split = "test";
    bool export_embeddings = false;
};

Domain parse_domain(const std::string& s) {
    if (s == "source") return Domain::source;
    if (s == "target") return Domain::target;
    throw std::invalid_argument("unknown domain '" + s + "' (expected source or target)");
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split '" + s + "' (expected train or test)");
}

void run_eval(const EvalArgs& a) {
    const DcdaModel model = load_model_file(a.model);
    const Dataset ds = load_tagged(a.data, parse_domain(a.domain), parse_split(a.split));
    if (!ds.labels) throw std::invalid_argument(a.data.string() + ": evaluation data needs a label column");
    if (ds.dim() != model.input_dim()) {
        throw std::invalid_argument(a.data.string() + ": " + std::to_string(ds.dim()) + " features, model expects " +
                                    std::to_string(model.input_dim()));
    }
    const auto preds = classify_at_threshold(classify_probs(model, ds.features), a.threshold);
    const MetricsReport report = compute_metrics(preds, *ds.labels, a.threshold);

    fs::create_directories(a.out);
    RunManifest m("eval");
    m.add_input("model", a.model);
    m.add_input("data", a.data);
    m.set("threshold", text::format_double(a.threshold));
    metrics_document(report).write(a.out / "metrics.kv");
    write_text(a.out / "metrics.txt", format_metrics(report));
    m.add_output("metrics", a.out / "metrics.kv");
    m.add_output("metrics_text", a.out / "metrics.txt");
    if (a.export_embeddings) {
        const Dataset sets[] = {ds};
        const ExportedFiles files = export_embeddings(model, sets, a.out / "embeddings.csv");
        m.add_output("embeddings", files.embeddings);
        m.add_output("embeddings_pca", files.projection);
    }
    m.write(a.out / "manifest.txt");
}

// --- export-embeddings ---------------------------------------------------------

struct ExportArgs {
    fs::path model, source, target, target_test, out;
};

void run_export(const ExportArgs& a) {
    if (a.source.empty() && a.target.empty() && a.target_test.empty()) {
        throw std::invalid_argument("export-embeddings: give at least one of --source, --target, --target-test");
    }
    const DcdaModel model = load_model_file(a.model);
    RunManifest m("export-embeddings");
    m.add_input("model", a.model);
    std::vector<Dataset> sets;
    auto add = [&](const fs::path& p, Domain d, Split s, const char* role) {
        if (p.empty()) return;
        sets.push_back(load_tagged(p, d, s));
        if (sets.back().dim() != model.input_dim()) {
            throw std::invalid_argument(p.string() + ": " + std::to_string(sets.back().dim()) +
                                        " features, model expects " + std::to_string(model.input_dim()));
        }
        m.add_input(role, p);
    };
    add(a.source, Domain::source, Split::train, "source");
    add(a.target, Domain::target, Split::train, "target");
    add(a.target_test, Domain::target, Split::test, "target_test");

    fs::create_directories(a.out);
    const ExportedFiles files = export_embeddings(model, sets, a.out / "embeddings.csv");
    m.add_output("embeddings", files.embeddings);
    m.add_output("embeddings_pca", files.projection);
    m.write(a.out / "manifest.txt");
}

// --- ablate ------------------------------------------------------------------

struct AblateArgs {
    ConfigFlags flags;
    fs::path out;
    std::uint64_t base_seed = 0;
    std::size_t seeds = 5;
    std::size_t jobs = 1;
};

void run_ablate(const AblateArgs& a) {
    const TrainConfig cfg = a.flags.resolve();
    fs::create_directories(a.out);
    std::mutex mu;
    std::map<std::string, fs::path> written;
    const AblationResult res =
        run_ablation(cfg, {}, a.base_seed, a.seeds, a.jobs, [&](const AblationCell& cell, const TrainResult& r) {
            const std::string tag = std::string(to_string(cell.mode)) + ".seed" + std::to_string(cell.seed);
            const fs::path dir = a.out / std::string(to_string(cell.mode)) / ("seed" + std::to_string(cell.seed));
            fs::create_directories(dir);
            save_model_file(r.model, dir / "model.txt");
            r.report.write(dir / "report.txt");
            std::lock_guard lock(mu);
            written[tag + ".model"] = dir / "model.txt";
            written[tag + ".report"] = dir / "report.txt";
        });

    const std::string table = res.table();
    write_text(a.out / "ablation.txt", table);
    KeyValueDoc cells;
    for (const AblationCell& c : res.cells) {
        cells.set(std::string(to_string(c.mode)) + ".seed" + std::to_string(c.seed), text::format_double(c.target_acer));
    }
    for (TrainMode mode : kAllModes) cells.set(std::string(to_string(mode)) + ".mean", text::format_double(res.mean_acer(mode)));
    cells.write(a.out / "ablation.kv");

    RunManifest m("ablate");
    m.set("base_seed", std::to_string(a.base_seed));
    m.set("seeds", std::to_string(a.seeds));
    m.add_config(cfg.to_document());
    m.add_output("table", a.out / "ablation.txt");
    m.add_output("cells", a.out / "ablation.kv");
    for (const auto& [role, path] : written) m.add_output(role, path);
    m.write(a.out / "manifest.txt");
    std::cout << table;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering-guided unsupervised domain adaptation for presentation attack detection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kEngineVersion));

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "write the shifted two-moons benchmark");
    g->add_option("--out", gen.out, "output directory")->required();
    g->add_option("--seed", gen.seed, "generator seed");
    g->add_option("--n-per-class", gen.bench.n_per_class, "samples per class")->check(CLI::PositiveNumber);
    g->add_option("--noise", gen.bench.noise_std, "moons noise std")->check(CLI::NonNegativeNumber);
    g->add_option("--rotation", gen.bench.rotation_deg, "target rotation, degrees");
    g->add_option("--translation", gen.translation, "target translation, comma separated");
    g->add_option("--scale", gen.bench.scale, "target scale");
    g->add_option("--shift-noise", gen.bench.shift_noise_std, "extra target noise std")->check(CLI::NonNegativeNumber);

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train one model");
    t->add_option("--source", tr.source, "labelled source CSV")->required()->check(CLI::ExistingFile);
    t->add_option("--target", tr.target, "target training CSV (labels ignored)");
    t->add_option("--eval", tr.eval, "labelled CSVs scored after training")->check(CLI::ExistingFile);
    t->add_option("--out", tr.out, "output directory")->required();
    tr.flags.attach(*t);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "score a model on labelled data");
    e->add_option("--model", ev.model, "model file")->required()->check(CLI::ExistingFile);
    e->add_option("--data", ev.data, "labelled CSV")->required()->check(CLI::ExistingFile);
    e->add_option("--out", ev.out, "output directory")->required();
    e->add_option("--threshold", ev.threshold, "attack probability threshold");
    e->add_option("--domain", ev.domain, "source or target (export tag)");
    e->add_option("--split", ev.split, "train or test (export tag)");
    e->add_flag("--export-embeddings", ev.export_embeddings, "also write embeddings.csv and its PCA projection");

    ExportArgs ex;
    auto* x = app.add_subcommand("export-embeddings", "write embeddings and a 2-D PCA projection");
    x->add_option("--model", ex.model, "model file")->required()->check(CLI::ExistingFile);
    x->add_option("--source", ex.source, "source CSV")->check(CLI::ExistingFile);
    x->add_option("--target", ex.target, "target training CSV")->check(CLI::ExistingFile);
    x->add_option("--target-test", ex.target_test, "target test CSV")->check(CLI::ExistingFile);
    x->add_option("--out", ex.out, "output directory")->required();

    AblateArgs ab;
    auto* a = app.add_subcommand("ablate", "run all four modes over several seeds");
    a->add_option("--out", ab.out, "output directory")->required();
    a->add_option("--base-seed", ab.base_seed, "first seed");
    a->add_option("--seeds", ab.seeds, "number of seeds")->check(CLI::PositiveNumber);
    a->add_option("--jobs", ab.jobs, "worker threads")->check(CLI::PositiveNumber);
    ab.flags.attach(*a);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*g) run_gen(gen);
        if (*t) run_train(tr);
        if (*e) run_eval(ev);
        if (*x) run_export(ex);
        if (*a) run_ablate(ab);
    } catch (const std::exception& err) {
        std::cerr << "dcda: error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
