#include "dcda/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dcda/clustering.hpp"
#include "dcda/model.hpp"
#include "dcda/text.hpp"

namespace dcda {

std::vector<int> classify_at_threshold(const Matrix& probs, double threshold) {
    if (probs.cols() != 2) throw std::invalid_argument("classify_at_threshold: expected N x 2 probabilities");
    std::vector<int> out(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) out[i] = probs(i, 1) >= threshold ? 1 : 0;
    return out;
}

MetricsReport compute_metrics(std::span<const int> predictions, std::span<const int> labels, double threshold) {
    if (labels.empty()) throw std::invalid_argument("compute_metrics: labels are required");
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("compute_metrics: " + std::to_string(predictions.size()) + " predictions for " +
                                    std::to_string(labels.size()) + " labels");
    }
    MetricsReport m;
    m.threshold = threshold;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        const int p = predictions[i];
        if ((y != 0 && y != 1) || (p != 0 && p != 1)) {
            throw std::invalid_argument("compute_metrics: non-binary value at row " + std::to_string(i));
        }
        if (y == 1) {
            (p == 1 ? m.counts.tp : m.counts.fn) += 1;
        } else {
            (p == 1 ? m.counts.fp : m.counts.tn) += 1;
        }
    }
    const std::size_t attacks = m.counts.tp + m.counts.fn;
    const std::size_t bona_fide = m.counts.tn + m.counts.fp;
    m.no_attacks = attacks == 0;
    m.no_bona_fide = bona_fide == 0;
    m.apcer = m.no_attacks ? 0.0 : static_cast<double>(m.counts.fn) / static_cast<double>(attacks);
    m.bpcer = m.no_bona_fide ? 0.0 : static_cast<double>(m.counts.fp) / static_cast<double>(bona_fide);
    m.acer = (m.apcer + m.bpcer) / 2.0;
    m.hter = (m.apcer + m.bpcer) / 2.0;
    m.accuracy = static_cast<double>(m.counts.tp + m.counts.tn) / static_cast<double>(labels.size());
    return m;
}

std::string format_metrics(const MetricsReport& m) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << "threshold  " << m.threshold << "\n";
    out << "APCER      " << 100.0 * m.apcer << " %" << (m.no_attacks ? "  (no attack samples)" : "") << "\n";
    out << "BPCER      " << 100.0 * m.bpcer << " %" << (m.no_bona_fide ? "  (no bona-fide samples)" : "") << "\n";
    out << "ACER       " << 100.0 * m.acer << " %\n";
    out << "HTER       " << 100.0 * m.hter << " %  (fixed threshold, equals ACER)\n";
    out << "accuracy   " << 100.0 * m.accuracy << " %\n";
    out << "counts     tp=" << m.counts.tp << " tn=" << m.counts.tn << " fp=" << m.counts.fp << " fn=" << m.counts.fn
        << "\n";
    return out.str();
}

KeyValueDoc metrics_document(const MetricsReport& m) {
    KeyValueDoc doc;
    doc.set("apcer", text::format_double(m.apcer));
    doc.set("bpcer", text::format_double(m.bpcer));
    doc.set("acer", text::format_double(m.acer));
    doc.set("hter", text::format_double(m.hter));
    doc.set("hter_protocol", "fixed_threshold");
    doc.set("accuracy", text::format_double(m.accuracy));
    doc.set("threshold", text::format_double(m.threshold));
    doc.set("tp", std::to_string(m.counts.tp));
    doc.set("tn", std::to_string(m.counts.tn));
    doc.set("fp", std::to_string(m.counts.fp));
    doc.set("fn", std::to_string(m.counts.fn));
    doc.set("no_attacks", m.no_attacks ? "true" : "false");
    doc.set("no_bona_fide", m.no_bona_fide ? "true" : "false");
    return doc;
}

PcaResult pca(const Matrix& points, std::size_t n_components) {
    const std::size_t n = points.rows();
    const std::size_t h = points.cols();
    if (n == 0 || h == 0) throw std::invalid_argument("pca: empty input");
    n_components = std::min(n_components, h);

    PcaResult res;
    res.mean.assign(h, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < h; ++t) res.mean[t] += points(i, t);
    }
    for (double& v : res.mean) v /= static_cast<double>(n);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(h));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < h; ++a) {
            const double da = points(i, a) - res.mean[a];
            for (std::size_t b = 0; b < h; ++b) {
                cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += da * (points(i, b) - res.mean[b]);
            }
        }
    }
    cov /= static_cast<double>(std::max<std::size_t>(n - 1, 1));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigen-decomposition failed");
    // Eigen sorts ascending; take the largest first.
    res.components = Matrix(n_components, h);
    for (std::size_t c = 0; c < n_components; ++c) {
        const auto col = static_cast<Eigen::Index>(h - 1 - c);
        res.explained_variance.push_back(solver.eigenvalues()(col));
        std::size_t arg = 0;
        for (std::size_t t = 1; t < h; ++t) {
            if (std::abs(solver.eigenvectors()(static_cast<Eigen::Index>(t), col)) >
                std::abs(solver.eigenvectors()(static_cast<Eigen::Index>(arg), col))) {
                arg = t;
            }
        }
        const double sign = solver.eigenvectors()(static_cast<Eigen::Index>(arg), col) < 0.0 ? -1.0 : 1.0;
        for (std::size_t t = 0; t < h; ++t) {
            res.components(c, t) = sign * solver.eigenvectors()(static_cast<Eigen::Index>(t), col);
        }
    }
    res.projection = Matrix(n, n_components);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < n_components; ++c) {
            double s = 0.0;
            for (std::size_t t = 0; t < h; ++t) s += (points(i, t) - res.mean[t]) * res.components(c, t);
            res.projection(i, c) = s;
        }
    }
    return res;
}

ExportedFiles export_embeddings(const DcdaModel& model, std::span<const Dataset> datasets,
                                const std::filesystem::path& path) {
    Matrix all;
    std::vector<std::string> domain, split;
    std::vector<int> label;
    for (const Dataset& ds : datasets) {
        Matrix z = embed(model, ds.features);
        const std::vector<int> labels = ds.labels ? *ds.labels : update_pseudo_labels(z, model.centroids);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            domain.emplace_back(to_string(ds.domain));
            split.emplace_back(to_string(ds.split));
            label.push_back(labels[i]);
        }
        all = Matrix::vstack(all, z);
    }

    ExportedFiles files;
    files.embeddings = path;
    files.projection = path.parent_path() / (path.stem().string() + "_pca.csv");
    files.rows = all.rows();

    {
        std::ofstream out(files.embeddings);
        if (!out) throw std::runtime_error("export_embeddings: cannot open " + files.embeddings.string());
        for (std::size_t t = 0; t < model.embed_dim(); ++t) out << 'f' << t << ',';
        out << "domain,label,split\n";
        for (std::size_t i = 0; i < all.rows(); ++i) {
            for (double v : all.row(i)) out << text::format_double(v) << ',';
            out << domain[i] << ',' << label[i] << ',' << split[i] << '\n';
        }
        if (!out) throw std::runtime_error("export_embeddings: failed writing " + files.embeddings.string());
    }
    {
        std::ofstream out(files.projection);
        if (!out) throw std::runtime_error("export_embeddings: cannot open " + files.projection.string());
        const PcaResult proj = all.rows() > 0 ? pca(all, 2) : PcaResult{};
        for (std::size_t c = 0; c < proj.projection.cols(); ++c) out << "pc" << c << ',';
        out << "domain,label,split\n";
        for (std::size_t i = 0; i < proj.projection.rows(); ++i) {
            for (double v : proj.projection.row(i)) out << text::format_double(v) << ',';
            out << domain[i] << ',' << label[i] << ',' << split[i] << '\n';
        }
        if (!out) throw std::runtime_error("export_embeddings: failed writing " + files.projection.string());
    }
    return files;
}

}  // namespace dcda
