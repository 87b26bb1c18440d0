#include "dcda/model.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dcda/text.hpp"

namespace dcda {

namespace {

constexpr const char* kMagic = "dcda-model";
constexpr int kFormatVersion = 1;

LayerStack make_stack(std::size_t in, std::span<const std::size_t> hidden, std::size_t out, Activation hidden_act,
                      Activation last_act, std::mt19937_64& rng) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    std::vector<Activation> acts(dims.size() - 1, hidden_act);
    acts.back() = last_act;
    return LayerStack::glorot(dims, acts, rng);
}

void write_values(std::ostream& out, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ' ';
        out << text::format_double(values[i]);
    }
    out << '\n';
}

void write_stack(std::ostream& out, const char* name, const LayerStack& stack) {
    out << "stack " << name << ' ' << stack.depth() << '\n';
    for (const Layer& l : stack.layers()) {
        out << "layer " << l.in_dim() << ' ' << l.out_dim() << ' ' << to_string(l.activation) << '\n';
        for (std::size_t r = 0; r < l.weight.rows(); ++r) write_values(out, l.weight.row(r));
        write_values(out, l.bias);
    }
}

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string next(const char* what) {
        std::string tok;
        if (!(in_ >> tok)) throw std::runtime_error(std::string("model file: unexpected end while reading ") + what);
        return tok;
    }

    void expect(const std::string& word) {
        const std::string tok = next(word.c_str());
        if (tok != word) throw std::runtime_error("model file: expected '" + word + "', found '" + tok + "'");
    }

    std::size_t count(const char* what) {
        const std::string tok = next(what);
        const auto v = text::parse_int(tok);
        if (!v || *v < 0) throw std::runtime_error(std::string("model file: bad ") + what + " '" + tok + "'");
        return static_cast<std::size_t>(*v);
    }

    double real(const char* what) {
        const std::string tok = next(what);
        const auto v = text::parse_double(tok);
        if (!v) throw std::runtime_error(std::string("model file: bad number in ") + what + " '" + tok + "'");
        return *v;
    }

private:
    std::istream& in_;
};

LayerStack read_stack(TokenReader& rd, const std::string& name) {
    rd.expect("stack");
    rd.expect(name);
    const std::size_t depth = rd.count("layer count");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < depth; ++i) {
        rd.expect("layer");
        const std::size_t in = rd.count("layer input dim");
        const std::size_t out = rd.count("layer output dim");
        Layer l{Matrix(in, out), std::vector<double>(out), activation_from_string(rd.next("activation"))};
        for (double& v : l.weight.values()) v = rd.real("weight");
        for (double& v : l.bias) v = rd.real("bias");
        layers.push_back(std::move(l));
    }
    return LayerStack(std::move(layers));
}

}  // namespace

DcdaModel DcdaModel::create(const ModelArch& arch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DcdaModel m;
    m.feature_extractor = make_stack(arch.input_dim, arch.feature_hidden, arch.embed_dim, Activation::relu,
                                     Activation::identity, rng);
    m.classifier = make_stack(arch.embed_dim, {}, kNumClasses, Activation::relu, Activation::softmax, rng);
    m.discriminator = make_stack(arch.embed_dim, arch.discriminator_hidden, 2, Activation::relu,
                                 Activation::softmax, rng);
    m.centroids = Matrix(kNumClasses, arch.embed_dim);
    return m;
}

void DcdaModel::validate() const {
    const std::size_t h = feature_extractor.out_dim();
    if (classifier.in_dim() != h || discriminator.in_dim() != h) {
        throw std::invalid_argument("model: classifier/discriminator input must equal embedding dim " +
                                    std::to_string(h));
    }
    if (classifier.out_dim() != kNumClasses || discriminator.out_dim() != 2) {
        throw std::invalid_argument("model: classifier and discriminator must output 2 probabilities");
    }
    if (classifier.layers().back().activation != Activation::softmax ||
        discriminator.layers().back().activation != Activation::softmax) {
        throw std::invalid_argument("model: classifier and discriminator must end in softmax");
    }
    if (centroids.rows() != kNumClasses || centroids.cols() != h) {
        throw std::invalid_argument("model: centroids are " + centroids.shape_string() + ", expected 2x" +
                                    std::to_string(h));
    }
}

Matrix embed(const DcdaModel& model, const Matrix& features) {
    return forward(model.feature_extractor, features).output;
}

Matrix classify_probs(const DcdaModel& model, const Matrix& features) {
    return forward(model.classifier, embed(model, features)).output;
}

DomainForward discriminate_probs(const DcdaModel& model, const Matrix& embeddings, double /*lambda*/) {
    auto fwd = forward(model.discriminator, embeddings);
    return {std::move(fwd.output), std::move(fwd.tape)};
}

DomainBackward discriminate_backward(const DcdaModel& model, const DomainForward& fwd, const Matrix& grad_probs,
                                     double lambda) {
    auto bwd = backward(model.discriminator, fwd.tape, grad_probs);
    Matrix reversed = grad_reverse(bwd.input_grad, lambda);
    return {std::move(bwd), std::move(reversed)};
}

void save_model(const DcdaModel& model, std::ostream& out) {
    out << kMagic << ' ' << kFormatVersion << '\n';
    write_stack(out, "feature_extractor", model.feature_extractor);
    write_stack(out, "classifier", model.classifier);
    write_stack(out, "discriminator", model.discriminator);
    out << "centroids " << model.centroids.rows() << ' ' << model.centroids.cols() << '\n';
    for (std::size_t r = 0; r < model.centroids.rows(); ++r) write_values(out, model.centroids.row(r));
    out << "end\n";
}

DcdaModel load_model(std::istream& in) {
    TokenReader rd(in);
    rd.expect(kMagic);
    const std::size_t version = rd.count("format version");
    if (version != kFormatVersion) {
        throw std::runtime_error("model file: unsupported format version " + std::to_string(version));
    }
    DcdaModel m;
    m.feature_extractor = read_stack(rd, "feature_extractor");
    m.classifier = read_stack(rd, "classifier");
    m.discriminator = read_stack(rd, "discriminator");
    rd.expect("centroids");
    const std::size_t rows = rd.count("centroid rows");
    const std::size_t cols = rd.count("centroid cols");
    m.centroids = Matrix(rows, cols);
    for (double& v : m.centroids.values()) v = rd.real("centroids");
    rd.expect("end");
    m.validate();
    return m;
}

void save_model_file(const DcdaModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    save_model(model, out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

DcdaModel load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    return load_model(in);
}

}  // namespace dcda
