#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dcda/matrix.hpp"
#include "dcda/nn.hpp"

namespace dcda {

inline constexpr std::size_t kNumClasses = 2;  // bona-fide, attack

struct ModelArch {
    std::size_t input_dim = 2;
    std::vector<std::size_t> feature_hidden{64, 32};
    std::size_t embed_dim = 16;
    std::vector<std::size_t> discriminator_hidden{32};
};

// Feature extractor F, classifier C, domain discriminator D and one
// learnable centroid per class (row 0 bona-fide, row 1 attack).
struct DcdaModel {
    LayerStack feature_extractor;
    LayerStack classifier;
    LayerStack discriminator;
    Matrix centroids;

    static DcdaModel create(const ModelArch& arch, std::uint64_t seed);

    std::size_t input_dim() const { return feature_extractor.in_dim(); }
    std::size_t embed_dim() const { return feature_extractor.out_dim(); }

    // Throws if the pieces do not fit together.
    void validate() const;

    friend bool operator==(const DcdaModel&, const DcdaModel&) = default;
};

Matrix embed(const DcdaModel& model, const Matrix& features);
Matrix classify_probs(const DcdaModel& model, const Matrix& features);

// Domain probabilities D(GRL(z)). The reverse layer is the identity going
// forward, so lambda does not affect the value; it only scales the
// gradient returned by discriminate_backward.
struct DomainForward {
    Matrix probs;
    Tape tape;
};
DomainForward discriminate_probs(const DcdaModel& model, const Matrix& embeddings, double lambda);

struct DomainBackward {
    BackwardResult discriminator;  // gradients for D's parameters
    Matrix embedding_grad;         // already reversed: -lambda * dL/dz
};
DomainBackward discriminate_backward(const DcdaModel& model, const DomainForward& fwd, const Matrix& grad_probs,
                                     double lambda);

// Text parameter file. Values are written with 17 significant digits so a
// save/load cycle reproduces every double exactly.
void save_model(const DcdaModel& model, std::ostream& out);
DcdaModel load_model(std::istream& in);
void save_model_file(const DcdaModel& model, const std::filesystem::path& path);
DcdaModel load_model_file(const std::filesystem::path& path);

}  // namespace dcda
