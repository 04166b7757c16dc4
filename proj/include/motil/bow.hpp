#ifndef MOTIL_BOW_HPP
#define MOTIL_BOW_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace motil {

// Random-subset codebook in standardized feature space, with smoothed idf
// weights fitted on the training samples.
struct Codebook {
    int dim = 0;
    std::uint64_t seed = 0;
    std::vector<double> means;
    std::vector<double> stds; // zero-variance dimensions get std 1
    std::vector<double> idf;
    std::vector<std::vector<double>> vectors; // standardized space

    int size() const { return static_cast<int>(vectors.size()); }
};

struct BowHistogram {
    std::string video_id;
    std::vector<int> counts;      // pre-tf-idf; sums to assign x #vectors
    std::vector<double> weighted; // tf-idf, L2-normalized
};

// Builds a codebook of n vectors sampled uniformly without replacement
// (with replacement only when fewer than n training vectors exist) from the
// pooled, standardized training vectors. idf(b) = ln((1+D)/(1+df(b))) + 1
// over the D training samples, with assignments counted at idf_assign
// nearest vectors per input (use the same value encode will run with).
Codebook build_codebook(const std::vector<std::vector<std::vector<double>>>& samples,
                        int n, std::uint64_t seed, int idf_assign = 1);

// Standardizes each vector, increments the bins of its `assign` nearest
// codebook vectors (Euclidean; ties at the boundary go to the lower bin
// index), then applies tf-idf and L2 normalization.
BowHistogram encode(const std::vector<std::vector<double>>& sample_vectors,
                    const Codebook& codebook, int assign);

} // namespace motil

#endif
