#include "motil/bow.hpp"

#include <algorithm>
#include <cmath>

#include "motil/errors.hpp"
#include "motil/rng.hpp"

namespace motil {

namespace {

std::vector<double> standardize(const std::vector<double>& v, const Codebook& cb) {
    std::vector<double> out(v.size());
    for (std::size_t d = 0; d < v.size(); ++d) out[d] = (v[d] - cb.means[d]) / cb.stds[d];
    return out;
}

// Bin indices of the `assign` nearest codebook vectors.
std::vector<int> nearest_bins(const std::vector<double>& q, const Codebook& cb,
                              int assign) {
    std::vector<std::pair<double, int>> dist;
    dist.reserve(cb.vectors.size());
    for (std::size_t b = 0; b < cb.vectors.size(); ++b) {
        const auto& ref = cb.vectors[b];
        double d2 = 0.0;
        for (std::size_t d = 0; d < ref.size(); ++d) {
            const double diff = q[d] - ref[d];
            d2 += diff * diff;
        }
        dist.emplace_back(d2, static_cast<int>(b));
    }
    const auto mid = dist.begin() + assign;
    std::partial_sort(dist.begin(), mid, dist.end());
    std::vector<int> bins;
    bins.reserve(static_cast<std::size_t>(assign));
    for (auto it = dist.begin(); it != mid; ++it) bins.push_back(it->second);
    return bins;
}

std::vector<int> count_bins(const std::vector<std::vector<double>>& vectors,
                            const Codebook& cb, int assign) {
    std::vector<int> counts(static_cast<std::size_t>(cb.size()), 0);
    for (const auto& v : vectors) {
        if (static_cast<int>(v.size()) != cb.dim)
            throw EncodeError("vector dimension " + std::to_string(v.size()) +
                              " does not match codebook dimension " +
                              std::to_string(cb.dim));
        for (int b : nearest_bins(standardize(v, cb), cb, assign))
            counts[static_cast<std::size_t>(b)] += 1;
    }
    return counts;
}

} // namespace

Codebook build_codebook(const std::vector<std::vector<std::vector<double>>>& samples,
                        int n, std::uint64_t seed, int idf_assign) {
    if (n < 1) throw BuildError("codebook size must be >= 1");
    std::size_t total = 0;
    std::size_t dim = 0;
    for (const auto& sample : samples) {
        for (const auto& v : sample) {
            if (dim == 0) dim = v.size();
            if (v.size() != dim) throw BuildError("inconsistent feature dimensions");
            ++total;
        }
    }
    if (total == 0) throw BuildError("empty training set");

    Codebook cb;
    cb.dim = static_cast<int>(dim);
    cb.seed = seed;
    cb.means.assign(dim, 0.0);
    cb.stds.assign(dim, 0.0);
    for (const auto& sample : samples) {
        for (const auto& v : sample) {
            for (std::size_t d = 0; d < dim; ++d) cb.means[d] += v[d];
        }
    }
    for (std::size_t d = 0; d < dim; ++d) cb.means[d] /= static_cast<double>(total);
    for (const auto& sample : samples) {
        for (const auto& v : sample) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = v[d] - cb.means[d];
                cb.stds[d] += diff * diff;
            }
        }
    }
    for (std::size_t d = 0; d < dim; ++d) {
        cb.stds[d] = std::sqrt(cb.stds[d] / static_cast<double>(total));
        if (cb.stds[d] <= 0.0) cb.stds[d] = 1.0;
    }

    // Pooled, standardized track vectors.
    std::vector<std::vector<double>> pool;
    pool.reserve(total);
    for (const auto& sample : samples) {
        for (const auto& v : sample) pool.push_back(standardize(v, cb));
    }

    Rng rng(seed);
    cb.vectors.reserve(static_cast<std::size_t>(n));
    if (static_cast<std::size_t>(n) <= pool.size()) {
        for (int idx : rng.sample_without_replacement(static_cast<int>(pool.size()), n))
            cb.vectors.push_back(pool[static_cast<std::size_t>(idx)]);
    } else {
        for (int i = 0; i < n; ++i)
            cb.vectors.push_back(pool[static_cast<std::size_t>(rng.below(pool.size()))]);
    }

    // Smoothed idf over the training samples.
    const std::size_t n_bins = cb.vectors.size();
    std::vector<long> df(n_bins, 0);
    long n_docs = 0;
    const int a = std::min<int>(idf_assign, static_cast<int>(n_bins));
    for (const auto& sample : samples) {
        if (sample.empty()) continue;
        ++n_docs;
        const auto counts = count_bins(sample, cb, a);
        for (std::size_t b = 0; b < n_bins; ++b) {
            if (counts[b] > 0) df[b] += 1;
        }
    }
    cb.idf.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        cb.idf[b] = std::log((1.0 + static_cast<double>(n_docs)) /
                             (1.0 + static_cast<double>(df[b]))) +
                    1.0;
    }
    return cb;
}

BowHistogram encode(const std::vector<std::vector<double>>& sample_vectors,
                    const Codebook& codebook, int assign) {
    if (assign < 1) throw EncodeError("assign must be >= 1");
    if (assign > codebook.size())
        throw EncodeError("assign exceeds the codebook size");

    BowHistogram hist;
    hist.counts = count_bins(sample_vectors, codebook, assign);
    hist.weighted.assign(hist.counts.size(), 0.0);
    double norm_sq = 0.0;
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        hist.weighted[b] = hist.counts[b] * codebook.idf[b];
        norm_sq += hist.weighted[b] * hist.weighted[b];
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& w : hist.weighted) w *= inv;
    }
    return hist;
}

} // namespace motil
