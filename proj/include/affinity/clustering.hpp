#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affinity/survey.hpp"

namespace affinity {

struct ClusterAssignment {
    std::vector<int> labels;  // point index -> cluster id in [0, k)
    int k = 0;
    std::string method;
    std::uint64_t seed = 0;
};

// Symmetric similarity matrix with entries in [0, 1] and unit diagonal.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) { values_[i * n_ + j] = v; }

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

// Lloyd's algorithm from k-means++ initialization. Converges when the
// assignment is stable or after 300 iterations. Ties go to the lowest
// centroid index. Optionally records the objective after each iteration.
ClusterAssignment kmeans(const PointMatrix& points, int k, std::uint64_t seed,
                         std::vector<double>* objectiveTrace = nullptr);

// Pairwise dispersion: sum over clusters of D_k / (2 n_k) where D_k adds
// the squared Euclidean distance over all ordered intra-cluster pairs.
double dispersion(const PointMatrix& points, const ClusterAssignment& a);

struct KSelectionReport {
    std::vector<std::pair<int, double>> table;  // k -> statistic
    int chosenK = 0;
    std::string rule;
};

KSelectionReport selectKElbow(const PointMatrix& points, int kMax, std::uint64_t seed);
KSelectionReport selectKSilhouette(const PointMatrix& points, int kMax, std::uint64_t seed);

double meanSilhouette(const PointMatrix& points, const ClusterAssignment& a);

// Normalized symmetric Laplacian embedding (k smallest eigenvectors,
// row-normalized) followed by seeded k-means.
ClusterAssignment spectralCluster(const SimilarityMatrix& sim, int k, std::uint64_t seed);

// Average-linkage agglomerative clustering on 1 - similarity. Auxiliary
// comparison method; deterministic, no seed.
ClusterAssignment agglomerativeAverage(const SimilarityMatrix& sim, int k);

struct PcaResult {
    std::vector<std::vector<double>> components;  // orthonormal rows
    std::vector<double> explainedVarianceRatios;  // non-increasing, sum <= 1
    std::vector<double> mean;
};

PcaResult pca(const PointMatrix& points, int nComponents);

// Pair-counting agreement between two partitions of the same point set;
// invariant under label permutation.
double randIndex(const std::vector<int>& a, const std::vector<int>& b);

struct AgreementReport {
    std::vector<std::string> methods;
    std::vector<std::vector<int>> memberships;     // method x point -> cluster
    std::vector<std::vector<double>> randIndices;  // method x method
};

AgreementReport compareMemberships(const std::vector<ClusterAssignment>& assignments);

}  // namespace affinity
