#pragma once

// Independent reference computations used as test oracles. These re-derive
// expected values along a different route than the library implementation.

#include <cstdint>
#include <vector>

#include "affinity/clustering.hpp"
#include "affinity/graph.hpp"
#include "affinity/survey.hpp"
#include "affinity/text.hpp"

namespace oracle {

// Centroid-route within-cluster sum of squares (the identity partner of the
// pairwise dispersion formula).
double centroidWcss(const affinity::PointMatrix& points, const std::vector<int>& labels);

// Best achievable association score over all valid matchings between two
// graphs, by exhaustive enumeration. Bounds the greedy score from above.
double bruteForceGamScore(const affinity::CandidateGraph& g1, const affinity::CandidateGraph& g2,
                          const affinity::EmbeddingTable& table, double threshold);

// Expected Rand index of two independent random partitions with the given
// fixed label marginals.
double expectedRandIndexForMarginals(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace oracle
