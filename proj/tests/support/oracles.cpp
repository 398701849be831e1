#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace oracle {

using affinity::CandidateGraph;
using affinity::EmbeddingTable;
using affinity::GraphNode;
using affinity::NodeKind;
using affinity::PointMatrix;

double centroidWcss(const PointMatrix& points, const std::vector<int>& labels) {
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < labels.size(); ++i) clusters[labels[i]].push_back(i);

    double total = 0.0;
    for (const auto& [cluster, members] : clusters) {
        const std::size_t dim = points.rows.front().size();
        std::vector<double> mean(dim, 0.0);
        for (std::size_t i : members) {
            for (std::size_t j = 0; j < dim; ++j) mean[j] += points.rows[i][j];
        }
        for (double& v : mean) v /= static_cast<double>(members.size());
        for (std::size_t i : members) {
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = points.rows[i][j] - mean[j];
                total += d * d;
            }
        }
    }
    return total;
}

namespace {

struct GamProblem {
    std::vector<const GraphNode*> nodes1;
    std::vector<const GraphNode*> nodes2;
    std::vector<double> share1;
    std::vector<double> share2;
    std::vector<std::size_t> rank1;
    std::vector<std::size_t> rank2;
    std::vector<std::vector<double>> pairScore;  // eligible pairs only, else 0
};

// Dense rank of each node's weight level, descending.
std::vector<std::size_t> weightRanks(const std::vector<const GraphNode*>& nodes) {
    std::vector<std::size_t> ranks(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::size_t rank = 0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (j == i || nodes[j]->weight <= nodes[i]->weight) continue;
            bool counted = false;
            for (std::size_t k = 0; k < j; ++k) {
                if (k != i && nodes[k]->weight == nodes[j]->weight) {
                    counted = true;
                    break;
                }
            }
            if (!counted) ++rank;
        }
        ranks[i] = rank;
    }
    return ranks;
}

std::vector<double> weightShares(const std::vector<const GraphNode*>& nodes) {
    double total = 0.0;
    for (const GraphNode* n : nodes) total += n->weight;
    std::vector<double> shares(nodes.size());
    if (total <= 0.0) {
        std::fill(shares.begin(), shares.end(), 1.0 / static_cast<double>(nodes.size()));
    } else {
        for (std::size_t i = 0; i < nodes.size(); ++i) shares[i] = nodes[i]->weight / total;
    }
    return shares;
}

double pairScoreOf(const GraphNode& a, const GraphNode& b, const EmbeddingTable& table) {
    if (a.id == b.id) return 1.0;
    if (a.kind == NodeKind::TextTerm && b.kind == NodeKind::TextTerm) {
        return affinity::termSimilarity(a.id, b.id, table);
    }
    return 0.0;
}

double searchBest(const GamProblem& p, std::size_t next, std::vector<bool>& used) {
    if (next == p.nodes1.size()) return 0.0;

    // Option 1: leave node `next` unmatched.
    double best = searchBest(p, next + 1, used);

    // Option 2: match it with any free eligible partner.
    for (std::size_t j = 0; j < p.nodes2.size(); ++j) {
        if (used[j] || p.pairScore[next][j] <= 0.0) continue;
        const std::size_t gap = p.rank1[next] > p.rank2[j] ? p.rank1[next] - p.rank2[j]
                                                           : p.rank2[j] - p.rank1[next];
        const double coreFactor = gap <= 1 ? 1.0 : 0.5;
        const double contribution =
            p.pairScore[next][j] * std::min(p.share1[next], p.share2[j]) * coreFactor;
        used[j] = true;
        best = std::max(best, contribution + searchBest(p, next + 1, used));
        used[j] = false;
    }
    return best;
}

}  // namespace

double bruteForceGamScore(const CandidateGraph& g1, const CandidateGraph& g2,
                          const EmbeddingTable& table, double threshold) {
    GamProblem p;
    for (const GraphNode& n : g1.nodes()) p.nodes1.push_back(&n);
    for (const GraphNode& n : g2.nodes()) p.nodes2.push_back(&n);
    p.share1 = weightShares(p.nodes1);
    p.share2 = weightShares(p.nodes2);
    p.rank1 = weightRanks(p.nodes1);
    p.rank2 = weightRanks(p.nodes2);

    p.pairScore.assign(p.nodes1.size(), std::vector<double>(p.nodes2.size(), 0.0));
    for (std::size_t i = 0; i < p.nodes1.size(); ++i) {
        for (std::size_t j = 0; j < p.nodes2.size(); ++j) {
            const double s = pairScoreOf(*p.nodes1[i], *p.nodes2[j], table);
            if (s >= threshold && s > 0.0) p.pairScore[i][j] = s;
        }
    }

    std::vector<bool> used(p.nodes2.size(), false);
    return std::min(1.0, searchBest(p, 0, used));
}

double expectedRandIndexForMarginals(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    const double pairs = n * (n - 1.0) / 2.0;

    auto togetherProbability = [&](const std::vector<int>& labels) {
        std::map<int, double> counts;
        for (int label : labels) counts[label] += 1.0;
        double together = 0.0;
        for (const auto& [label, count] : counts) together += count * (count - 1.0) / 2.0;
        return together / pairs;
    };

    const double pA = togetherProbability(a);
    const double pB = togetherProbability(b);
    return pA * pB + (1.0 - pA) * (1.0 - pB);
}

}  // namespace oracle
