#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "affinity/text.hpp"

namespace affinity {

enum class FeatureFormula { DifferenceOverRatio, Predicate };

// One derived MCQ feature (Table-2 style question combination).
struct FeatureSpec {
    std::string name;
    std::vector<std::string> operands;  // question ids
    FeatureFormula formula = FeatureFormula::DifferenceOverRatio;
    double groupRatio = 1.0;
    // Predicate form: operand question id -> accepted option indices.
    // The predicate is the conjunction over all operands.
    std::map<std::string, std::set<int>> accepted;
};

using FeatureValues = std::vector<std::pair<std::string, double>>;

// Evaluates feature specs against one candidate's encoded MCQ row.
// `columns` carries the question id of each row entry.
FeatureValues deriveFeatures(std::span<const double> row,
                             std::span<const std::string> columns,
                             const std::vector<FeatureSpec>& specs);

enum class NodeKind { McqFeature, TextTerm };

struct GraphNode {
    std::string id;
    double weight = 0.0;  // non-negative magnitude used for association
    double score = 0.0;   // raw signed feature value, or term score
    NodeKind kind = NodeKind::TextTerm;
};

// Star-topology weighted context graph: every non-core node is connected
// only to the core theme node.
class CandidateGraph {
public:
    CandidateGraph() = default;
    explicit CandidateGraph(std::vector<GraphNode> nodes);

    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const GraphNode& core() const { return nodes_[coreIndex_]; }
    const std::string& coreId() const { return core().id; }
    std::size_t edgeCount() const { return nodes_.empty() ? 0 : nodes_.size() - 1; }

    // Total node weight, accumulated in id order so it is independent of
    // insertion order.
    double totalWeight() const;

private:
    std::vector<GraphNode> nodes_;  // insertion order preserved
    std::size_t coreIndex_ = 0;
};

// Highest-weight node id; ties broken by lexicographically smallest id.
std::string coreTheme(const std::map<std::string, double>& nodes);

CandidateGraph buildGraph(const FeatureValues& features, const ContextVector& ctx);

// Rank-1 matrix: outer product of the node-weight column with the
// feature-score row.
class GraphMatrix {
public:
    GraphMatrix(std::vector<double> weights, std::vector<double> scores);

    std::size_t size() const { return weights_.size(); }
    double at(std::size_t i, std::size_t j) const { return weights_[i] * scores_[j]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& scores() const { return scores_; }

private:
    std::vector<double> weights_;
    std::vector<double> scores_;
};

GraphMatrix graphMatrix(const CandidateGraph& g);
void writeCsv(const GraphMatrix& m, std::ostream& out);

struct NodeMatch {
    std::string idA;
    std::string idB;
    double score = 0.0;
};

struct NodeCorrespondence {
    std::vector<NodeMatch> matches;
    std::vector<std::string> unmatchedA;
    std::vector<std::string> unmatchedB;
};

// Greedy maximum matching between the node sets of two graphs. Pair score is
// 1 for identical ids, the embedding similarity for text-term pairs, and 0
// otherwise; only pairs with score >= threshold (and > 0) are eligible.
NodeCorrespondence matchNodes(const CandidateGraph& g1, const CandidateGraph& g2,
                              const EmbeddingTable& table, double threshold);

// Graphical association score in [0, 1]: sum over matched pairs of
// match score * min(w1/W1, w2/W2) * core alignment factor.
double gamSimilarity(const CandidateGraph& g1, const CandidateGraph& g2,
                     const EmbeddingTable& table, double threshold);

std::string toDot(const CandidateGraph& g, const std::string& name);
nlohmann::json toJson(const CandidateGraph& g);

}  // namespace affinity
