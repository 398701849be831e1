#include "affinity/graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "affinity/error.hpp"
#include "affinity/io.hpp"

namespace affinity {

namespace {

std::size_t findColumn(std::span<const std::string> columns, const std::string& id) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == id) return i;
    }
    return columns.size();
}

}  // namespace

FeatureValues deriveFeatures(std::span<const double> row, std::span<const std::string> columns,
                             const std::vector<FeatureSpec>& specs) {
    FeatureValues out;
    out.reserve(specs.size());

    for (const FeatureSpec& spec : specs) {
        auto answerOf = [&](const std::string& qid) {
            const std::size_t col = findColumn(columns, qid);
            if (col == columns.size()) {
                throw InputError("feature \"" + spec.name + "\": operand question \"" + qid +
                                 "\" is not present in the encoded data");
            }
            return row[col];
        };

        double value = 0.0;
        if (spec.formula == FeatureFormula::DifferenceOverRatio) {
            if (spec.operands.size() != 2) {
                throw ParameterError("feature \"" + spec.name +
                                     "\": difference formula needs exactly two operand questions");
            }
            if (spec.groupRatio == 0.0) {
                throw ParameterError("feature \"" + spec.name + "\": group ratio must not be zero");
            }
            value = (answerOf(spec.operands[0]) - answerOf(spec.operands[1])) / spec.groupRatio;
        } else {
            if (spec.operands.empty()) {
                throw ParameterError("feature \"" + spec.name +
                                     "\": predicate needs at least one operand question");
            }
            bool holds = true;
            for (const auto& qid : spec.operands) {
                auto it = spec.accepted.find(qid);
                if (it == spec.accepted.end()) {
                    throw ParameterError("feature \"" + spec.name +
                                         "\": predicate has no accepted options for operand \"" +
                                         qid + "\"");
                }
                const int answer = static_cast<int>(std::llround(answerOf(qid)));
                if (!it->second.count(answer)) {
                    holds = false;
                    break;
                }
            }
            value = holds ? 1.0 : 0.0;
        }
        out.emplace_back(spec.name, value);
    }
    return out;
}

CandidateGraph::CandidateGraph(std::vector<GraphNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) return;
    coreIndex_ = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const GraphNode& best = nodes_[coreIndex_];
        const GraphNode& cur = nodes_[i];
        if (cur.weight > best.weight || (cur.weight == best.weight && cur.id < best.id)) {
            coreIndex_ = i;
        }
    }
}

double CandidateGraph::totalWeight() const {
    std::vector<std::size_t> order(nodes_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return nodes_[a].id < nodes_[b].id; });
    double total = 0.0;
    for (std::size_t i : order) total += nodes_[i].weight;
    return total;
}

std::string coreTheme(const std::map<std::string, double>& nodes) {
    if (nodes.empty()) throw InputError("core theme of an empty node set is undefined");
    auto best = nodes.begin();
    for (auto it = std::next(nodes.begin()); it != nodes.end(); ++it) {
        if (it->second > best->second) best = it;  // map order already breaks ties by smallest id
    }
    return best->first;
}

CandidateGraph buildGraph(const FeatureValues& features, const ContextVector& ctx) {
    if (features.empty() && ctx.empty()) {
        throw InputError("empty graph: no features and no context terms");
    }

    std::vector<GraphNode> nodes;
    nodes.reserve(features.size() + ctx.size());
    std::unordered_set<std::string> seen;

    for (const auto& [name, value] : features) {
        if (!seen.insert(name).second) throw InputError("duplicate graph node id \"" + name + "\"");
        nodes.push_back({name, std::abs(value), value, NodeKind::McqFeature});
    }
    for (const auto& [term, score] : ctx.entries) {
        if (!seen.insert(term).second) throw InputError("duplicate graph node id \"" + term + "\"");
        nodes.push_back({term, score, score, NodeKind::TextTerm});
    }
    return CandidateGraph(std::move(nodes));
}

GraphMatrix::GraphMatrix(std::vector<double> weights, std::vector<double> scores)
    : weights_(std::move(weights)), scores_(std::move(scores)) {
    if (weights_.size() != scores_.size()) {
        throw InputError("graph matrix needs equally sized weight and score vectors");
    }
}

GraphMatrix graphMatrix(const CandidateGraph& g) {
    if (g.empty()) throw InputError("graph matrix of an empty graph is undefined");
    std::vector<double> weights, scores;
    weights.reserve(g.size());
    scores.reserve(g.size());
    for (const GraphNode& node : g.nodes()) {
        weights.push_back(node.weight);
        scores.push_back(node.score);
    }
    return GraphMatrix(std::move(weights), std::move(scores));
}

void writeCsv(const GraphMatrix& m, std::ostream& out) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j > 0) out << ',';
            out << formatNumber(m.at(i, j));
        }
        out << '\n';
    }
}

namespace {

// Pair score under the matching rule: identical ids always correspond,
// text terms fall back to embedding similarity, everything else is disjoint.
double pairScore(const GraphNode& a, const GraphNode& b, const EmbeddingTable& table) {
    if (a.id == b.id) return 1.0;
    if (a.kind == NodeKind::TextTerm && b.kind == NodeKind::TextTerm) {
        return termSimilarity(a.id, b.id, table);
    }
    return 0.0;
}

struct CandidatePair {
    double score;
    const GraphNode* a;
    const GraphNode* b;
};

// Deterministic order: best score first, then the lexicographically smallest
// unordered id pair. The unordered key keeps greedy selection symmetric in
// the two graphs.
bool pairLess(const CandidatePair& x, const CandidatePair& y) {
    if (x.score != y.score) return x.score > y.score;
    const std::string& xMin = std::min(x.a->id, x.b->id);
    const std::string& xMax = std::max(x.a->id, x.b->id);
    const std::string& yMin = std::min(y.a->id, y.b->id);
    const std::string& yMax = std::max(y.a->id, y.b->id);
    if (xMin != yMin) return xMin < yMin;
    if (xMax != yMax) return xMax < yMax;
    return x.a->id < y.a->id;
}

// Dense weight ranks: the core's weight level is rank 0 and every strictly
// lower weight level is one position further from the core. Equal weights
// share a rank, so the ranking is scale- and insertion-order-invariant.
std::unordered_map<const GraphNode*, std::size_t> coreDistanceRanks(const CandidateGraph& g) {
    std::vector<double> levels;
    levels.reserve(g.size());
    for (const GraphNode& node : g.nodes()) levels.push_back(node.weight);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::unordered_map<const GraphNode*, std::size_t> ranks;
    ranks.reserve(g.size());
    for (const GraphNode& node : g.nodes()) {
        const auto it = std::lower_bound(levels.begin(), levels.end(), node.weight,
                                         std::greater<>());
        ranks[&node] = static_cast<std::size_t>(it - levels.begin());
    }
    return ranks;
}

}  // namespace

NodeCorrespondence matchNodes(const CandidateGraph& g1, const CandidateGraph& g2,
                              const EmbeddingTable& table, double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ParameterError("match threshold must lie in [0, 1]");
    }

    std::vector<CandidatePair> candidates;
    candidates.reserve(g1.size() * g2.size());
    for (const GraphNode& a : g1.nodes()) {
        for (const GraphNode& b : g2.nodes()) {
            const double score = pairScore(a, b, table);
            if (score >= threshold && score > 0.0) candidates.push_back({score, &a, &b});
        }
    }
    std::sort(candidates.begin(), candidates.end(), pairLess);

    NodeCorrespondence out;
    std::unordered_set<const GraphNode*> used;
    for (const CandidatePair& p : candidates) {
        if (used.count(p.a) || used.count(p.b)) continue;
        used.insert(p.a);
        used.insert(p.b);
        out.matches.push_back({p.a->id, p.b->id, p.score});
    }

    for (const GraphNode& node : g1.nodes()) {
        if (!used.count(&node)) out.unmatchedA.push_back(node.id);
    }
    for (const GraphNode& node : g2.nodes()) {
        if (!used.count(&node)) out.unmatchedB.push_back(node.id);
    }
    std::sort(out.unmatchedA.begin(), out.unmatchedA.end());
    std::sort(out.unmatchedB.begin(), out.unmatchedB.end());
    return out;
}

double gamSimilarity(const CandidateGraph& g1, const CandidateGraph& g2,
                     const EmbeddingTable& table, double threshold) {
    if (g1.empty() || g2.empty()) {
        throw InputError("graph association of an empty graph is undefined");
    }

    std::unordered_map<std::string, const GraphNode*> byId1, byId2;
    for (const GraphNode& n : g1.nodes()) byId1[n.id] = &n;
    for (const GraphNode& n : g2.nodes()) byId2[n.id] = &n;

    const auto ranks1 = coreDistanceRanks(g1);
    const auto ranks2 = coreDistanceRanks(g2);

    // A graph whose weights all vanish still describes a node set; fall back
    // to uniform weights so identical graphs keep association 1.
    double total1 = g1.totalWeight();
    double total2 = g2.totalWeight();
    const bool uniform1 = total1 <= 0.0;
    const bool uniform2 = total2 <= 0.0;
    if (uniform1) total1 = static_cast<double>(g1.size());
    if (uniform2) total2 = static_cast<double>(g2.size());
    auto weightOf = [](const GraphNode* n, bool uniform) { return uniform ? 1.0 : n->weight; };

    NodeCorrespondence matches = matchNodes(g1, g2, table, threshold);
    std::sort(matches.matches.begin(), matches.matches.end(),
              [](const NodeMatch& x, const NodeMatch& y) {
                  const std::string& xMin = std::min(x.idA, x.idB);
                  const std::string& xMax = std::max(x.idA, x.idB);
                  const std::string& yMin = std::min(y.idA, y.idB);
                  const std::string& yMax = std::max(y.idA, y.idB);
                  return std::tie(xMin, xMax) < std::tie(yMin, yMax);
              });

    double score = 0.0;
    bool perfectIdentity = matches.matches.size() == g1.size() && g1.size() == g2.size();
    for (const NodeMatch& match : matches.matches) {
        const GraphNode* a = byId1.at(match.idA);
        const GraphNode* b = byId2.at(match.idB);
        const double shareA = weightOf(a, uniform1) / total1;
        const double shareB = weightOf(b, uniform2) / total2;

        const std::size_t rankA = ranks1.at(a);
        const std::size_t rankB = ranks2.at(b);
        const std::size_t rankGap = rankA > rankB ? rankA - rankB : rankB - rankA;
        const double coreFactor = rankGap <= 1 ? 1.0 : 0.5;

        score += match.score * std::min(shareA, shareB) * coreFactor;

        perfectIdentity = perfectIdentity && match.idA == match.idB && match.score == 1.0 &&
                          coreFactor == 1.0 && a->weight == b->weight && rankA == rankB;
    }

    // A complete identity matching with aligned ranks and equal weights sums
    // to exactly 1 algebraically; report it as such instead of the rounded
    // floating-point accumulation.
    if (perfectIdentity && total1 == total2) return 1.0;

    return std::clamp(score, 0.0, 1.0);
}

std::string toDot(const CandidateGraph& g, const std::string& name) {
    std::string dot = "graph \"" + name + "\" {\n";
    for (const GraphNode& node : g.nodes()) {
        dot += "  \"" + node.id + "\" [weight=" + formatNumber(node.weight) +
               ", kind=" + (node.kind == NodeKind::McqFeature ? "mcq_feature" : "text_term");
        if (node.id == g.coreId()) dot += ", core=true, shape=doublecircle";
        dot += "];\n";
    }
    for (const GraphNode& node : g.nodes()) {
        if (node.id == g.coreId()) continue;
        dot += "  \"" + g.coreId() + "\" -- \"" + node.id +
               "\" [label=" + formatNumber(node.weight) + "];\n";
    }
    dot += "}\n";
    return dot;
}

nlohmann::json toJson(const CandidateGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const GraphNode& node : g.nodes()) {
        nodes.push_back({{"id", node.id},
                         {"weight", node.weight},
                         {"score", node.score},
                         {"kind", node.kind == NodeKind::McqFeature ? "mcq_feature" : "text_term"}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const GraphNode& node : g.nodes()) {
        if (node.id == g.coreId()) continue;
        edges.push_back({{"from", g.coreId()}, {"to", node.id}, {"weight", node.weight}});
    }
    return {{"core", g.coreId()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

}  // namespace affinity
