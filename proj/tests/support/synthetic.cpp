#include "support/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "affinity/io.hpp"

namespace synthetic {

using affinity::CandidateGraph;
using affinity::EmbeddingTable;
using affinity::GraphNode;
using affinity::NodeKind;
using affinity::PointMatrix;
using affinity::Rng;
using nlohmann::json;

PointMatrix makeBlobs(const std::vector<std::vector<double>>& centers, std::size_t perCluster,
                      double sigma, std::uint64_t seed, std::vector<int>* labelsOut) {
    Rng rng(seed);
    PointMatrix points;
    const std::size_t dim = centers.front().size();
    for (std::size_t j = 0; j < dim; ++j) points.columns.push_back("x" + std::to_string(j));

    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < perCluster; ++i) {
            std::vector<double> row(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                row[j] = centers[c][j] + sigma * rng.nextGaussian();
            }
            points.rows.push_back(std::move(row));
            points.rowIds.push_back("p" + std::to_string(points.rows.size() - 1));
            if (labelsOut) labelsOut->push_back(static_cast<int>(c));
        }
    }
    return points;
}

namespace {

std::string embeddingFileText(const std::vector<std::string>& terms, std::size_t dimension,
                              std::uint64_t seed) {
    std::string text = std::to_string(terms.size()) + ' ' + std::to_string(dimension) + '\n';
    for (std::size_t t = 0; t < terms.size(); ++t) {
        Rng rng(affinity::mixSeed(seed, 5000 + t));
        text += terms[t];
        for (std::size_t j = 0; j < dimension; ++j) {
            text += ' ' + affinity::formatNumber(rng.nextGaussian());
        }
        text += '\n';
    }
    return text;
}

}  // namespace

EmbeddingTable makeEmbeddingTable(const std::vector<std::string>& terms, std::size_t dimension,
                                  std::uint64_t seed) {
    std::istringstream in(embeddingFileText(terms, dimension, seed));
    return EmbeddingTable::parse(in, "<synthetic>");
}

GraphRegime makeGraphRegime(std::uint64_t seed) {
    GraphRegime regime;

    // Six synonym pairs plus four singleton terms.
    const std::size_t clusters = 6;
    std::vector<std::size_t> clusterOf;
    for (std::size_t c = 0; c < clusters; ++c) {
        regime.terms.push_back("syn" + std::to_string(c) + "a");
        clusterOf.push_back(c);
        regime.terms.push_back("syn" + std::to_string(c) + "b");
        clusterOf.push_back(c);
    }
    for (std::size_t s = 0; s < 4; ++s) {
        regime.terms.push_back("solo" + std::to_string(s));
        clusterOf.push_back(clusters + s);
    }
    for (std::size_t f = 0; f < 5; ++f) {
        regime.featureNames.push_back("feature" + std::to_string(f));
    }

    const std::size_t axes = clusters + 4;
    const std::size_t dim = axes + 4;
    std::string text = std::to_string(regime.terms.size()) + ' ' + std::to_string(dim) + '\n';
    for (std::size_t t = 0; t < regime.terms.size(); ++t) {
        Rng rng(affinity::mixSeed(seed, 400 + t));
        text += regime.terms[t];
        for (std::size_t j = 0; j < dim; ++j) {
            double value = j == clusterOf[t] ? 1.0 : 0.0;
            if (j >= axes) value += 0.05 * rng.nextGaussian();
            text += ' ' + affinity::formatNumber(value);
        }
        text += '\n';
    }
    std::istringstream in(text);
    regime.table = EmbeddingTable::parse(in, "<regime>");
    return regime;
}

CandidateGraph randomGraph(Rng& rng, const GraphRegime& regime, std::size_t maxNodes) {
    const std::size_t n = 1 + rng.nextIndex(maxNodes);

    // Two realistic families. Uniform-weight graphs may carry both members
    // of a synonym cluster (the run of tied scores short answers produce); graphs with
    // varied term frequencies hold at most one term per cluster, the shape
    // stemming produces on real answers.
    const bool uniformWeights = rng.nextDouble() < 0.5;

    std::vector<std::size_t> termIndices(regime.terms.size());
    std::iota(termIndices.begin(), termIndices.end(), 0);
    std::vector<std::size_t> featureIndices(regime.featureNames.size());
    std::iota(featureIndices.begin(), featureIndices.end(), 0);
    std::size_t termsUsed = 0, featuresUsed = 0;

    auto clusterOf = [](const std::string& term) {
        return term.substr(0, term.size() - 1);  // "syn3a" -> "syn3"
    };

    std::vector<GraphNode> nodes;
    std::vector<std::string> usedClusters;
    nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        GraphNode node;
        const bool feature =
            featuresUsed < featureIndices.size() && rng.nextDouble() < 0.25;
        if (feature) {
            std::swap(featureIndices[featuresUsed],
                      featureIndices[featuresUsed +
                                     rng.nextIndex(featureIndices.size() - featuresUsed)]);
            node.id = regime.featureNames[featureIndices[featuresUsed++]];
            node.kind = NodeKind::McqFeature;
        } else {
            std::string term;
            while (termsUsed < termIndices.size()) {
                std::swap(termIndices[termsUsed],
                          termIndices[termsUsed + rng.nextIndex(termIndices.size() - termsUsed)]);
                term = regime.terms[termIndices[termsUsed++]];
                if (uniformWeights || std::find(usedClusters.begin(), usedClusters.end(),
                                                clusterOf(term)) == usedClusters.end()) {
                    break;
                }
                term.clear();
            }
            if (term.empty()) continue;  // vocabulary exhausted
            usedClusters.push_back(clusterOf(term));
            node.id = term;
            node.kind = NodeKind::TextTerm;
        }
        // Frequency-style weights: small integer counts over a short answer.
        node.weight = uniformWeights ? 0.1 : 0.1 * static_cast<double>(1 + rng.nextIndex(3));
        node.score = node.kind == NodeKind::McqFeature && rng.nextDouble() < 0.5 ? -node.weight
                                                                                 : node.weight;
        nodes.push_back(std::move(node));
    }
    if (nodes.empty()) {
        nodes.push_back({regime.terms.front(), 0.1, 0.1, NodeKind::TextTerm});
    }
    return CandidateGraph(std::move(nodes));
}

namespace {

const char* kAttributeCycle[] = {
    "location",         "tradition",        "religion",       "traveling_attributes",
    "behavior_attributes", "work_information", "social_attributes", "week_routine",
    "hobbies",          "events",
};

std::string paddedId(const char* prefix, std::size_t value, std::size_t width) {
    std::string digits = std::to_string(value);
    while (digits.size() < width) digits.insert(digits.begin(), '0');
    return prefix + digits;
}

}  // namespace

SyntheticWorkspace writeSyntheticWorkspace(const std::filesystem::path& dir,
                                           const SyntheticSpec& spec) {
    std::filesystem::create_directories(dir);

    SyntheticWorkspace ws;
    ws.dir = dir;
    ws.surveyPath = dir / "survey.json";
    ws.embeddingPath = dir / "embeddings.txt";
    ws.configPath = dir / "config.json";

    // Prototype preference table for MCQ answers.
    std::vector<std::vector<std::size_t>> preferred(spec.prototypes);
    for (std::size_t p = 0; p < spec.prototypes; ++p) {
        Rng rng(affinity::mixSeed(spec.seed, 900 + p));
        for (std::size_t q = 0; q < spec.mcqQuestions; ++q) {
            preferred[p].push_back(rng.nextIndex(spec.mcqOptions));
        }
    }

    // Prototype term pools; digit-bearing terms pass the stemmer unchanged.
    std::vector<std::vector<std::string>> pools(spec.prototypes);
    std::vector<std::string> allTerms;
    for (std::size_t p = 0; p < spec.prototypes; ++p) {
        for (std::size_t t = 0; t < spec.termsPerPrototype; ++t) {
            pools[p].push_back("w" + std::to_string(p) + "term" + std::to_string(t));
            allTerms.push_back(pools[p].back());
        }
    }

    // Embeddings: own-prototype axis plus small term-specific noise, so
    // same-pool terms are nearly parallel and cross-pool terms nearly
    // orthogonal.
    const std::size_t dim = spec.prototypes + 5;
    std::string embeddingText =
        std::to_string(allTerms.size()) + ' ' + std::to_string(dim) + '\n';
    for (std::size_t p = 0; p < spec.prototypes; ++p) {
        for (std::size_t t = 0; t < spec.termsPerPrototype; ++t) {
            Rng rng(affinity::mixSeed(spec.seed, 7000 + p * 1000 + t));
            embeddingText += pools[p][t];
            for (std::size_t j = 0; j < dim; ++j) {
                double value = j == p ? 1.0 : 0.0;
                if (j >= spec.prototypes) value += 0.05 * rng.nextGaussian();
                embeddingText += ' ' + affinity::formatNumber(value);
            }
            embeddingText += '\n';
        }
    }
    affinity::writeFile(ws.embeddingPath, embeddingText);

    // Questionnaire.
    json questions = json::array();
    for (std::size_t q = 0; q < spec.mcqQuestions; ++q) {
        json options = json::array();
        for (std::size_t o = 0; o < spec.mcqOptions; ++o) {
            options.push_back("option " + std::to_string(o));
        }
        questions.push_back(json{{"id", paddedId("q", q + 1, 2)},
                                 {"prompt", "Multiple choice question " + std::to_string(q + 1)},
                                 {"kind", "mcq"},
                                 {"attribute", kAttributeCycle[q % 10]},
                                 {"options", std::move(options)}});
    }
    for (std::size_t q = 0; q < spec.textQuestions; ++q) {
        questions.push_back(json{{"id", paddedId("q", spec.mcqQuestions + q + 1, 2)},
                                 {"prompt", "Free text question " + std::to_string(q + 1)},
                                 {"kind", "text"},
                                 {"attribute", kAttributeCycle[(spec.mcqQuestions + q) % 10]},
                                 {"options", json::array()}});
    }

    // Candidates: balanced prototypes, 10% answer noise in both channels.
    Rng noise(affinity::mixSeed(spec.seed, 31));
    json responses = json::array();
    json labels = json::object();
    for (std::size_t i = 0; i < spec.candidates; ++i) {
        const std::size_t p = i % spec.prototypes;
        const std::string cid = paddedId("c", i + 1, 3);
        labels[cid] = "proto" + std::to_string(p);
        ws.labels[cid] = "proto" + std::to_string(p);

        json answers = json::object();
        for (std::size_t q = 0; q < spec.mcqQuestions; ++q) {
            std::size_t option = preferred[p][q];
            if (noise.nextDouble() < spec.noiseRate) option = noise.nextIndex(spec.mcqOptions);
            answers[paddedId("q", q + 1, 2)] = option;
        }
        for (std::size_t q = 0; q < spec.textQuestions; ++q) {
            std::string text;
            for (std::size_t t = 0; t < spec.termsPerAnswer; ++t) {
                std::size_t sourcePool = p;
                if (spec.prototypes > 1 && noise.nextDouble() < spec.noiseRate) {
                    sourcePool = noise.nextIndex(spec.prototypes);
                }
                if (!text.empty()) text += ' ';
                text += pools[sourcePool][noise.nextIndex(spec.termsPerPrototype)];
            }
            answers[paddedId("q", spec.mcqQuestions + q + 1, 2)] = text;
        }
        responses.push_back(json{{"candidate_id", cid}, {"answers", std::move(answers)}});
    }

    json survey{{"questions", std::move(questions)},
                {"responses", std::move(responses)},
                {"labels", std::move(labels)}};
    affinity::writeFile(ws.surveyPath, survey.dump(2) + "\n");

    // Feature specs over adjacent question pairs plus one predicate.
    json features = json::array();
    const char* featureNames[] = {"travel_gap", "routine_gap", "social_gap",
                                  "work_gap",   "event_gap"};
    for (std::size_t f = 0; f + 1 < spec.mcqQuestions && f / 2 < 5; f += 2) {
        features.push_back(json{{"name", featureNames[f / 2]},
                                {"operands", {paddedId("q", f + 1, 2), paddedId("q", f + 2, 2)}},
                                {"formula", "difference_over_ratio"},
                                {"group_ratio", static_cast<double>(spec.mcqOptions - 1)}});
    }
    features.push_back(json{{"name", "open_traveler"},
                            {"operands", {paddedId("q", spec.mcqQuestions, 2)}},
                            {"formula", "predicate"},
                            {"accepted", {{paddedId("q", spec.mcqQuestions, 2), {0, 1}}}}});

    json config{{"survey", "survey.json"},
                {"embeddings", "embeddings.txt"},
                {"out", "out"},
                {"features", std::move(features)},
                {"weights", {{"mcq_graph", 1.0}, {"text_graph", 1.0}, {"text_vector", 1.0}}},
                {"top_n", 10},
                {"match_threshold", 0.4},
                {"k", {{"mode", "fixed"}, {"value", static_cast<int>(spec.prototypes)}, {"max", 8}}},
                {"standardize", false},
                {"seed", spec.seed}};
    affinity::writeFile(ws.configPath, config.dump(2) + "\n");

    return ws;
}

}  // namespace synthetic
