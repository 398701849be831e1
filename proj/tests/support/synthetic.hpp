#pragma once

// Deterministic fixtures: Gaussian blob point sets, random context graphs,
// synthetic embedding tables, and the three-prototype survey benchmark.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "affinity/graph.hpp"
#include "affinity/rng.hpp"
#include "affinity/survey.hpp"
#include "affinity/text.hpp"

namespace synthetic {

affinity::PointMatrix makeBlobs(const std::vector<std::vector<double>>& centers,
                                std::size_t perCluster, double sigma, std::uint64_t seed,
                                std::vector<int>* labelsOut = nullptr);

// Embedding table over the given terms with pseudo-random unit-scale vectors.
affinity::EmbeddingTable makeEmbeddingTable(const std::vector<std::string>& terms,
                                            std::size_t dimension, std::uint64_t seed);

// Shared vocabulary of synonym pairs plus singleton terms, with an embedding
// table where same-cluster terms are nearly parallel and cross-cluster terms
// nearly orthogonal. Mirrors the regime the pipeline feeds into the matcher.
struct GraphRegime {
    std::vector<std::string> terms;
    std::vector<std::string> featureNames;
    affinity::EmbeddingTable table;
};

GraphRegime makeGraphRegime(std::uint64_t seed);

// Random star graph over the regime's vocabulary; ids are unique per graph,
// weights are frequency-style counts.
affinity::CandidateGraph randomGraph(affinity::Rng& rng, const GraphRegime& regime,
                                     std::size_t maxNodes);

struct SyntheticSpec {
    std::size_t candidates = 100;
    std::size_t prototypes = 3;
    double noiseRate = 0.10;
    std::uint64_t seed = 7;
    std::size_t mcqQuestions = 12;
    std::size_t mcqOptions = 4;
    std::size_t textQuestions = 4;
    std::size_t termsPerPrototype = 12;
    std::size_t termsPerAnswer = 6;
};

struct SyntheticWorkspace {
    std::filesystem::path dir;
    std::filesystem::path surveyPath;
    std::filesystem::path embeddingPath;
    std::filesystem::path configPath;
    std::map<std::string, std::string> labels;  // candidate id -> prototype label
};

// Writes survey.json, embeddings.txt and config.json (k fixed at the
// prototype count, equal channel weights) under `dir`.
SyntheticWorkspace writeSyntheticWorkspace(const std::filesystem::path& dir,
                                           const SyntheticSpec& spec);

}  // namespace synthetic
