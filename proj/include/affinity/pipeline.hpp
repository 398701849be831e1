#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "affinity/clustering.hpp"
#include "affinity/graph.hpp"
#include "affinity/survey.hpp"
#include "affinity/text.hpp"

namespace affinity {

enum class KSelectionMode { Fixed, Elbow, Silhouette };

struct ChannelWeights {
    double mcqGraph = 1.0;
    double textGraph = 1.0;
    double textVector = 1.0;
};

struct PipelineConfig {
    std::filesystem::path surveyPath;
    std::filesystem::path embeddingPath;
    std::filesystem::path stopwordPath;  // empty -> embedded list
    std::filesystem::path outDir;
    std::vector<FeatureSpec> features;
    ChannelWeights weights;
    std::size_t topN = 10;
    double matchThreshold = 0.5;
    KSelectionMode kMode = KSelectionMode::Fixed;
    int k = 3;
    int kMax = 8;
    bool standardize = false;
    std::uint64_t seed = 0;
};

// Reads a JSON config; relative paths resolve against the config file's
// directory. Throws ParseError / SchemaError / ParameterError.
PipelineConfig loadConfig(const std::filesystem::path& path);
PipelineConfig parseConfig(const nlohmann::json& doc, const std::filesystem::path& baseDir);

// Normalized weighted arithmetic mean of the three channel scores.
double overallAssociation(double sMcq, double sTextGraph, double sTextVector,
                          const ChannelWeights& weights);

struct PairScores {
    std::string candidateA;
    std::string candidateB;
    double mcqGraph = 0.0;
    double textGraph = 0.0;
    double textVector = 0.0;
    double combined = 0.0;
};

// Per-candidate intermediate products of the association stages.
struct CandidateProfile {
    std::string candidateId;
    FeatureValues features;
    TokenList tokens;           // concatenated free-text answers, preprocessed
    ContextVector context;
    CandidateGraph mcqGraph;    // empty when no features configured
    CandidateGraph textGraph;   // empty when the candidate wrote no text
};

struct AssociationResult {
    std::vector<std::string> candidateIds;
    SimilarityMatrix matrix;
    std::vector<PairScores> pairs;  // unordered pairs, i < j
    std::vector<CandidateProfile> profiles;
    ChannelWeights weights;  // channel weights the combination used
};

std::vector<CandidateProfile> buildProfiles(const SurveyDataset& ds, const PipelineConfig& cfg);

// Three-channel cultural association across every unordered candidate pair.
AssociationResult associationMatrix(const SurveyDataset& ds, const PipelineConfig& cfg,
                                    const EmbeddingTable& table);

struct TeamAssignment {
    std::vector<std::vector<std::string>> teams;  // team id -> member ids
    int k = 0;
    std::string method;
    std::uint64_t seed = 0;
};

// Spectral clustering over the association matrix; team ids ordered by each
// team's smallest member index.
TeamAssignment formTeams(const SimilarityMatrix& sim,
                         const std::vector<std::string>& candidateIds, int k,
                         std::uint64_t seed);

struct AccuracyReport {
    double accuracy = 0.0;
    std::map<int, std::string> mapping;  // cluster id -> label under best map
    std::map<std::string, std::map<std::string, int>> confusion;  // label -> mapped label -> count
};

// Accuracy under the best one-to-one cluster/label mapping (exhaustive
// search; at most 8 distinct labels).
AccuracyReport evaluateAccuracy(const std::vector<int>& predicted,
                                const std::vector<std::string>& candidateIds,
                                const std::map<std::string, std::string>& labels);
AccuracyReport evaluateAccuracy(const TeamAssignment& teams,
                                const std::map<std::string, std::string>& labels);

struct RunSummary {
    std::filesystem::path manifestPath;
    int chosenK = 0;
    std::optional<double> accuracy;
    std::vector<std::string> artifacts;  // relative paths inside outDir
};

// Full pipeline: ingest, validate, encode, featurize, graphs, association,
// k-selection, comparison clustering, teams, optional accuracy. Writes every
// intermediate artifact plus manifest.json into cfg.outDir. Identical
// (config, seed, inputs) produce byte-identical outputs.
RunSummary runPipeline(const PipelineConfig& cfg);

}  // namespace affinity
