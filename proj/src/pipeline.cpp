#include "affinity/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "affinity/error.hpp"
#include "affinity/io.hpp"

namespace affinity {

using nlohmann::json;

namespace {

std::filesystem::path resolvePath(const std::filesystem::path& baseDir, const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_absolute()) return p.lexically_normal();
    return (baseDir / p).lexically_normal();
}

FeatureSpec parseFeatureSpec(const json& obj, std::size_t index) {
    const std::string where = "features[" + std::to_string(index) + "]";
    if (!obj.is_object()) throw SchemaError(where + ": feature spec must be an object");

    FeatureSpec spec;
    if (!obj.contains("name") || !obj["name"].is_string()) {
        throw SchemaError(where + ": missing feature \"name\"");
    }
    spec.name = obj["name"].get<std::string>();

    if (!obj.contains("operands") || !obj["operands"].is_array()) {
        throw SchemaError(where + " (" + spec.name + "): missing \"operands\" array");
    }
    for (const auto& op : obj["operands"]) {
        if (!op.is_string()) throw SchemaError(where + " (" + spec.name + "): operands must be question ids");
        spec.operands.push_back(op.get<std::string>());
    }

    const std::string formula = obj.value("formula", std::string("difference_over_ratio"));
    if (formula == "difference_over_ratio") {
        spec.formula = FeatureFormula::DifferenceOverRatio;
        spec.groupRatio = obj.value("group_ratio", 1.0);
        if (!(spec.groupRatio > 0.0)) {
            throw ParameterError(where + " (" + spec.name + "): group_ratio must be positive");
        }
        if (spec.operands.size() != 2) {
            throw SchemaError(where + " (" + spec.name +
                              "): difference formula needs exactly two operands");
        }
    } else if (formula == "predicate") {
        spec.formula = FeatureFormula::Predicate;
        if (!obj.contains("accepted") || !obj["accepted"].is_object()) {
            throw SchemaError(where + " (" + spec.name + "): predicate needs an \"accepted\" map");
        }
        for (const auto& [qid, values] : obj["accepted"].items()) {
            if (!values.is_array()) {
                throw SchemaError(where + " (" + spec.name + "): accepted options must be arrays");
            }
            for (const auto& v : values) {
                if (!v.is_number_integer()) {
                    throw SchemaError(where + " (" + spec.name +
                                      "): accepted options must be integers");
                }
                spec.accepted[qid].insert(v.get<int>());
            }
        }
        for (const auto& qid : spec.operands) {
            if (!spec.accepted.count(qid)) {
                throw SchemaError(where + " (" + spec.name +
                                  "): operand \"" + qid + "\" has no accepted options");
            }
        }
    } else {
        throw SchemaError(where + " (" + spec.name + "): unknown formula \"" + formula + "\"");
    }
    return spec;
}

std::string joinedFreeText(const SurveyDataset& ds, const CandidateResponse& resp) {
    std::string text;
    for (const auto& q : ds.questions) {
        if (q.kind != QuestionKind::FreeText) continue;
        auto it = resp.answers.find(q.id);
        if (it == resp.answers.end()) continue;
        if (!std::holds_alternative<std::string>(it->second)) continue;
        if (!text.empty()) text += ' ';
        text += std::get<std::string>(it->second);
    }
    return text;
}

}  // namespace

PipelineConfig parseConfig(const json& doc, const std::filesystem::path& baseDir) {
    if (!doc.is_object()) throw SchemaError("config must be a JSON object");

    PipelineConfig cfg;
    if (!doc.contains("survey") || !doc["survey"].is_string()) {
        throw SchemaError("config: missing \"survey\" path");
    }
    cfg.surveyPath = resolvePath(baseDir, doc["survey"].get<std::string>());

    if (!doc.contains("embeddings") || !doc["embeddings"].is_string()) {
        throw SchemaError("config: missing \"embeddings\" path");
    }
    cfg.embeddingPath = resolvePath(baseDir, doc["embeddings"].get<std::string>());

    if (doc.contains("stopwords") && doc["stopwords"].is_string()) {
        cfg.stopwordPath = resolvePath(baseDir, doc["stopwords"].get<std::string>());
    }
    cfg.outDir = resolvePath(baseDir, doc.value("out", std::string("out")));

    if (doc.contains("features")) {
        const json& features = doc["features"];
        if (!features.is_array()) throw SchemaError("config: \"features\" must be an array");
        for (std::size_t i = 0; i < features.size(); ++i) {
            cfg.features.push_back(parseFeatureSpec(features[i], i));
        }
    }

    if (doc.contains("weights")) {
        const json& w = doc["weights"];
        if (!w.is_object()) throw SchemaError("config: \"weights\" must be an object");
        cfg.weights.mcqGraph = w.value("mcq_graph", 1.0);
        cfg.weights.textGraph = w.value("text_graph", 1.0);
        cfg.weights.textVector = w.value("text_vector", 1.0);
    }
    if (cfg.weights.mcqGraph < 0.0 || cfg.weights.textGraph < 0.0 ||
        cfg.weights.textVector < 0.0) {
        throw ParameterError("config: channel weights must be non-negative");
    }
    if (cfg.weights.mcqGraph + cfg.weights.textGraph + cfg.weights.textVector <= 0.0) {
        throw ParameterError("config: channel weights must not all be zero");
    }

    const long long topN = doc.value("top_n", 10LL);
    if (topN < 1) throw ParameterError("config: top_n must be at least 1");
    cfg.topN = static_cast<std::size_t>(topN);

    cfg.matchThreshold = doc.value("match_threshold", 0.5);
    if (cfg.matchThreshold < 0.0 || cfg.matchThreshold > 1.0) {
        throw ParameterError("config: match_threshold must lie in [0, 1]");
    }

    if (doc.contains("k")) {
        const json& k = doc["k"];
        if (!k.is_object()) throw SchemaError("config: \"k\" must be an object");
        const std::string mode = k.value("mode", std::string("fixed"));
        if (mode == "fixed") {
            cfg.kMode = KSelectionMode::Fixed;
        } else if (mode == "elbow") {
            cfg.kMode = KSelectionMode::Elbow;
        } else if (mode == "silhouette") {
            cfg.kMode = KSelectionMode::Silhouette;
        } else {
            throw SchemaError("config: unknown k-selection mode \"" + mode + "\"");
        }
        cfg.k = k.value("value", 3);
        cfg.kMax = k.value("max", 8);
        if (cfg.k < 1) throw ParameterError("config: k value must be at least 1");
        if (cfg.kMax < 2) throw ParameterError("config: k max must be at least 2");
    }

    cfg.standardize = doc.value("standardize", false);
    cfg.seed = doc.value("seed", 0ULL);
    return cfg;
}

PipelineConfig loadConfig(const std::filesystem::path& path) {
    const std::string raw = readFile(path);
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ParseError("config file " + path.string() + ": " + e.what());
    }
    return parseConfig(doc, std::filesystem::absolute(path).parent_path());
}

double overallAssociation(double sMcq, double sTextGraph, double sTextVector,
                          const ChannelWeights& weights) {
    const double total = weights.mcqGraph + weights.textGraph + weights.textVector;
    if (weights.mcqGraph < 0.0 || weights.textGraph < 0.0 || weights.textVector < 0.0 ||
        total <= 0.0) {
        throw ParameterError("channel weights must be non-negative and not all zero");
    }
    const double combined =
        (weights.mcqGraph * sMcq + weights.textGraph * sTextGraph +
         weights.textVector * sTextVector) /
        total;
    return std::clamp(combined, 0.0, 1.0);
}

std::vector<CandidateProfile> buildProfiles(const SurveyDataset& ds, const PipelineConfig& cfg) {
    PreprocessConfig pre = PreprocessConfig::standard();
    if (!cfg.stopwordPath.empty()) pre.stopwords = loadStopwords(cfg.stopwordPath);

    // Features always derive from the raw ordinal encoding; standardization
    // only affects the clustering view of the data.
    const PointMatrix raw = encodeMcq(ds, false);

    std::vector<CandidateProfile> profiles;
    profiles.reserve(ds.responses.size());
    for (std::size_t i = 0; i < ds.responses.size(); ++i) {
        CandidateProfile profile;
        profile.candidateId = ds.responses[i].candidateId;
        profile.features = deriveFeatures(raw.rows[i], raw.columns, cfg.features);
        profile.tokens = preprocess(joinedFreeText(ds, ds.responses[i]), pre);
        profile.context = extractContextVector(profile.tokens, cfg.topN);
        if (!profile.features.empty()) {
            profile.mcqGraph = buildGraph(profile.features, ContextVector{});
        }
        if (!profile.context.empty()) {
            profile.textGraph = buildGraph({}, profile.context);
        }
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

AssociationResult associationMatrix(const SurveyDataset& ds, const PipelineConfig& cfg,
                                    const EmbeddingTable& table) {
    AssociationResult result;
    result.weights = cfg.weights;
    result.profiles = buildProfiles(ds, cfg);
    for (const auto& profile : result.profiles) {
        result.candidateIds.push_back(profile.candidateId);
    }

    const std::size_t n = result.profiles.size();
    result.matrix = SimilarityMatrix(n);
    for (std::size_t i = 0; i < n; ++i) result.matrix.set(i, i, 1.0);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const CandidateProfile& a = result.profiles[i];
            const CandidateProfile& b = result.profiles[j];
            try {
                PairScores scores;
                scores.candidateA = a.candidateId;
                scores.candidateB = b.candidateId;
                // A pair with an empty graph on either side has no evidence
                // in that channel and scores 0 there.
                scores.mcqGraph = (!a.mcqGraph.empty() && !b.mcqGraph.empty())
                                      ? gamSimilarity(a.mcqGraph, b.mcqGraph, table,
                                                      cfg.matchThreshold)
                                      : 0.0;
                scores.textGraph = (!a.textGraph.empty() && !b.textGraph.empty())
                                       ? gamSimilarity(a.textGraph, b.textGraph, table,
                                                       cfg.matchThreshold)
                                       : 0.0;
                scores.textVector =
                    documentSimilarity(a.tokens, b.tokens, table, SimilarityMode::Hybrid);
                scores.combined = overallAssociation(scores.mcqGraph, scores.textGraph,
                                                     scores.textVector, cfg.weights);

                result.matrix.set(i, j, scores.combined);
                result.matrix.set(j, i, scores.combined);
                result.pairs.push_back(std::move(scores));
            } catch (const Error& e) {
                throw InputError("association of pair (" + a.candidateId + ", " + b.candidateId +
                                 "): " + e.what());
            }
        }
    }
    return result;
}

TeamAssignment formTeams(const SimilarityMatrix& sim,
                         const std::vector<std::string>& candidateIds, int k,
                         std::uint64_t seed) {
    if (candidateIds.size() != sim.size()) {
        throw InputError("candidate id list does not match the similarity matrix size");
    }
    const ClusterAssignment assignment = spectralCluster(sim, k, seed);

    const int teamCount = assignment.labels.empty()
                              ? 0
                              : *std::max_element(assignment.labels.begin(),
                                                  assignment.labels.end()) + 1;
    std::vector<std::vector<std::string>> teams(teamCount);
    for (std::size_t i = 0; i < candidateIds.size(); ++i) {
        teams[assignment.labels[i]].push_back(candidateIds[i]);
    }
    // Team ids follow the smallest member index, not the arbitrary spectral
    // cluster ids.
    std::vector<std::size_t> firstMember(teamCount, candidateIds.size());
    for (std::size_t i = 0; i < candidateIds.size(); ++i) {
        const auto team = static_cast<std::size_t>(assignment.labels[i]);
        firstMember[team] = std::min(firstMember[team], i);
    }
    std::vector<std::size_t> order(teamCount);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return firstMember[a] < firstMember[b]; });

    TeamAssignment out;
    for (std::size_t t : order) out.teams.push_back(std::move(teams[t]));
    out.k = teamCount;
    out.method = assignment.method;
    out.seed = seed;
    return out;
}

namespace {

constexpr std::size_t kMaxMappingSide = 8;  // exhaustive-search bound

}  // namespace

AccuracyReport evaluateAccuracy(const std::vector<int>& predicted,
                                const std::vector<std::string>& candidateIds,
                                const std::map<std::string, std::string>& labels) {
    if (predicted.size() != candidateIds.size()) {
        throw InputError("prediction does not cover the candidate list");
    }

    std::vector<std::string> truth(candidateIds.size());
    for (std::size_t i = 0; i < candidateIds.size(); ++i) {
        auto it = labels.find(candidateIds[i]);
        if (it == labels.end()) {
            throw InputError("candidate \"" + candidateIds[i] + "\" has no ground-truth label");
        }
        truth[i] = it->second;
    }

    std::vector<std::string> labelNames;
    for (const auto& t : truth) {
        if (std::find(labelNames.begin(), labelNames.end(), t) == labelNames.end()) {
            labelNames.push_back(t);
        }
    }
    std::sort(labelNames.begin(), labelNames.end());

    std::vector<int> clusterIds;
    for (int c : predicted) {
        if (std::find(clusterIds.begin(), clusterIds.end(), c) == clusterIds.end()) {
            clusterIds.push_back(c);
        }
    }
    std::sort(clusterIds.begin(), clusterIds.end());

    if (labelNames.size() > kMaxMappingSide) {
        throw ParameterError("accuracy evaluation supports at most 8 distinct labels, got " +
                             std::to_string(labelNames.size()));
    }
    if (clusterIds.size() > kMaxMappingSide) {
        throw ParameterError("accuracy evaluation supports at most 8 distinct clusters, got " +
                             std::to_string(clusterIds.size()));
    }

    // Exhaustive search over one-to-one cluster -> label mappings, padded
    // with -1 (unmapped) when there are more clusters than labels.
    std::vector<int> slots(std::max(clusterIds.size(), labelNames.size()));
    std::iota(slots.begin(), slots.end(), 0);
    for (std::size_t i = labelNames.size(); i < slots.size(); ++i) slots[i] = -1;
    std::sort(slots.begin(), slots.end());

    std::size_t bestMatches = 0;
    std::vector<int> bestSlots(slots.begin(), slots.begin() + clusterIds.size());
    do {
        std::size_t matches = 0;
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            const auto pos = std::lower_bound(clusterIds.begin(), clusterIds.end(), predicted[i]) -
                             clusterIds.begin();
            const int labelIdx = slots[static_cast<std::size_t>(pos)];
            if (labelIdx >= 0 && labelNames[static_cast<std::size_t>(labelIdx)] == truth[i]) {
                ++matches;
            }
        }
        if (matches > bestMatches) {
            bestMatches = matches;
            bestSlots.assign(slots.begin(), slots.begin() + clusterIds.size());
        }
    } while (std::next_permutation(slots.begin(), slots.end()));

    AccuracyReport report;
    report.accuracy = predicted.empty()
                          ? 0.0
                          : static_cast<double>(bestMatches) / static_cast<double>(predicted.size());
    for (std::size_t i = 0; i < clusterIds.size(); ++i) {
        const int labelIdx = bestSlots[i];
        if (labelIdx >= 0) report.mapping[clusterIds[i]] = labelNames[static_cast<std::size_t>(labelIdx)];
    }
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        auto mapped = report.mapping.find(predicted[i]);
        const std::string predictedLabel =
            mapped != report.mapping.end() ? mapped->second
                                           : "cluster_" + std::to_string(predicted[i]);
        report.confusion[truth[i]][predictedLabel] += 1;
    }
    return report;
}

AccuracyReport evaluateAccuracy(const TeamAssignment& teams,
                                const std::map<std::string, std::string>& labels) {
    std::vector<int> predicted;
    std::vector<std::string> ids;
    for (std::size_t t = 0; t < teams.teams.size(); ++t) {
        for (const auto& member : teams.teams[t]) {
            predicted.push_back(static_cast<int>(t));
            ids.push_back(member);
        }
    }
    return evaluateAccuracy(predicted, ids, labels);
}

// ---------------------------------------------------------------------------
// Full pipeline run
// ---------------------------------------------------------------------------

namespace {

std::string validationCsv(const ValidationReport& report) {
    std::string csv = "candidate_id,question_id,severity,message\n";
    for (const auto& issue : report.issues) {
        csv += csvField(issue.candidateId) + ',' + csvField(issue.questionId) + ',' +
               (issue.severity == IssueSeverity::Hard ? "hard" : "soft") + ',' +
               csvField(issue.message) + '\n';
    }
    return csv;
}

std::string featuresCsv(const std::vector<CandidateProfile>& profiles,
                        const std::vector<FeatureSpec>& specs) {
    std::string csv = "candidate_id";
    for (const auto& spec : specs) csv += ',' + csvField(spec.name);
    csv += '\n';
    for (const auto& profile : profiles) {
        csv += csvField(profile.candidateId);
        for (const auto& [name, value] : profile.features) csv += ',' + formatNumber(value);
        csv += '\n';
    }
    return csv;
}

std::string contextVectorsCsv(const std::vector<CandidateProfile>& profiles) {
    std::string csv = "candidate_id,term,score\n";
    for (const auto& profile : profiles) {
        for (const auto& [term, score] : profile.context.entries) {
            csv += csvField(profile.candidateId) + ',' + csvField(term) + ',' +
                   formatNumber(score) + '\n';
        }
    }
    return csv;
}

std::string associationCsv(const AssociationResult& assoc) {
    std::string csv = "candidate_id";
    for (const auto& id : assoc.candidateIds) csv += ',' + csvField(id);
    csv += '\n';
    for (std::size_t i = 0; i < assoc.candidateIds.size(); ++i) {
        csv += csvField(assoc.candidateIds[i]);
        for (std::size_t j = 0; j < assoc.candidateIds.size(); ++j) {
            csv += ',' + formatNumber(assoc.matrix.at(i, j));
        }
        csv += '\n';
    }
    return csv;
}

std::string channelsCsv(const AssociationResult& assoc) {
    std::string csv = "candidate_a,candidate_b,mcq_graph,text_graph,text_vector,combined\n";
    for (const auto& pair : assoc.pairs) {
        csv += csvField(pair.candidateA) + ',' + csvField(pair.candidateB) + ',' +
               formatNumber(pair.mcqGraph) + ',' + formatNumber(pair.textGraph) + ',' +
               formatNumber(pair.textVector) + ',' + formatNumber(pair.combined) + '\n';
    }
    return csv;
}

std::string kSelectionCsv(const std::vector<KSelectionReport>& reports) {
    std::string csv = "method,k,statistic,chosen\n";
    for (const auto& report : reports) {
        for (const auto& [k, stat] : report.table) {
            csv += report.rule + ',' + std::to_string(k) + ',' + formatNumber(stat) + ',' +
                   (k == report.chosenK ? "yes" : "no") + '\n';
        }
    }
    return csv;
}

std::string membershipsCsv(const AgreementReport& agreement,
                           const std::vector<std::string>& candidateIds) {
    std::string csv = "method,candidate_id,cluster\n";
    for (std::size_t m = 0; m < agreement.methods.size(); ++m) {
        for (std::size_t i = 0; i < candidateIds.size(); ++i) {
            csv += csvField(agreement.methods[m]) + ',' + csvField(candidateIds[i]) + ',' +
                   std::to_string(agreement.memberships[m][i]) + '\n';
        }
    }
    return csv;
}

std::string agreementCsv(const AgreementReport& agreement) {
    std::string csv = "method_a,method_b,rand_index\n";
    for (std::size_t i = 0; i < agreement.methods.size(); ++i) {
        for (std::size_t j = i + 1; j < agreement.methods.size(); ++j) {
            csv += csvField(agreement.methods[i]) + ',' + csvField(agreement.methods[j]) + ',' +
                   formatNumber(agreement.randIndices[i][j]) + '\n';
        }
    }
    return csv;
}

std::string teamsCsv(const TeamAssignment& teams) {
    std::string csv = "team,candidate_id\n";
    for (std::size_t t = 0; t < teams.teams.size(); ++t) {
        for (const auto& member : teams.teams[t]) {
            csv += std::to_string(t) + ',' + csvField(member) + '\n';
        }
    }
    return csv;
}

std::string confusionCsv(const AccuracyReport& report) {
    std::string csv = "true_label,predicted_label,count\n";
    for (const auto& [trueLabel, row] : report.confusion) {
        for (const auto& [predictedLabel, count] : row) {
            csv += csvField(trueLabel) + ',' + csvField(predictedLabel) + ',' +
                   std::to_string(count) + '\n';
        }
    }
    return csv;
}

json configEcho(const PipelineConfig& cfg) {
    json features = json::array();
    for (const auto& spec : cfg.features) {
        json f{{"name", spec.name},
               {"operands", spec.operands},
               {"formula", spec.formula == FeatureFormula::DifferenceOverRatio
                               ? "difference_over_ratio"
                               : "predicate"}};
        if (spec.formula == FeatureFormula::DifferenceOverRatio) {
            f["group_ratio"] = spec.groupRatio;
        } else {
            json accepted = json::object();
            for (const auto& [qid, values] : spec.accepted) {
                accepted[qid] = std::vector<int>(values.begin(), values.end());
            }
            f["accepted"] = std::move(accepted);
        }
        features.push_back(std::move(f));
    }

    const char* mode = cfg.kMode == KSelectionMode::Fixed
                           ? "fixed"
                           : (cfg.kMode == KSelectionMode::Elbow ? "elbow" : "silhouette");
    return json{{"survey", cfg.surveyPath.string()},
                {"embeddings", cfg.embeddingPath.string()},
                {"stopwords", cfg.stopwordPath.empty() ? json(nullptr)
                                                       : json(cfg.stopwordPath.string())},
                {"out", cfg.outDir.string()},
                {"features", std::move(features)},
                {"weights",
                 {{"mcq_graph", cfg.weights.mcqGraph},
                  {"text_graph", cfg.weights.textGraph},
                  {"text_vector", cfg.weights.textVector}}},
                {"top_n", cfg.topN},
                {"match_threshold", cfg.matchThreshold},
                {"k", {{"mode", mode}, {"value", cfg.k}, {"max", cfg.kMax}}},
                {"standardize", cfg.standardize},
                {"seed", cfg.seed}};
}

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path outDir) : outDir_(std::move(outDir)) {
        std::filesystem::create_directories(outDir_);
    }

    void write(const std::string& relative, const std::string& content) {
        const std::filesystem::path full = outDir_ / relative;
        std::filesystem::create_directories(full.parent_path());
        writeFile(full, content);
        artifacts_.push_back(relative);
    }

    const std::vector<std::string>& artifacts() const { return artifacts_; }
    const std::filesystem::path& outDir() const { return outDir_; }

private:
    std::filesystem::path outDir_;
    std::vector<std::string> artifacts_;
};

}  // namespace

RunSummary runPipeline(const PipelineConfig& cfg) {
    ArtifactWriter writer(cfg.outDir);
    json manifest{{"status", "running"}, {"config", configEcho(cfg)}};

    std::string stage = "ingest";
    auto fail = [&](const std::string& cause) -> PipelineError {
        manifest["status"] = "failed";
        manifest["failed_stage"] = stage;
        manifest["error"] = cause;
        manifest["artifacts"] = writer.artifacts();
        manifest["partial"] = true;
        writeFile(writer.outDir() / "manifest.json", manifest.dump(2) + "\n");
        return PipelineError(stage, cause);
    };

    try {
        // Ingest + validate.
        const SurveyDataset ds = loadSurvey(cfg.surveyPath);
        manifest["candidates"] = ds.responses.size();
        manifest["questions"] = ds.questions.size();

        stage = "validate";
        const ValidationReport validation = validateDataset(ds);
        writer.write("validation_report.csv", validationCsv(validation));
        manifest["validation"] = {{"issues", validation.issues.size()},
                                  {"passing", validation.passingCandidates.size()},
                                  {"failing", validation.failingCandidates.size()}};
        if (validation.hasHardIssues()) {
            throw InputError("dataset failed validation with blocking issues; see "
                             "validation_report.csv");
        }

        stage = "load_embeddings";
        const EmbeddingTable table = EmbeddingTable::load(cfg.embeddingPath);

        stage = "encode";
        const PointMatrix points = encodeMcq(ds, cfg.standardize);
        {
            std::ostringstream csv;
            writePointsCsv(points, csv);
            writer.write("points.csv", csv.str());
        }

        stage = "associate";
        const AssociationResult assoc = associationMatrix(ds, cfg, table);
        writer.write("features.csv", featuresCsv(assoc.profiles, cfg.features));
        writer.write("context_vectors.csv", contextVectorsCsv(assoc.profiles));
        {
            json graphs = json::object();
            for (const auto& profile : assoc.profiles) {
                json entry = json::object();
                if (!profile.mcqGraph.empty()) {
                    entry["mcq"] = toJson(profile.mcqGraph);
                    writer.write("graphs/" + profile.candidateId + "_mcq.dot",
                                 toDot(profile.mcqGraph, profile.candidateId + "_mcq"));
                }
                if (!profile.textGraph.empty()) {
                    entry["text"] = toJson(profile.textGraph);
                    writer.write("graphs/" + profile.candidateId + "_text.dot",
                                 toDot(profile.textGraph, profile.candidateId + "_text"));
                }
                graphs[profile.candidateId] = std::move(entry);
            }
            writer.write("graphs.json", graphs.dump(2) + "\n");
        }
        writer.write("association.csv", associationCsv(assoc));
        writer.write("channels.csv", channelsCsv(assoc));

        stage = "select_k";
        int k = cfg.k;
        std::vector<KSelectionReport> kReports;
        if (cfg.kMode == KSelectionMode::Elbow) {
            kReports.push_back(selectKElbow(points, cfg.kMax, cfg.seed));
            k = kReports.back().chosenK;
        } else if (cfg.kMode == KSelectionMode::Silhouette) {
            kReports.push_back(selectKSilhouette(points, cfg.kMax, cfg.seed));
            k = kReports.back().chosenK;
        }
        if (!kReports.empty()) writer.write("k_selection.csv", kSelectionCsv(kReports));
        manifest["chosen_k"] = k;

        stage = "cluster";
        // PCA view of the encoded answers, for eyeballing the cluster
        // structure against the association-based methods.
        if (!points.rows.empty() && !points.columns.empty()) {
            const int components =
                static_cast<int>(std::min<std::size_t>(2, std::min(points.rowCount(),
                                                                   points.columnCount())));
            const PcaResult pcaResult = pca(points, components);
            std::string csv = "candidate_id";
            for (int c = 0; c < components; ++c) csv += ",pc" + std::to_string(c + 1);
            csv += '\n';
            for (std::size_t i = 0; i < points.rowCount(); ++i) {
                csv += csvField(points.rowIds[i]);
                for (int c = 0; c < components; ++c) {
                    double coordinate = 0.0;
                    for (std::size_t j = 0; j < points.columnCount(); ++j) {
                        coordinate += (points.rows[i][j] - pcaResult.mean[j]) *
                                      pcaResult.components[c][j];
                    }
                    csv += ',' + formatNumber(coordinate);
                }
                csv += '\n';
            }
            writer.write("pca_projection.csv", csv);
            manifest["pca_variance_ratios"] = pcaResult.explainedVarianceRatios;
        }

        std::vector<ClusterAssignment> assignments;
        assignments.push_back(kmeans(points, k, cfg.seed));
        assignments.push_back(spectralCluster(assoc.matrix, k, cfg.seed));
        assignments.push_back(agglomerativeAverage(assoc.matrix, k));
        const AgreementReport agreement = compareMemberships(assignments);
        writer.write("memberships.csv", membershipsCsv(agreement, assoc.candidateIds));
        writer.write("agreement.csv", agreementCsv(agreement));
        manifest["comparison_methods"] = {
            {{"method", "kmeans"}, {"role", "primary"}},
            {{"method", "spectral"}, {"role", "primary"}},
            {{"method", "agglomerative_average"}, {"role", "auxiliary"}},
        };

        stage = "teams";
        const TeamAssignment teams = formTeams(assoc.matrix, assoc.candidateIds, k, cfg.seed);
        writer.write("teams.csv", teamsCsv(teams));

        RunSummary summary;
        summary.chosenK = k;

        if (!ds.labels.empty()) {
            stage = "evaluate";
            const AccuracyReport accuracy = evaluateAccuracy(teams, ds.labels);
            json accuracyJson{{"accuracy", accuracy.accuracy}, {"mapping", json::object()}};
            for (const auto& [cluster, label] : accuracy.mapping) {
                accuracyJson["mapping"][std::to_string(cluster)] = label;
            }
            writer.write("accuracy.json", accuracyJson.dump(2) + "\n");
            writer.write("confusion.csv", confusionCsv(accuracy));
            manifest["accuracy"] = accuracy.accuracy;
            summary.accuracy = accuracy.accuracy;
        }

        stage = "manifest";
        manifest["status"] = "complete";
        manifest["partial"] = false;
        manifest["artifacts"] = writer.artifacts();
        writeFile(writer.outDir() / "manifest.json", manifest.dump(2) + "\n");

        summary.manifestPath = writer.outDir() / "manifest.json";
        summary.artifacts = writer.artifacts();
        summary.artifacts.push_back("manifest.json");
        return summary;
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw fail(e.what());
    } catch (const std::exception& e) {
        throw fail(e.what());
    }
}

}  // namespace affinity
