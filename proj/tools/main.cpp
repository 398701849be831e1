#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "affinity/clustering.hpp"
#include "affinity/error.hpp"
#include "affinity/graph.hpp"
#include "affinity/io.hpp"
#include "affinity/pipeline.hpp"
#include "affinity/survey.hpp"
#include "affinity/text.hpp"

namespace {

using namespace affinity;

struct GlobalOptions {
    std::string configPath;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> outDir;
};

PipelineConfig configFor(const GlobalOptions& opts) {
    if (opts.configPath.empty()) throw ParameterError("--config <path> is required");
    PipelineConfig cfg = loadConfig(opts.configPath);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.outDir) cfg.outDir = std::filesystem::path(*opts.outDir).lexically_normal();
    return cfg;
}

void writeArtifact(const PipelineConfig& cfg, const std::string& name,
                   const std::string& content) {
    std::filesystem::create_directories((cfg.outDir / name).parent_path());
    writeFile(cfg.outDir / name, content);
    std::cout << "wrote " << (cfg.outDir / name).string() << "\n";
}

int resolveK(const PipelineConfig& cfg, const PointMatrix& points) {
    if (cfg.kMode == KSelectionMode::Elbow) return selectKElbow(points, cfg.kMax, cfg.seed).chosenK;
    if (cfg.kMode == KSelectionMode::Silhouette) {
        return selectKSilhouette(points, cfg.kMax, cfg.seed).chosenK;
    }
    return cfg.k;
}

int cmdValidate(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const ValidationReport report = validateDataset(ds);

    std::string csv = "candidate_id,question_id,severity,message\n";
    for (const auto& issue : report.issues) {
        csv += csvField(issue.candidateId) + ',' + csvField(issue.questionId) + ',' +
               (issue.severity == IssueSeverity::Hard ? "hard" : "soft") + ',' +
               csvField(issue.message) + '\n';
    }
    writeArtifact(cfg, "validation_report.csv", csv);

    std::cout << report.passingCandidates.size() << " candidates pass, "
              << report.failingCandidates.size() << " fail (" << report.issues.size()
              << " issues)\n";
    if (report.hasHardIssues()) {
        std::cerr << "[validate] dataset has blocking issues\n";
        return 1;
    }
    return 0;
}

int cmdEncode(const GlobalOptions& opts, bool standardize) {
    PipelineConfig cfg = configFor(opts);
    if (standardize) cfg.standardize = true;
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const PointMatrix points = encodeMcq(ds, cfg.standardize);
    std::ostringstream csv;
    writePointsCsv(points, csv);
    writeArtifact(cfg, "points.csv", csv.str());
    return 0;
}

int cmdFeaturize(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const auto profiles = buildProfiles(ds, cfg);

    std::string csv = "candidate_id";
    for (const auto& spec : cfg.features) csv += ',' + csvField(spec.name);
    csv += '\n';
    for (const auto& profile : profiles) {
        csv += csvField(profile.candidateId);
        for (const auto& [name, value] : profile.features) csv += ',' + formatNumber(value);
        csv += '\n';
    }
    writeArtifact(cfg, "features.csv", csv);
    return 0;
}

int cmdGraphs(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const auto profiles = buildProfiles(ds, cfg);

    auto writeGraph = [&](const CandidateGraph& g, const std::string& name) {
        writeArtifact(cfg, "graphs/" + name + ".dot", toDot(g, name));
        std::ostringstream matrix;
        writeCsv(graphMatrix(g), matrix);
        writeArtifact(cfg, "graphs/" + name + "_matrix.csv", matrix.str());
    };

    nlohmann::json graphs = nlohmann::json::object();
    for (const auto& profile : profiles) {
        nlohmann::json entry = nlohmann::json::object();
        if (!profile.mcqGraph.empty()) {
            entry["mcq"] = toJson(profile.mcqGraph);
            writeGraph(profile.mcqGraph, profile.candidateId + "_mcq");
        }
        if (!profile.textGraph.empty()) {
            entry["text"] = toJson(profile.textGraph);
            writeGraph(profile.textGraph, profile.candidateId + "_text");
        }
        graphs[profile.candidateId] = std::move(entry);
    }
    writeArtifact(cfg, "graphs.json", graphs.dump(2) + "\n");
    return 0;
}

int cmdAssociate(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const EmbeddingTable table = EmbeddingTable::load(cfg.embeddingPath);
    const AssociationResult assoc = associationMatrix(ds, cfg, table);

    std::string matrixCsv = "candidate_id";
    for (const auto& id : assoc.candidateIds) matrixCsv += ',' + csvField(id);
    matrixCsv += '\n';
    for (std::size_t i = 0; i < assoc.candidateIds.size(); ++i) {
        matrixCsv += csvField(assoc.candidateIds[i]);
        for (std::size_t j = 0; j < assoc.candidateIds.size(); ++j) {
            matrixCsv += ',' + formatNumber(assoc.matrix.at(i, j));
        }
        matrixCsv += '\n';
    }
    writeArtifact(cfg, "association.csv", matrixCsv);

    std::string channels = "candidate_a,candidate_b,mcq_graph,text_graph,text_vector,combined\n";
    for (const auto& pair : assoc.pairs) {
        channels += csvField(pair.candidateA) + ',' + csvField(pair.candidateB) + ',' +
                    formatNumber(pair.mcqGraph) + ',' + formatNumber(pair.textGraph) + ',' +
                    formatNumber(pair.textVector) + ',' + formatNumber(pair.combined) + '\n';
    }
    writeArtifact(cfg, "channels.csv", channels);
    return 0;
}

int cmdSelectK(const GlobalOptions& opts, const std::string& mode) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const PointMatrix points = encodeMcq(ds, cfg.standardize);

    std::vector<KSelectionReport> reports;
    if (mode == "elbow" || mode == "both") {
        reports.push_back(selectKElbow(points, cfg.kMax, cfg.seed));
    }
    if (mode == "silhouette" || mode == "both") {
        reports.push_back(selectKSilhouette(points, cfg.kMax, cfg.seed));
    }

    std::string csv = "method,k,statistic,chosen\n";
    for (const auto& report : reports) {
        for (const auto& [k, stat] : report.table) {
            csv += report.rule + ',' + std::to_string(k) + ',' + formatNumber(stat) + ',' +
                   (k == report.chosenK ? "yes" : "no") + '\n';
        }
        std::cout << report.rule << " selects k = " << report.chosenK << "\n";
    }
    writeArtifact(cfg, "k_selection.csv", csv);
    return 0;
}

int cmdCluster(const GlobalOptions& opts, const std::string& method) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const PointMatrix points = encodeMcq(ds, cfg.standardize);
    const int k = resolveK(cfg, points);

    ClusterAssignment assignment;
    if (method == "kmeans") {
        assignment = kmeans(points, k, cfg.seed);
    } else {
        const EmbeddingTable table = EmbeddingTable::load(cfg.embeddingPath);
        const AssociationResult assoc = associationMatrix(ds, cfg, table);
        assignment = method == "spectral" ? spectralCluster(assoc.matrix, k, cfg.seed)
                                          : agglomerativeAverage(assoc.matrix, k);
    }

    std::string csv = "method,candidate_id,cluster\n";
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
        csv += csvField(assignment.method) + ',' + csvField(ds.responses[i].candidateId) + ',' +
               std::to_string(assignment.labels[i]) + '\n';
    }
    writeArtifact(cfg, "assignments.csv", csv);
    std::cout << assignment.method << " produced " << assignment.k << " clusters\n";
    return 0;
}

int cmdCompare(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const EmbeddingTable table = EmbeddingTable::load(cfg.embeddingPath);
    const PointMatrix points = encodeMcq(ds, cfg.standardize);
    const AssociationResult assoc = associationMatrix(ds, cfg, table);
    const int k = resolveK(cfg, points);

    std::vector<ClusterAssignment> assignments;
    assignments.push_back(kmeans(points, k, cfg.seed));
    assignments.push_back(spectralCluster(assoc.matrix, k, cfg.seed));
    assignments.push_back(agglomerativeAverage(assoc.matrix, k));
    const AgreementReport agreement = compareMemberships(assignments);

    std::string memberships = "method,candidate_id,cluster\n";
    for (std::size_t m = 0; m < agreement.methods.size(); ++m) {
        for (std::size_t i = 0; i < assoc.candidateIds.size(); ++i) {
            memberships += csvField(agreement.methods[m]) + ',' +
                           csvField(assoc.candidateIds[i]) + ',' +
                           std::to_string(agreement.memberships[m][i]) + '\n';
        }
    }
    writeArtifact(cfg, "memberships.csv", memberships);

    std::string pairwise = "method_a,method_b,rand_index\n";
    for (std::size_t i = 0; i < agreement.methods.size(); ++i) {
        for (std::size_t j = i + 1; j < agreement.methods.size(); ++j) {
            pairwise += csvField(agreement.methods[i]) + ',' + csvField(agreement.methods[j]) +
                        ',' + formatNumber(agreement.randIndices[i][j]) + '\n';
        }
    }
    writeArtifact(cfg, "agreement.csv", pairwise);
    return 0;
}

int cmdTeams(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    const EmbeddingTable table = EmbeddingTable::load(cfg.embeddingPath);
    const PointMatrix points = encodeMcq(ds, cfg.standardize);
    const AssociationResult assoc = associationMatrix(ds, cfg, table);
    const int k = resolveK(cfg, points);
    const TeamAssignment teams = formTeams(assoc.matrix, assoc.candidateIds, k, cfg.seed);

    std::string csv = "team,candidate_id\n";
    for (std::size_t t = 0; t < teams.teams.size(); ++t) {
        for (const auto& member : teams.teams[t]) {
            csv += std::to_string(t) + ',' + csvField(member) + '\n';
        }
    }
    writeArtifact(cfg, "teams.csv", csv);
    std::cout << "formed " << teams.teams.size() << " teams\n";
    return 0;
}

int cmdEvaluate(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const SurveyDataset ds = loadSurvey(cfg.surveyPath);
    if (ds.labels.empty()) throw InputError("survey carries no ground-truth labels to evaluate");

    const EmbeddingTable table = EmbeddingTable::load(cfg.embeddingPath);
    const PointMatrix points = encodeMcq(ds, cfg.standardize);
    const AssociationResult assoc = associationMatrix(ds, cfg, table);
    const int k = resolveK(cfg, points);
    const TeamAssignment teams = formTeams(assoc.matrix, assoc.candidateIds, k, cfg.seed);
    const AccuracyReport report = evaluateAccuracy(teams, ds.labels);

    nlohmann::json out{{"accuracy", report.accuracy}, {"mapping", nlohmann::json::object()}};
    for (const auto& [cluster, label] : report.mapping) {
        out["mapping"][std::to_string(cluster)] = label;
    }
    writeArtifact(cfg, "accuracy.json", out.dump(2) + "\n");
    std::cout << "accuracy " << formatNumber(report.accuracy) << "\n";
    return 0;
}

int cmdRun(const GlobalOptions& opts) {
    const PipelineConfig cfg = configFor(opts);
    const RunSummary summary = runPipeline(cfg);
    std::cout << "pipeline complete: k = " << summary.chosenK;
    if (summary.accuracy) std::cout << ", accuracy = " << formatNumber(*summary.accuracy);
    std::cout << "\nmanifest: " << summary.manifestPath.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cultural association scoring and team formation from survey data"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions opts;
    std::uint64_t seedValue = 0;
    std::string outValue;
    app.add_option("--config", opts.configPath, "Pipeline configuration file (JSON)");
    auto* seedOpt = app.add_option("--seed", seedValue, "Override the configured seed");
    auto* outOpt = app.add_option("--out", outValue, "Override the configured output directory");

    bool standardize = false;
    std::string selectMode = "both";
    std::string clusterMethod = "kmeans";

    auto* validate = app.add_subcommand("validate", "Check survey structure and report issues");
    auto* encode = app.add_subcommand("encode", "Export the ordinal MCQ encoding as CSV");
    encode->add_flag("--standardize", standardize, "z-score each column");
    auto* featurize = app.add_subcommand("featurize", "Evaluate configured feature specs");
    auto* graphs = app.add_subcommand("graphs", "Export candidate context graphs (DOT + JSON)");
    auto* associate = app.add_subcommand("associate", "Compute the pairwise association matrix");
    auto* selectK = app.add_subcommand("select-k", "Choose k by elbow and/or silhouette");
    selectK->add_option("--mode", selectMode, "elbow | silhouette | both")
        ->check(CLI::IsMember({"elbow", "silhouette", "both"}));
    auto* cluster = app.add_subcommand("cluster", "Cluster candidates with one method");
    cluster->add_option("--method", clusterMethod, "kmeans | spectral | agglomerative")
        ->check(CLI::IsMember({"kmeans", "spectral", "agglomerative"}));
    auto* compare = app.add_subcommand("compare", "Compare memberships across methods");
    auto* teams = app.add_subcommand("teams", "Form teams from the association matrix");
    auto* evaluate = app.add_subcommand("evaluate", "Score teams against ground-truth labels");
    auto* run = app.add_subcommand("run", "Execute the full pipeline and write a manifest");

    CLI11_PARSE(app, argc, argv);

    if (seedOpt->count() > 0) opts.seed = seedValue;
    if (outOpt->count() > 0) opts.outDir = outValue;

    try {
        if (validate->parsed()) return cmdValidate(opts);
        if (encode->parsed()) return cmdEncode(opts, standardize);
        if (featurize->parsed()) return cmdFeaturize(opts);
        if (graphs->parsed()) return cmdGraphs(opts);
        if (associate->parsed()) return cmdAssociate(opts);
        if (selectK->parsed()) return cmdSelectK(opts, selectMode);
        if (cluster->parsed()) return cmdCluster(opts, clusterMethod);
        if (compare->parsed()) return cmdCompare(opts);
        if (teams->parsed()) return cmdTeams(opts);
        if (evaluate->parsed()) return cmdEvaluate(opts);
        if (run->parsed()) return cmdRun(opts);
    } catch (const affinity::PipelineError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const affinity::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
