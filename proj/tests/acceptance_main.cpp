// Acceptance suite: end-to-end checks over the synthetic benchmark plus
// property suites for the numeric core. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affinity/clustering.hpp"
#include "affinity/error.hpp"
#include "affinity/graph.hpp"
#include "affinity/io.hpp"
#include "affinity/pipeline.hpp"
#include "affinity/rng.hpp"
#include "affinity/survey.hpp"
#include "affinity/text.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace affinity;

namespace {

struct Failure {
    std::vector<std::string> messages;

    void expect(bool condition, const std::string& what) {
        if (!condition) messages.push_back(what);
    }
    bool ok() const { return messages.empty(); }
};

std::filesystem::path workRoot() {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("affinity_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

std::map<std::string, std::string> snapshotTree(const std::filesystem::path& root) {
    std::map<std::string, std::string> tree;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        tree[std::filesystem::relative(entry.path(), root).generic_string()] =
            readFile(entry.path());
    }
    return tree;
}

// Shared across criteria 1, 7, 8 and 9.
struct BenchmarkRun {
    synthetic::SyntheticWorkspace workspace;
    PipelineConfig config;
    RunSummary summary;
    double seconds = 0.0;
};

BenchmarkRun runBenchmark(const std::filesystem::path& root) {
    synthetic::SyntheticSpec spec;  // 100 candidates, 3 prototypes, 10% noise
    spec.seed = 7;
    BenchmarkRun run;
    run.workspace = synthetic::writeSyntheticWorkspace(root / "benchmark", spec);
    run.config = loadConfig(run.workspace.configPath);

    const auto start = std::chrono::steady_clock::now();
    run.summary = runPipeline(run.config);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

bool criterion1(const BenchmarkRun& run, Failure& f) {
    f.expect(run.summary.accuracy.has_value(), "pipeline produced no accuracy report");
    if (run.summary.accuracy) {
        f.expect(*run.summary.accuracy >= 0.85,
                 "accuracy " + formatNumber(*run.summary.accuracy) + " < 0.85");
    }
    f.expect(run.seconds < 30.0,
             "pipeline took " + formatNumber(run.seconds) + " s (budget 30 s)");
    return f.ok();
}

bool criterion2(Failure& f) {
    Rng rng(20240812);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.nextIndex(199);   // <= 200 points
        const std::size_t dim = 1 + rng.nextIndex(10);  // <= 10 dims
        const int k = 1 + static_cast<int>(rng.nextIndex(6));
        PointMatrix points;
        for (std::size_t j = 0; j < dim; ++j) points.columns.push_back("x");
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(dim);
            for (auto& v : row) v = rng.nextDouble() * 10.0 - 5.0;
            points.rows.push_back(row);
            points.rowIds.push_back("p");
            labels.push_back(static_cast<int>(rng.nextIndex(k)));
        }
        const ClusterAssignment a{labels, k, "manual", 0};
        const double pairwise = dispersion(points, a);
        const double centroid = oracle::centroidWcss(points, labels);
        if (std::abs(pairwise - centroid) > 1e-9) {
            f.expect(false, "trial " + std::to_string(trial) + ": |" + formatNumber(pairwise) +
                                " - " + formatNumber(centroid) + "| > 1e-9");
            return false;
        }
    }
    return f.ok();
}

bool criterion3(Failure& f) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const PointMatrix points =
            synthetic::makeBlobs({{0, 0}, {10, 0}, {0, 10}}, 30, 0.5, seed);
        const int elbowK = selectKElbow(points, 8, seed).chosenK;
        const int silhouetteK = selectKSilhouette(points, 8, seed).chosenK;
        f.expect(elbowK == 3, "seed " + std::to_string(seed) + ": elbow chose " +
                                  std::to_string(elbowK));
        f.expect(silhouetteK == 3, "seed " + std::to_string(seed) + ": silhouette chose " +
                                       std::to_string(silhouetteK));
    }
    return f.ok();
}

bool criterion4(Failure& f) {
    Rng rng(424242);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t dim = 2 + rng.nextIndex(7);
        std::vector<double> a(dim), b(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            a[i] = rng.nextGaussian() * 3.0;
            b[i] = rng.nextGaussian() * 3.0;
        }
        const double ab = cosineSimilarity(a, b);
        const double ba = cosineSimilarity(b, a);
        f.expect(ab == ba, "trial " + std::to_string(trial) + ": asymmetric cosine");
        f.expect(std::abs(ab) <= 1.0 + 1e-12,
                 "trial " + std::to_string(trial) + ": |cos| = " + formatNumber(std::abs(ab)));

        const double alpha = 0.1 + rng.nextDouble() * 9.9;
        std::vector<double> scaled = a;
        for (double& v : scaled) v *= alpha;
        const double scaledCos = cosineSimilarity(scaled, b);
        f.expect(std::abs(scaledCos - ab) <= 1e-12,
                 "trial " + std::to_string(trial) + ": scale variance " +
                     formatNumber(std::abs(scaledCos - ab)));
        if (!f.ok()) return false;
    }
    return f.ok();
}

bool criterion5(Failure& f) {
    const synthetic::GraphRegime regime = synthetic::makeGraphRegime(99);
    const double threshold = 0.5;
    Rng rng(5150);
    for (int trial = 0; trial < 200; ++trial) {
        const CandidateGraph g1 = synthetic::randomGraph(rng, regime, 6);
        const CandidateGraph g2 = synthetic::randomGraph(rng, regime, 6);

        const double self1 = gamSimilarity(g1, g1, regime.table, threshold);
        f.expect(self1 == 1.0,
                 "trial " + std::to_string(trial) + ": self-similarity " + formatNumber(self1));

        const double forward = gamSimilarity(g1, g2, regime.table, threshold);
        const double backward = gamSimilarity(g2, g1, regime.table, threshold);
        f.expect(std::abs(forward - backward) <= 1e-12,
                 "trial " + std::to_string(trial) + ": asymmetry " +
                     formatNumber(std::abs(forward - backward)));

        std::vector<GraphNode> shuffled(g1.nodes());
        std::reverse(shuffled.begin(), shuffled.end());
        const double permuted = gamSimilarity(CandidateGraph(std::move(shuffled)), g2,
                                              regime.table, threshold);
        f.expect(permuted == forward,
                 "trial " + std::to_string(trial) + ": node order changed the score");

        const double best = oracle::bruteForceGamScore(g1, g2, regime.table, threshold);
        f.expect(best + 1e-12 >= forward,
                 "trial " + std::to_string(trial) + ": greedy exceeded the optimum");
        f.expect(best - forward <= 0.1,
                 "trial " + std::to_string(trial) + ": greedy gap " +
                     formatNumber(best - forward) + " > 0.1");
        if (!f.ok()) return false;
    }
    return f.ok();
}

bool criterion6(Failure& f) {
    Rng rng(606060);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.nextIndex(3));  // 2..4 blocks
        std::vector<std::size_t> sizes;
        std::vector<int> truth;
        SimilarityMatrix sim;
        {
            std::size_t total = 0;
            for (int b = 0; b < k; ++b) {
                const std::size_t size = 1 + rng.nextIndex(15);
                sizes.push_back(size);
                total += size;
            }
            sim = SimilarityMatrix(total);
            std::size_t offset = 0;
            for (int b = 0; b < k; ++b) {
                for (std::size_t i = 0; i < sizes[b]; ++i) {
                    truth.push_back(b);
                    for (std::size_t j = 0; j < sizes[b]; ++j) {
                        sim.set(offset + i, offset + j, 1.0);
                    }
                }
                offset += sizes[b];
            }
        }
        const std::uint64_t seed = rng.nextU64();
        const ClusterAssignment a = spectralCluster(sim, k, seed);
        if (randIndex(a.labels, truth) != 1.0) {
            f.expect(false, "trial " + std::to_string(trial) + " (k = " + std::to_string(k) +
                                "): blocks not recovered exactly");
            return false;
        }
    }
    return f.ok();
}

bool criterion7(const BenchmarkRun& run, Failure& f) {
    const SurveyDataset ds = loadSurvey(run.config.surveyPath);
    const EmbeddingTable table = EmbeddingTable::load(run.config.embeddingPath);
    const PointMatrix points = encodeMcq(ds, run.config.standardize);
    const AssociationResult assoc = associationMatrix(ds, run.config, table);

    std::vector<ClusterAssignment> assignments;
    assignments.push_back(kmeans(points, 3, run.config.seed));
    assignments.push_back(spectralCluster(assoc.matrix, 3, run.config.seed));
    assignments.push_back(agglomerativeAverage(assoc.matrix, 3));
    const AgreementReport agreement = compareMemberships(assignments);

    f.expect(agreement.methods.size() == 3, "expected 3 methods in the comparison");
    for (const auto& memberships : agreement.memberships) {
        f.expect(memberships.size() == 100, "membership column does not cover 100 candidates");
    }
    const double kmeansVsSpectral = agreement.randIndices[0][1];
    f.expect(kmeansVsSpectral >= 0.9, "kmeans vs spectral Rand index " +
                                          formatNumber(kmeansVsSpectral) + " < 0.9");

    // The emitted long-format table has one row per method and candidate.
    const std::string csv = readFile(run.config.outDir / "memberships.csv");
    const std::size_t rows = static_cast<std::size_t>(
        std::count(csv.begin(), csv.end(), '\n'));
    f.expect(rows == 1 + 3 * 100, "memberships.csv has " + std::to_string(rows) +
                                      " rows, expected 301");
    f.expect(std::filesystem::exists(run.config.outDir / "agreement.csv"),
             "agreement.csv missing");
    return f.ok();
}

bool criterion8(const BenchmarkRun& run, Failure& f) {
    const auto before = snapshotTree(run.config.outDir);
    runPipeline(run.config);
    const auto after = snapshotTree(run.config.outDir);
    f.expect(before.size() == after.size(), "output trees differ in file count");
    for (const auto& [path, bytes] : before) {
        auto it = after.find(path);
        if (it == after.end()) {
            f.expect(false, "file " + path + " missing after rerun");
            return false;
        }
        if (it->second != bytes) {
            f.expect(false, "file " + path + " differs between runs");
            return false;
        }
    }
    return f.ok();
}

bool criterion9(const BenchmarkRun& run, Failure& f) {
    const SurveyDataset ds = loadSurvey(run.config.surveyPath);
    const auto profiles = buildProfiles(ds, run.config);
    f.expect(!profiles.empty(), "no candidate profiles built");

    for (const auto& profile : profiles) {
        double sum = 0.0;
        for (std::size_t i = 0; i < profile.context.size(); ++i) {
            const auto& [term, score] = profile.context.entries[i];
            f.expect(score >= 0.0, profile.candidateId + ": negative score");
            if (i > 0) {
                const auto& [prevTerm, prevScore] = profile.context.entries[i - 1];
                f.expect(score <= prevScore, profile.candidateId + ": scores increase at " + term);
                if (score == prevScore) {
                    f.expect(prevTerm < term,
                             profile.candidateId + ": tie not broken lexicographically");
                }
            }
            sum += score;
        }
        f.expect(sum <= 1.0 + 1e-12,
                 profile.candidateId + ": scores sum to " + formatNumber(sum));

        // Extraction is deterministic.
        const ContextVector again = extractContextVector(profile.tokens, run.config.topN);
        f.expect(again.entries == profile.context.entries,
                 profile.candidateId + ": re-extraction differs");
        if (!f.ok()) return false;
    }
    return f.ok();
}

}  // namespace

int main() {
    const auto root = workRoot();

    int failures = 0;
    auto report = [&](int id, const std::string& name, bool passed, const Failure& f) {
        std::printf("[%s] criterion %d: %s\n", passed ? "PASS" : "FAIL", id, name.c_str());
        if (!passed) {
            for (const auto& message : f.messages) {
                std::printf("       %s\n", message.c_str());
            }
            ++failures;
        }
    };

    BenchmarkRun run;
    try {
        run = runBenchmark(root);
    } catch (const std::exception& e) {
        std::printf("[FAIL] benchmark pipeline crashed: %s\n", e.what());
        return 1;
    }

    {
        Failure f;
        report(1, "synthetic 100-candidate benchmark, accuracy >= 0.85 within 30 s",
               criterion1(run, f), f);
    }
    {
        Failure f;
        report(2, "pairwise dispersion equals centroid WCSS within 1e-9 on 100 datasets",
               criterion2(f), f);
    }
    {
        Failure f;
        report(3, "elbow and silhouette both select k = 3 on the 3-blob set, 20/20 seeds",
               criterion3(f), f);
    }
    {
        Failure f;
        report(4, "cosine symmetry, bound and scale invariance over 1000 pairs",
               criterion4(f), f);
    }
    {
        Failure f;
        report(5, "graph association: self = 1, symmetry, order invariance, greedy gap <= 0.1",
               criterion5(f), f);
    }
    {
        Failure f;
        report(6, "spectral clustering recovers 2-4 diagonal blocks exactly, 50 configs",
               criterion6(f), f);
    }
    {
        Failure f;
        report(7, "comparison report: 3 methods x 100 candidates, kmeans-spectral Rand >= 0.9",
               criterion7(run, f), f);
    }
    {
        Failure f;
        report(8, "identical config and seed give byte-identical output trees",
               criterion8(run, f), f);
    }
    {
        Failure f;
        report(9, "context vectors: non-increasing scores, sum <= 1, deterministic ties",
               criterion9(run, f), f);
    }

    std::filesystem::remove_all(root);
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
