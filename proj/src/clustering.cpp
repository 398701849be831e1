#include "affinity/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "affinity/error.hpp"
#include "affinity/rng.hpp"

namespace affinity {

namespace {

constexpr int kMaxLloydIterations = 300;
constexpr int kRestarts = 10;
constexpr double kDegenerateDispersion = 1e-9;
constexpr double kIsolatedSelfSimilarity = 1e-12;
constexpr double kSymmetryTolerance = 1e-9;

double squaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

// Centroid-route objective used internally to rank restarts.
double centroidObjective(const PointMatrix& points, const std::vector<int>& labels, int k) {
    if (points.rows.empty()) return 0.0;
    const std::size_t dim = points.rows.front().size();
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows.size(); ++i) {
        const int c = labels[i];
        for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points.rows[i][j];
        ++counts[c];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
    }
    double objective = 0.0;
    for (std::size_t i = 0; i < points.rows.size(); ++i) {
        objective += squaredDistance(points.rows[i], sums[labels[i]]);
    }
    return objective;
}

int nearestCentroid(const std::vector<double>& point,
                    const std::vector<std::vector<double>>& centroids) {
    int best = 0;
    double bestDist = squaredDistance(point, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = squaredDistance(point, centroids[c]);
        if (d < bestDist) {  // strict: ties stay with the lowest index
            bestDist = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<std::vector<double>> kmeansPlusPlusInit(const PointMatrix& points, int k, Rng& rng) {
    const std::size_t n = points.rows.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points.rows[rng.nextIndex(n)]);

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squaredDistance(points.rows[i], centroids[0]);

    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.nextIndex(n);
        } else {
            const double r = rng.nextDouble() * total;
            double cumulative = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += d2[i];
                if (cumulative > r) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(points.rows[pick]);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squaredDistance(points.rows[i], centroids.back()));
        }
    }
    return centroids;
}

// Relabels so that used cluster ids form a dense prefix, preserving the
// numeric order of the original ids. A no-op unless some cluster is empty.
void compactLabels(std::vector<int>& labels, int k) {
    std::vector<int> remap(k, -1);
    for (int label : labels) remap[label] = 0;
    int next = 0;
    for (int c = 0; c < k; ++c) {
        if (remap[c] == 0) remap[c] = next++;
    }
    for (int& label : labels) label = remap[label];
}

std::vector<int> lloyd(const PointMatrix& points, int k, Rng& rng,
                       std::vector<double>* objectiveTrace) {
    const std::size_t n = points.rows.size();
    auto centroids = kmeansPlusPlusInit(points, k, rng);

    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) labels[i] = nearestCentroid(points.rows[i], centroids);
    if (objectiveTrace) objectiveTrace->push_back(centroidObjective(points, labels, k));

    const std::size_t dim = points.rows.front().size();
    for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dim; ++j) sums[labels[i]][j] += points.rows[i][j];
            ++counts[labels[i]];
        }

        std::vector<bool> reseeded(n, false);
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < dim; ++j) {
                    centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
                }
            } else {
                // Deterministic reseed: move the centroid onto the point
                // farthest from its current centroid.
                std::size_t farthest = 0;
                double bestDist = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (reseeded[i]) continue;
                    const double d = squaredDistance(points.rows[i], centroids[labels[i]]);
                    if (d > bestDist) {
                        bestDist = d;
                        farthest = i;
                    }
                }
                centroids[c] = points.rows[farthest];
                reseeded[farthest] = true;
            }
        }

        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = nearestCentroid(points.rows[i], centroids);
        if (objectiveTrace) objectiveTrace->push_back(centroidObjective(points, next, k));
        if (next == labels) break;
        labels = std::move(next);
    }
    return labels;
}

ClusterAssignment bestOfRestarts(const PointMatrix& points, int k, std::uint64_t seed) {
    ClusterAssignment best;
    double bestObjective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < kRestarts; ++r) {
        ClusterAssignment candidate = kmeans(points, k, mixSeed(seed, static_cast<std::uint64_t>(r)));
        const double objective = centroidObjective(points, candidate.labels, k);
        if (objective < bestObjective) {
            bestObjective = objective;
            best = std::move(candidate);
        }
    }
    return best;
}

bool allPointsIdentical(const PointMatrix& points) {
    for (std::size_t i = 1; i < points.rows.size(); ++i) {
        if (points.rows[i] != points.rows.front()) return false;
    }
    return true;
}

double binom2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

ClusterAssignment kmeans(const PointMatrix& points, int k, std::uint64_t seed,
                         std::vector<double>* objectiveTrace) {
    const std::size_t n = points.rows.size();
    if (k < 1) throw ParameterError("k must be at least 1");
    if (static_cast<std::size_t>(k) > n) {
        throw ParameterError("k = " + std::to_string(k) + " exceeds the number of points " +
                             std::to_string(n));
    }

    Rng rng(seed);
    ClusterAssignment out;
    out.labels = lloyd(points, k, rng, objectiveTrace);
    compactLabels(out.labels, k);
    out.k = k;
    out.method = "kmeans";
    out.seed = seed;
    return out;
}

double dispersion(const PointMatrix& points, const ClusterAssignment& a) {
    if (a.labels.size() != points.rows.size()) {
        throw InputError("assignment does not cover the point set");
    }

    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < a.labels.size(); ++i) clusters[a.labels[i]].push_back(i);

    double w = 0.0;
    for (const auto& [cluster, members] : clusters) {
        double d = 0.0;
        for (std::size_t x : members) {
            for (std::size_t y : members) {
                d += squaredDistance(points.rows[x], points.rows[y]);
            }
        }
        w += d / (2.0 * static_cast<double>(members.size()));
    }
    return w;
}

KSelectionReport selectKElbow(const PointMatrix& points, int kMax, std::uint64_t seed) {
    if (kMax < 3) throw ParameterError("elbow selection needs k_max >= 3");
    if (points.rows.size() < static_cast<std::size_t>(kMax)) {
        throw ParameterError("elbow selection needs at least k_max points");
    }

    KSelectionReport report;
    report.rule = "elbow";
    std::vector<double> w(kMax + 1, 0.0);
    for (int k = 1; k <= kMax; ++k) {
        const ClusterAssignment best = bestOfRestarts(points, k, mixSeed(seed, 1000ULL + k));
        w[k] = dispersion(points, best);
        report.table.emplace_back(k, w[k]);
    }

    if (w[1] < kDegenerateDispersion) {
        report.chosenK = 1;
        return report;
    }

    int bestK = 2;
    double bestCurvature = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= kMax - 1; ++k) {
        const double curvature = w[k - 1] - 2.0 * w[k] + w[k + 1];
        if (curvature > bestCurvature) {
            bestCurvature = curvature;
            bestK = k;
        }
    }
    report.chosenK = bestK;
    return report;
}

double meanSilhouette(const PointMatrix& points, const ClusterAssignment& a) {
    const std::size_t n = points.rows.size();
    if (a.labels.size() != n) throw InputError("assignment does not cover the point set");

    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters[a.labels[i]].push_back(i);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& own = clusters.at(a.labels[i]);
        if (own.size() <= 1) continue;  // singleton contributes 0

        double intra = 0.0;
        for (std::size_t j : own) {
            if (j != i) intra += std::sqrt(squaredDistance(points.rows[i], points.rows[j]));
        }
        const double aScore = intra / static_cast<double>(own.size() - 1);

        double bScore = std::numeric_limits<double>::infinity();
        for (const auto& [cluster, members] : clusters) {
            if (cluster == a.labels[i] || members.empty()) continue;
            double inter = 0.0;
            for (std::size_t j : members) {
                inter += std::sqrt(squaredDistance(points.rows[i], points.rows[j]));
            }
            bScore = std::min(bScore, inter / static_cast<double>(members.size()));
        }
        if (!std::isfinite(bScore)) continue;  // single cluster overall

        const double denom = std::max(aScore, bScore);
        if (denom > 0.0) total += (bScore - aScore) / denom;
    }
    return total / static_cast<double>(n);
}

KSelectionReport selectKSilhouette(const PointMatrix& points, int kMax, std::uint64_t seed) {
    if (kMax < 2) throw ParameterError("silhouette selection needs k_max >= 2");
    if (points.rows.size() <= static_cast<std::size_t>(kMax)) {
        throw ParameterError("silhouette selection needs more than k_max points");
    }
    if (allPointsIdentical(points)) {
        throw InputError("silhouette selection is undefined when all points are identical");
    }

    KSelectionReport report;
    report.rule = "silhouette";
    int bestK = 2;
    double bestScore = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= kMax; ++k) {
        const ClusterAssignment best = bestOfRestarts(points, k, mixSeed(seed, 2000ULL + k));
        const double score = meanSilhouette(points, best);
        report.table.emplace_back(k, score);
        if (score > bestScore) {  // strict: ties keep the smaller k
            bestScore = score;
            bestK = k;
        }
    }
    report.chosenK = bestK;
    return report;
}

ClusterAssignment spectralCluster(const SimilarityMatrix& sim, int k, std::uint64_t seed) {
    const std::size_t n = sim.size();
    if (k < 1) throw ParameterError("k must be at least 1");
    if (static_cast<std::size_t>(k) > n) {
        throw ParameterError("k = " + std::to_string(k) + " exceeds the matrix size " +
                             std::to_string(n));
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (sim.at(i, j) < 0.0) {
                throw InputError("similarity matrix has a negative entry at (" +
                                 std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            if (std::abs(sim.at(i, j) - sim.at(j, i)) > kSymmetryTolerance) {
                throw InputError("similarity matrix is not symmetric at (" + std::to_string(i) +
                                 ", " + std::to_string(j) + ")");
            }
        }
    }

    Eigen::MatrixXd s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            s(i, j) = 0.5 * (sim.at(i, j) + sim.at(j, i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (s.row(i).sum() <= 0.0) s(i, i) = kIsolatedSelfSimilarity;
    }

    Eigen::VectorXd dInvSqrt(n);
    for (std::size_t i = 0; i < n; ++i) dInvSqrt(i) = 1.0 / std::sqrt(s.row(i).sum());

    Eigen::MatrixXd laplacian =
        Eigen::MatrixXd::Identity(n, n) - dInvSqrt.asDiagonal() * s * dInvSqrt.asDiagonal();
    // Symmetrize away the last few ulps so the solver sees an exact
    // self-adjoint problem.
    laplacian = 0.5 * (laplacian + laplacian.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success) {
        throw InputError("eigendecomposition of the normalized Laplacian failed");
    }
    Eigen::MatrixXd embedding = solver.eigenvectors().leftCols(k);

    PointMatrix embedded;
    embedded.columns.reserve(k);
    for (int j = 0; j < k; ++j) embedded.columns.push_back("ev" + std::to_string(j));
    embedded.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double norm = embedding.row(i).norm();
        std::vector<double> row(k);
        for (int j = 0; j < k; ++j) {
            row[j] = norm > 0.0 ? embedding(i, j) / norm : 0.0;
        }
        embedded.rows.push_back(std::move(row));
        embedded.rowIds.push_back(std::to_string(i));
    }

    ClusterAssignment out = kmeans(embedded, k, seed);
    out.method = "spectral";
    return out;
}

ClusterAssignment agglomerativeAverage(const SimilarityMatrix& sim, int k) {
    const std::size_t n = sim.size();
    if (k < 1) throw ParameterError("k must be at least 1");
    if (static_cast<std::size_t>(k) > n) {
        throw ParameterError("k = " + std::to_string(k) + " exceeds the matrix size " +
                             std::to_string(n));
    }

    struct Cluster {
        std::vector<std::size_t> members;
        std::size_t leader;  // smallest member index, for deterministic ties
    };
    std::vector<Cluster> clusters;
    clusters.reserve(n);
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({{i}, i});

    auto linkage = [&](const Cluster& a, const Cluster& b) {
        double sum = 0.0;
        for (std::size_t x : a.members) {
            for (std::size_t y : b.members) sum += 1.0 - sim.at(x, y);
        }
        return sum / static_cast<double>(a.members.size() * b.members.size());
    };

    while (clusters.size() > static_cast<std::size_t>(k)) {
        std::size_t bestA = 0, bestB = 1;
        double bestD = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = linkage(clusters[i], clusters[j]);
                if (d < bestD) {
                    bestD = d;
                    bestA = i;
                    bestB = j;
                }
            }
        }
        auto& target = clusters[bestA];
        target.members.insert(target.members.end(), clusters[bestB].members.begin(),
                              clusters[bestB].members.end());
        target.leader = std::min(target.leader, clusters[bestB].leader);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bestB));
    }

    std::sort(clusters.begin(), clusters.end(),
              [](const Cluster& a, const Cluster& b) { return a.leader < b.leader; });

    ClusterAssignment out;
    out.labels.assign(n, 0);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (std::size_t member : clusters[c].members) out.labels[member] = static_cast<int>(c);
    }
    out.k = k;
    out.method = "agglomerative_average";
    return out;
}

PcaResult pca(const PointMatrix& points, int nComponents) {
    const std::size_t n = points.rows.size();
    if (n == 0) throw ParameterError("PCA needs at least one point");
    const std::size_t dim = points.rows.front().size();
    const std::size_t maxComponents = std::min(n, dim);
    if (nComponents < 1 || static_cast<std::size_t>(nComponents) > maxComponents) {
        throw ParameterError("n_components must lie in [1, " + std::to_string(maxComponents) +
                             "]");
    }

    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) x(i, j) = points.rows[i][j];
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::MatrixXd covariance;
    if (n > 1) {
        covariance = (x.transpose() * x) / static_cast<double>(n - 1);
    } else {
        covariance = Eigen::MatrixXd::Zero(dim, dim);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.info() != Eigen::Success) throw InputError("covariance eigendecomposition failed");

    double totalVariance = 0.0;
    for (std::size_t j = 0; j < dim; ++j) totalVariance += std::max(solver.eigenvalues()(j), 0.0);

    PcaResult out;
    out.mean.assign(mean.data(), mean.data() + dim);
    for (int c = 0; c < nComponents; ++c) {
        const std::size_t idx = dim - 1 - static_cast<std::size_t>(c);  // descending eigenvalues
        Eigen::VectorXd component = solver.eigenvectors().col(idx);

        std::size_t largest = 0;
        for (std::size_t j = 1; j < dim; ++j) {
            if (std::abs(component(j)) > std::abs(component(largest))) largest = j;
        }
        if (component(largest) < 0.0) component = -component;

        out.components.emplace_back(component.data(), component.data() + dim);
        const double eigenvalue = std::max(solver.eigenvalues()(idx), 0.0);
        out.explainedVarianceRatios.push_back(totalVariance > 0.0 ? eigenvalue / totalVariance
                                                                  : 0.0);
    }
    return out;
}

double randIndex(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw InputError("partitions cover different point sets");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;

    std::map<int, double> countsA, countsB;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < n; ++i) {
        countsA[a[i]] += 1.0;
        countsB[b[i]] += 1.0;
        joint[{a[i], b[i]}] += 1.0;
    }

    double togetherA = 0.0, togetherB = 0.0, togetherBoth = 0.0;
    for (const auto& [label, count] : countsA) togetherA += binom2(count);
    for (const auto& [label, count] : countsB) togetherB += binom2(count);
    for (const auto& [labels, count] : joint) togetherBoth += binom2(count);

    const double pairs = binom2(static_cast<double>(n));
    return (pairs - togetherA - togetherB + 2.0 * togetherBoth) / pairs;
}

AgreementReport compareMemberships(const std::vector<ClusterAssignment>& assignments) {
    if (assignments.empty()) throw InputError("no assignments to compare");
    const std::size_t n = assignments.front().labels.size();
    for (const auto& a : assignments) {
        if (a.labels.size() != n) {
            throw InputError("assignments cover different point sets (" + std::to_string(n) +
                             " vs " + std::to_string(a.labels.size()) + " points)");
        }
    }

    AgreementReport report;
    for (const auto& a : assignments) {
        report.methods.push_back(a.method);
        report.memberships.push_back(a.labels);
    }
    report.randIndices.assign(assignments.size(), std::vector<double>(assignments.size(), 1.0));
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        for (std::size_t j = i + 1; j < assignments.size(); ++j) {
            const double ri = randIndex(assignments[i].labels, assignments[j].labels);
            report.randIndices[i][j] = ri;
            report.randIndices[j][i] = ri;
        }
    }
    return report;
}

}  // namespace affinity
