#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace affinity {

using TokenList = std::vector<std::string>;

// Sparse term -> weight map; weights are normalized frequencies.
using TermVector = std::map<std::string, double>;

enum class Stemmer { Porter, None };

struct PreprocessConfig {
    std::set<std::string> stopwords;
    Stemmer stemmer = Stemmer::Porter;

    static PreprocessConfig standard();  // embedded English stop-word list
};

const std::set<std::string>& defaultStopwords();
std::set<std::string> loadStopwords(const std::filesystem::path& path);

// Original Porter suffix-stripping algorithm (1980). Words shorter than
// three letters pass through unchanged.
std::string porterStem(std::string_view word);

// Lowercase, split on non-alphanumeric boundaries, drop stop-words, stem.
TokenList preprocess(std::string_view text, const PreprocessConfig& config);

TermVector termVector(const TokenList& tokens);

// Cosine of the angle between two vectors; 0 when either vector is zero.
double cosineSimilarity(const std::vector<double>& a, const std::vector<double>& b);
double cosineSimilarity(const TermVector& a, const TermVector& b);

class EmbeddingTable {
public:
    static EmbeddingTable load(const std::filesystem::path& path);
    static EmbeddingTable parse(std::istream& in, const std::string& source = "<stream>");

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return vectors_.size(); }
    const std::vector<double>* find(const std::string& term) const;

private:
    std::unordered_map<std::string, std::vector<double>> vectors_;
    std::size_t dimension_ = 0;
};

// Embedding cosine between two terms; 0 if either is out of vocabulary.
double termSimilarity(const std::string& t1, const std::string& t2, const EmbeddingTable& table);

struct ContextVector {
    std::vector<std::pair<std::string, double>> entries;  // non-increasing scores

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

// Top-n highest-weight terms, ties broken lexicographically.
ContextVector extractContextVector(const TokenList& tokens, std::size_t topN);

enum class SimilarityMode { Lexical, Semantic, Hybrid };

SimilarityMode similarityModeFromString(const std::string& s);

// Lexical: cosine of term vectors. Semantic: cosine of mean in-vocabulary
// embeddings. Hybrid: arithmetic mean of the two. Result clamped to [0, 1].
double documentSimilarity(const TokenList& d1, const TokenList& d2,
                          const EmbeddingTable& table, SimilarityMode mode);

}  // namespace affinity
