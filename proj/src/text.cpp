#include "affinity/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "affinity/error.hpp"

namespace affinity {

namespace {

bool isTokenChar(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

bool isZero(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

TokenList preprocess(std::string_view text, const PreprocessConfig& config) {
    TokenList tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        std::string token = std::move(current);
        current.clear();
        if (config.stopwords.count(token)) return;
        if (config.stemmer == Stemmer::Porter) token = porterStem(token);
        if (!token.empty()) tokens.push_back(std::move(token));
    };

    for (char raw : text) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (isTokenChar(c)) {
            current.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

TermVector termVector(const TokenList& tokens) {
    TermVector out;
    if (tokens.empty()) return out;
    for (const auto& token : tokens) out[token] += 1.0;
    const double total = static_cast<double>(tokens.size());
    for (auto& [term, weight] : out) weight /= total;
    return out;
}

double cosineSimilarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw InputError("cosine similarity requires vectors of equal dimension (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    if (a == b) return isZero(a) ? 0.0 : 1.0;  // exact on identical inputs
    double dot = 0.0, normA = 0.0, normB = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        normA += a[i] * a[i];
        normB += b[i] * b[i];
    }
    if (normA == 0.0 || normB == 0.0) return 0.0;
    return dot / (std::sqrt(normA) * std::sqrt(normB));
}

double cosineSimilarity(const TermVector& a, const TermVector& b) {
    if (a == b) return a.empty() ? 0.0 : 1.0;
    double dot = 0.0, normA = 0.0, normB = 0.0;
    for (const auto& [term, weight] : a) normA += weight * weight;
    for (const auto& [term, weight] : b) normB += weight * weight;
    if (normA == 0.0 || normB == 0.0) return 0.0;
    for (const auto& [term, weight] : a) {
        auto it = b.find(term);
        if (it != b.end()) dot += weight * it->second;
    }
    return dot / (std::sqrt(normA) * std::sqrt(normB));
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embedding file: " + path.string());
    return parse(in, path.string());
}

EmbeddingTable EmbeddingTable::parse(std::istream& in, const std::string& source) {
    std::string header;
    if (!std::getline(in, header)) throw FormatError(source + ": empty embedding file");

    std::size_t vocabSize = 0, dimension = 0;
    {
        std::istringstream hs(header);
        std::string extra;
        if (!(hs >> vocabSize >> dimension) || (hs >> extra)) {
            throw FormatError(source + ": header must be \"<vocab_size> <dimension>\"");
        }
    }
    if (dimension == 0) throw FormatError(source + ": dimension must be positive");

    EmbeddingTable table;
    table.dimension_ = dimension;
    table.vectors_.reserve(vocabSize);

    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        ++rows;
        if (rows > vocabSize) {
            throw FormatError(source + ": more rows than the declared vocabulary size " +
                              std::to_string(vocabSize));
        }

        const std::size_t termEnd = line.find(' ');
        if (termEnd == std::string::npos || termEnd == 0) {
            throw FormatError(source + ": row " + std::to_string(rows) +
                              ": expected \"term v1 .. vd\"");
        }
        std::string term = line.substr(0, termEnd);

        std::vector<double> vec;
        vec.reserve(dimension);
        const char* ptr = line.data() + termEnd;
        const char* end = line.data() + line.size();
        while (ptr < end) {
            while (ptr < end && (*ptr == ' ' || *ptr == '\r')) ++ptr;
            if (ptr >= end) break;
            double value;
            auto res = std::from_chars(ptr, end, value);
            if (res.ec != std::errc{}) {
                throw FormatError(source + ": row " + std::to_string(rows) + " (\"" + term +
                                  "\"): non-numeric component");
            }
            vec.push_back(value);
            ptr = res.ptr;
        }
        if (vec.size() != dimension) {
            throw FormatError(source + ": row " + std::to_string(rows) + " (\"" + term + "\"): " +
                              std::to_string(vec.size()) + " components, expected " +
                              std::to_string(dimension));
        }
        if (!table.vectors_.emplace(std::move(term), std::move(vec)).second) {
            throw FormatError(source + ": duplicate term at row " + std::to_string(rows));
        }
    }

    if (rows != vocabSize) {
        throw FormatError(source + ": header declares " + std::to_string(vocabSize) +
                          " terms but file contains " + std::to_string(rows));
    }
    return table;
}

const std::vector<double>* EmbeddingTable::find(const std::string& term) const {
    auto it = vectors_.find(term);
    return it == vectors_.end() ? nullptr : &it->second;
}

double termSimilarity(const std::string& t1, const std::string& t2, const EmbeddingTable& table) {
    const std::vector<double>* v1 = table.find(t1);
    const std::vector<double>* v2 = table.find(t2);
    if (v1 == nullptr || v2 == nullptr) return 0.0;
    return cosineSimilarity(*v1, *v2);
}

ContextVector extractContextVector(const TokenList& tokens, std::size_t topN) {
    if (topN < 1) throw ParameterError("context vector size must be at least 1");

    const TermVector weights = termVector(tokens);
    std::vector<std::pair<std::string, double>> ranked(weights.begin(), weights.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > topN) ranked.resize(topN);

    ContextVector out;
    out.entries = std::move(ranked);
    return out;
}

SimilarityMode similarityModeFromString(const std::string& s) {
    if (s == "lexical") return SimilarityMode::Lexical;
    if (s == "semantic") return SimilarityMode::Semantic;
    if (s == "hybrid") return SimilarityMode::Hybrid;
    throw ParameterError("unknown similarity mode \"" + s + "\"");
}

namespace {

std::vector<double> meanEmbedding(const TokenList& tokens, const EmbeddingTable& table) {
    std::vector<double> mean(table.dimension(), 0.0);
    std::size_t hits = 0;
    for (const auto& token : tokens) {
        if (const std::vector<double>* vec = table.find(token)) {
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (*vec)[i];
            ++hits;
        }
    }
    if (hits > 0) {
        for (double& v : mean) v /= static_cast<double>(hits);
    }
    return mean;
}

}  // namespace

double documentSimilarity(const TokenList& d1, const TokenList& d2, const EmbeddingTable& table,
                          SimilarityMode mode) {
    if (d1.empty() && d2.empty()) return 0.0;

    double score = 0.0;
    switch (mode) {
        case SimilarityMode::Lexical:
            score = cosineSimilarity(termVector(d1), termVector(d2));
            break;
        case SimilarityMode::Semantic:
            score = cosineSimilarity(meanEmbedding(d1, table), meanEmbedding(d2, table));
            break;
        case SimilarityMode::Hybrid: {
            const double lexical = cosineSimilarity(termVector(d1), termVector(d2));
            const double semantic = cosineSimilarity(meanEmbedding(d1, table), meanEmbedding(d2, table));
            score = 0.5 * (lexical + semantic);
            break;
        }
    }
    return std::clamp(score, 0.0, 1.0);
}

}  // namespace affinity
