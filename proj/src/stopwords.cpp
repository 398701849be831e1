#include <fstream>
#include <set>
#include <string>

#include "affinity/error.hpp"
#include "affinity/text.hpp"

namespace affinity {

namespace {

// Standard English stop-word list (classic NLP list, tokenizer-friendly:
// contraction fragments appear as their own entries).
const char* const kDefaultStopwords[] = {
    "a",       "about",   "above",    "after",   "again",     "against",  "ain",
    "all",     "am",      "an",       "and",     "any",       "are",      "aren",
    "as",      "at",      "be",       "because", "been",      "before",   "being",
    "below",   "between", "both",     "but",     "by",        "can",      "couldn",
    "d",       "did",     "didn",     "do",      "does",      "doesn",    "doing",
    "don",     "down",    "during",   "each",    "few",       "for",      "from",
    "further", "had",     "hadn",     "has",     "hasn",      "have",     "haven",
    "having",  "he",      "her",      "here",    "hers",      "herself",  "him",
    "himself", "his",     "how",      "i",       "if",        "in",       "into",
    "is",      "isn",     "it",       "its",     "itself",    "just",     "ll",
    "m",       "ma",      "me",       "mightn",  "more",      "most",     "mustn",
    "my",      "myself",  "needn",    "no",      "nor",       "not",      "now",
    "o",       "of",      "off",      "on",      "once",      "only",     "or",
    "other",   "our",     "ours",     "ourselves", "out",     "over",     "own",
    "re",      "s",       "same",     "shan",    "she",       "should",   "shouldn",
    "so",      "some",    "such",     "t",       "than",      "that",     "the",
    "their",   "theirs",  "them",     "themselves", "then",   "there",    "these",
    "they",    "this",    "those",    "through", "to",        "too",      "under",
    "until",   "up",      "ve",       "very",    "was",       "wasn",     "we",
    "were",    "weren",   "what",     "when",    "where",     "which",    "while",
    "who",     "whom",    "why",      "will",    "with",      "won",      "wouldn",
    "y",       "you",     "your",     "yours",   "yourself",  "yourselves",
};

}  // namespace

const std::set<std::string>& defaultStopwords() {
    static const std::set<std::string> words(std::begin(kDefaultStopwords),
                                             std::end(kDefaultStopwords));
    return words;
}

std::set<std::string> loadStopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open stop-word file: " + path.string());
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        std::string word = line.substr(start);
        for (char& c : word) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
        words.insert(std::move(word));
    }
    return words;
}

PreprocessConfig PreprocessConfig::standard() {
    PreprocessConfig cfg;
    cfg.stopwords = defaultStopwords();
    cfg.stemmer = Stemmer::Porter;
    return cfg;
}

}  // namespace affinity
