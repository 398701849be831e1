#include <array>
#include <string>
#include <string_view>

#include "affinity/text.hpp"

// Original Porter suffix-stripping algorithm (M. F. Porter, 1980).
// Within steps 2-4 the longest matching suffix is located first and its
// condition decides whether anything happens; shorter suffixes are never
// retried after a longer match fails its condition.

namespace affinity {

namespace {

bool isVowelLetter(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

class Stem {
public:
    explicit Stem(std::string word) : w_(std::move(word)) {}

    const std::string& str() const { return w_; }

    // Consonant test with the y rule: y counts as a vowel when preceded by
    // a consonant.
    bool isConsonant(std::size_t i) const {
        const char c = w_[i];
        if (isVowelLetter(c)) return false;
        if (c == 'y') return i == 0 ? true : !isConsonant(i - 1);
        return true;
    }

    // Number of VC sequences in w[0..end): [C](VC)^m[V].
    int measure(std::size_t end) const {
        int m = 0;
        std::size_t i = 0;
        while (i < end && isConsonant(i)) ++i;
        while (i < end) {
            while (i < end && !isConsonant(i)) ++i;
            if (i >= end) break;
            ++m;
            while (i < end && isConsonant(i)) ++i;
        }
        return m;
    }

    bool hasVowel(std::size_t end) const {
        for (std::size_t i = 0; i < end; ++i) {
            if (!isConsonant(i)) return true;
        }
        return false;
    }

    bool endsDoubleConsonant() const {
        const std::size_t n = w_.size();
        return n >= 2 && w_[n - 1] == w_[n - 2] && isConsonant(n - 1);
    }

    // *o: w[0..end) ends consonant-vowel-consonant, final consonant not w/x/y.
    bool endsCvc(std::size_t end) const {
        if (end < 3) return false;
        const std::size_t i = end - 1;
        if (!isConsonant(i) || isConsonant(i - 1) || !isConsonant(i - 2)) return false;
        const char c = w_[i];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool endsWith(std::string_view suffix) const {
        return w_.size() >= suffix.size() &&
               std::string_view(w_).substr(w_.size() - suffix.size()) == suffix;
    }

    std::size_t stemLength(std::string_view suffix) const { return w_.size() - suffix.size(); }

    void replaceSuffix(std::string_view suffix, std::string_view replacement) {
        w_.resize(w_.size() - suffix.size());
        w_.append(replacement);
    }

    void dropLast() { w_.pop_back(); }
    char last() const { return w_.back(); }
    std::size_t size() const { return w_.size(); }

private:
    std::string w_;
};

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// Tables sorted by suffix length descending so the longest match wins.
constexpr std::array<Rule, 20> kStep2Rules{{
    {"ational", "ate"}, {"ization", "ize"}, {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"tional", "tion"}, {"biliti", "ble"},  {"entli", "ent"},
    {"ousli", "ous"},   {"alism", "al"},    {"aliti", "al"},    {"iviti", "ive"},
    {"ation", "ate"},   {"enci", "ence"},   {"anci", "ance"},   {"izer", "ize"},
    {"abli", "able"},   {"alli", "al"},     {"ator", "ate"},    {"eli", "e"},
}};

constexpr std::array<Rule, 7> kStep3Rules{{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ness", ""},  {"ful", ""},
}};

constexpr std::array<Rule, 18> kStep4Rules{{
    {"ement", ""}, {"ance", ""}, {"ence", ""}, {"able", ""}, {"ible", ""},
    {"ment", ""},  {"ant", ""},  {"ent", ""},  {"ism", ""},  {"ate", ""},
    {"iti", ""},   {"ous", ""},  {"ive", ""},  {"ize", ""},  {"al", ""},
    {"er", ""},    {"ic", ""},   {"ou", ""},
}};

void step1a(Stem& s) {
    if (s.endsWith("sses")) {
        s.replaceSuffix("sses", "ss");
    } else if (s.endsWith("ies")) {
        s.replaceSuffix("ies", "i");
    } else if (s.endsWith("ss")) {
        // unchanged
    } else if (s.endsWith("s")) {
        s.dropLast();
    }
}

// Cleanup after ed/ing removal.
void step1bTail(Stem& s) {
    if (s.endsWith("at")) {
        s.replaceSuffix("at", "ate");
    } else if (s.endsWith("bl")) {
        s.replaceSuffix("bl", "ble");
    } else if (s.endsWith("iz")) {
        s.replaceSuffix("iz", "ize");
    } else if (s.endsDoubleConsonant()) {
        const char c = s.last();
        if (c != 'l' && c != 's' && c != 'z') s.dropLast();
    } else if (s.measure(s.size()) == 1 && s.endsCvc(s.size())) {
        s.replaceSuffix("", "e");
    }
}

void step1b(Stem& s) {
    if (s.endsWith("eed")) {
        if (s.measure(s.stemLength("eed")) > 0) s.dropLast();
        return;
    }
    if (s.endsWith("ed")) {
        if (s.hasVowel(s.stemLength("ed"))) {
            s.replaceSuffix("ed", "");
            step1bTail(s);
        }
        return;
    }
    if (s.endsWith("ing")) {
        if (s.hasVowel(s.stemLength("ing"))) {
            s.replaceSuffix("ing", "");
            step1bTail(s);
        }
    }
}

void step1c(Stem& s) {
    if (s.endsWith("y") && s.hasVowel(s.size() - 1)) {
        s.replaceSuffix("y", "i");
    }
}

template <std::size_t N>
void applyLongestMatch(Stem& s, const std::array<Rule, N>& rules, int minMeasure) {
    for (const Rule& rule : rules) {
        if (!s.endsWith(rule.suffix)) continue;
        if (s.measure(s.stemLength(rule.suffix)) > minMeasure) {
            s.replaceSuffix(rule.suffix, rule.replacement);
        }
        return;  // longest match found; no shorter suffix is considered
    }
}

void step4(Stem& s) {
    for (const Rule& rule : kStep4Rules) {
        if (!s.endsWith(rule.suffix)) continue;
        if (s.measure(s.stemLength(rule.suffix)) > 1) s.replaceSuffix(rule.suffix, "");
        return;
    }
    if (s.endsWith("ion")) {
        const std::size_t stem = s.stemLength("ion");
        if (stem > 0 && (s.str()[stem - 1] == 's' || s.str()[stem - 1] == 't') &&
            s.measure(stem) > 1) {
            s.replaceSuffix("ion", "");
        }
    }
}

void step5a(Stem& s) {
    if (!s.endsWith("e")) return;
    const std::size_t stem = s.size() - 1;
    const int m = s.measure(stem);
    if (m > 1 || (m == 1 && !s.endsCvc(stem))) s.dropLast();
}

void step5b(Stem& s) {
    if (s.last() == 'l' && s.endsDoubleConsonant() && s.measure(s.size()) > 1) {
        s.dropLast();
    }
}

}  // namespace

std::string porterStem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    for (char c : word) {
        if (c < 'a' || c > 'z') return std::string(word);  // stem pure letter tokens only
    }

    Stem s{std::string(word)};
    step1a(s);
    step1b(s);
    step1c(s);
    applyLongestMatch(s, kStep2Rules, 0);
    applyLongestMatch(s, kStep3Rules, 0);
    step4(s);
    step5a(s);
    step5b(s);
    return s.str();
}

}  // namespace affinity
