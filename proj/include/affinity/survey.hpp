#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace affinity {

enum class QuestionKind { Mcq, FreeText };

// Attribute taxonomy the questionnaire draws from.
enum class Attribute {
    Location,
    Tradition,
    Religion,
    TravelingAttributes,
    BehaviorAttributes,
    WorkInformation,
    SocialAttributes,
    WeekRoutine,
    Hobbies,
    Events,
};

const char* toString(Attribute a);
Attribute attributeFromString(const std::string& s);

struct Question {
    std::string id;
    std::string prompt;
    QuestionKind kind = QuestionKind::Mcq;
    Attribute attribute = Attribute::Location;
    std::vector<std::string> options;  // MCQ only, size >= 2
};

// MCQ answers are 0-based option indices, free-text answers are raw strings.
using Answer = std::variant<int, std::string>;

struct CandidateResponse {
    std::string candidateId;
    std::map<std::string, Answer> answers;  // question id -> answer
};

struct SurveyDataset {
    std::vector<Question> questions;
    std::vector<CandidateResponse> responses;
    std::map<std::string, std::string> labels;  // optional ground truth

    const Question* findQuestion(const std::string& id) const;
    std::vector<const Question*> questionsOfKind(QuestionKind kind) const;
};

enum class IssueSeverity {
    Hard,  // breaks downstream preconditions (missing MCQ answer, bad index)
    Soft,  // tolerated degradation (missing or empty free text)
};

struct ValidationIssue {
    std::string candidateId;
    std::string questionId;
    std::string message;
    IssueSeverity severity = IssueSeverity::Hard;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    std::vector<std::string> passingCandidates;
    std::vector<std::string> failingCandidates;

    bool passed() const { return issues.empty(); }
    bool hasHardIssues() const;
};

struct PointMatrix {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> columns;  // one metadata entry per column
    std::vector<std::string> rowIds;   // candidate id per row

    std::size_t rowCount() const { return rows.size(); }
    std::size_t columnCount() const { return columns.size(); }
};

// Loads and fully schema-checks a survey file. Throws ParseError for
// malformed JSON, SchemaError for structural violations.
SurveyDataset loadSurvey(const std::filesystem::path& path);
SurveyDataset parseSurvey(const nlohmann::json& doc);
nlohmann::json toJson(const SurveyDataset& ds);

// Structural validation; reports instead of throwing.
ValidationReport validateDataset(const SurveyDataset& ds);

// Ordinal encoding of MCQ answers; optionally z-scores each column
// (zero-variance columns become all-zero).
PointMatrix encodeMcq(const SurveyDataset& ds, bool standardize);

void writePointsCsv(const PointMatrix& points, std::ostream& out);

}  // namespace affinity
