#include "affinity/survey.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "affinity/error.hpp"
#include "affinity/io.hpp"

namespace affinity {

using nlohmann::json;

namespace {

constexpr std::pair<Attribute, const char*> kAttributeNames[] = {
    {Attribute::Location, "location"},
    {Attribute::Tradition, "tradition"},
    {Attribute::Religion, "religion"},
    {Attribute::TravelingAttributes, "traveling_attributes"},
    {Attribute::BehaviorAttributes, "behavior_attributes"},
    {Attribute::WorkInformation, "work_information"},
    {Attribute::SocialAttributes, "social_attributes"},
    {Attribute::WeekRoutine, "week_routine"},
    {Attribute::Hobbies, "hobbies"},
    {Attribute::Events, "events"},
};

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + ": missing required key \"" + key + "\"");
    return *it;
}

std::string requireString(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) throw SchemaError(where + ": key \"" + key + "\" must be a string");
    return v.get<std::string>();
}

Question parseQuestion(const json& q, std::size_t index) {
    const std::string where = "questions[" + std::to_string(index) + "]";
    if (!q.is_object()) throw SchemaError(where + ": question must be an object");

    Question out;
    out.id = requireString(q, "id", where);
    out.prompt = requireString(q, "prompt", where);

    const std::string kind = requireString(q, "kind", where);
    if (kind == "mcq") {
        out.kind = QuestionKind::Mcq;
    } else if (kind == "text") {
        out.kind = QuestionKind::FreeText;
    } else {
        throw SchemaError(where + " (" + out.id + "): unsupported response kind \"" + kind +
                          "\" (expected \"mcq\" or \"text\")");
    }

    out.attribute = attributeFromString(requireString(q, "attribute", where));

    if (auto it = q.find("options"); it != q.end()) {
        if (!it->is_array()) throw SchemaError(where + ": \"options\" must be an array");
        for (const auto& opt : *it) {
            if (!opt.is_string()) throw SchemaError(where + ": options must be strings");
            out.options.push_back(opt.get<std::string>());
        }
    }

    if (out.kind == QuestionKind::Mcq && out.options.size() < 2) {
        throw SchemaError(where + " (" + out.id + "): MCQ question needs at least 2 options");
    }
    if (out.kind == QuestionKind::FreeText && !out.options.empty()) {
        throw SchemaError(where + " (" + out.id + "): free-text question must not carry options");
    }
    return out;
}

}  // namespace

const char* toString(Attribute a) {
    for (const auto& [attr, name] : kAttributeNames) {
        if (attr == a) return name;
    }
    return "location";
}

Attribute attributeFromString(const std::string& s) {
    for (const auto& [attr, name] : kAttributeNames) {
        if (s == name) return attr;
    }
    throw SchemaError("unknown attribute category \"" + s + "\"");
}

const Question* SurveyDataset::findQuestion(const std::string& id) const {
    for (const auto& q : questions) {
        if (q.id == id) return &q;
    }
    return nullptr;
}

std::vector<const Question*> SurveyDataset::questionsOfKind(QuestionKind kind) const {
    std::vector<const Question*> out;
    for (const auto& q : questions) {
        if (q.kind == kind) out.push_back(&q);
    }
    return out;
}

bool ValidationReport::hasHardIssues() const {
    return std::any_of(issues.begin(), issues.end(),
                       [](const ValidationIssue& i) { return i.severity == IssueSeverity::Hard; });
}

SurveyDataset parseSurvey(const json& doc) {
    if (!doc.is_object()) throw SchemaError("survey document must be a JSON object");

    SurveyDataset ds;

    const json& questions = require(doc, "questions", "survey");
    if (!questions.is_array()) throw SchemaError("\"questions\" must be an array");
    std::unordered_map<std::string, std::size_t> byId;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        Question q = parseQuestion(questions[i], i);
        if (byId.count(q.id)) throw SchemaError("duplicate question id \"" + q.id + "\"");
        byId[q.id] = ds.questions.size();
        ds.questions.push_back(std::move(q));
    }

    const json& responses = require(doc, "responses", "survey");
    if (!responses.is_array()) throw SchemaError("\"responses\" must be an array");
    std::unordered_set<std::string> candidateIds;
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const std::string where = "responses[" + std::to_string(i) + "]";
        const json& r = responses[i];
        if (!r.is_object()) throw SchemaError(where + ": response must be an object");

        CandidateResponse resp;
        resp.candidateId = requireString(r, "candidate_id", where);
        if (!candidateIds.insert(resp.candidateId).second) {
            throw SchemaError("duplicate candidate id \"" + resp.candidateId + "\"");
        }

        const json& answers = require(r, "answers", where);
        if (!answers.is_object()) throw SchemaError(where + ": \"answers\" must be an object");
        for (const auto& [qid, value] : answers.items()) {
            auto qit = byId.find(qid);
            if (qit == byId.end()) {
                throw SchemaError(where + " (" + resp.candidateId +
                                  "): answer refers to unknown question id \"" + qid + "\"");
            }
            const Question& q = ds.questions[qit->second];
            if (q.kind == QuestionKind::Mcq) {
                if (!value.is_number_integer()) {
                    throw SchemaError(where + " (" + resp.candidateId + ", " + qid +
                                      "): unsupported response kind for MCQ question, expected an "
                                      "option index");
                }
                const int idx = value.get<int>();
                if (idx < 0 || static_cast<std::size_t>(idx) >= q.options.size()) {
                    throw SchemaError(where + " (" + resp.candidateId + ", " + qid +
                                      "): option index " + std::to_string(idx) +
                                      " out of range [0, " + std::to_string(q.options.size()) +
                                      ")");
                }
                resp.answers[qid] = idx;
            } else {
                if (!value.is_string()) {
                    throw SchemaError(where + " (" + resp.candidateId + ", " + qid +
                                      "): unsupported response kind for free-text question, "
                                      "expected a string");
                }
                resp.answers[qid] = value.get<std::string>();
            }
        }
        ds.responses.push_back(std::move(resp));
    }

    if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("\"labels\" must be an object");
        for (const auto& [cid, label] : it->items()) {
            if (!candidateIds.count(cid)) {
                throw SchemaError("label refers to unknown candidate id \"" + cid + "\"");
            }
            if (!label.is_string()) throw SchemaError("labels must be strings");
            ds.labels[cid] = label.get<std::string>();
        }
    }

    return ds;
}

SurveyDataset loadSurvey(const std::filesystem::path& path) {
    const std::string raw = readFile(path);
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ParseError("survey file " + path.string() + ": " + e.what());
    }
    return parseSurvey(doc);
}

json toJson(const SurveyDataset& ds) {
    json questions = json::array();
    for (const auto& q : ds.questions) {
        json obj{{"id", q.id},
                 {"prompt", q.prompt},
                 {"kind", q.kind == QuestionKind::Mcq ? "mcq" : "text"},
                 {"attribute", toString(q.attribute)}};
        obj["options"] = q.options;
        questions.push_back(std::move(obj));
    }

    json responses = json::array();
    for (const auto& r : ds.responses) {
        json answers = json::object();
        for (const auto& [qid, answer] : r.answers) {
            if (std::holds_alternative<int>(answer)) {
                answers[qid] = std::get<int>(answer);
            } else {
                answers[qid] = std::get<std::string>(answer);
            }
        }
        responses.push_back(json{{"candidate_id", r.candidateId}, {"answers", std::move(answers)}});
    }

    json doc{{"questions", std::move(questions)}, {"responses", std::move(responses)}};
    if (!ds.labels.empty()) doc["labels"] = ds.labels;
    return doc;
}

ValidationReport validateDataset(const SurveyDataset& ds) {
    ValidationReport report;

    for (const auto& resp : ds.responses) {
        const std::size_t before = report.issues.size();

        for (const auto& q : ds.questions) {
            auto it = resp.answers.find(q.id);
            if (it == resp.answers.end()) {
                report.issues.push_back(
                    {resp.candidateId, q.id, "missing answer",
                     q.kind == QuestionKind::Mcq ? IssueSeverity::Hard : IssueSeverity::Soft});
                continue;
            }
            const Answer& answer = it->second;
            if (q.kind == QuestionKind::Mcq) {
                if (!std::holds_alternative<int>(answer)) {
                    report.issues.push_back({resp.candidateId, q.id,
                                             "MCQ answer is not an option index",
                                             IssueSeverity::Hard});
                    continue;
                }
                const int idx = std::get<int>(answer);
                if (idx < 0 || static_cast<std::size_t>(idx) >= q.options.size()) {
                    report.issues.push_back({resp.candidateId, q.id,
                                             "option index " + std::to_string(idx) +
                                                 " out of range [0, " +
                                                 std::to_string(q.options.size()) + ")",
                                             IssueSeverity::Hard});
                }
            } else {
                if (!std::holds_alternative<std::string>(answer)) {
                    report.issues.push_back({resp.candidateId, q.id,
                                             "free-text answer is not a string",
                                             IssueSeverity::Hard});
                    continue;
                }
                if (std::get<std::string>(answer).empty()) {
                    report.issues.push_back(
                        {resp.candidateId, q.id, "empty text answer", IssueSeverity::Soft});
                }
            }
        }

        // Answers keyed to questions outside the questionnaire.
        for (const auto& [qid, answer] : resp.answers) {
            (void)answer;
            if (!ds.findQuestion(qid)) {
                report.issues.push_back({resp.candidateId, qid,
                                         "answer refers to unknown question id \"" + qid + "\"",
                                         IssueSeverity::Hard});
            }
        }

        if (report.issues.size() == before) {
            report.passingCandidates.push_back(resp.candidateId);
        } else {
            report.failingCandidates.push_back(resp.candidateId);
        }
    }

    return report;
}

PointMatrix encodeMcq(const SurveyDataset& ds, bool standardize) {
    PointMatrix out;
    for (const auto& q : ds.questions) {
        if (q.kind == QuestionKind::Mcq) out.columns.push_back(q.id);
    }

    for (const auto& resp : ds.responses) {
        std::vector<double> row;
        row.reserve(out.columns.size());
        for (const auto& qid : out.columns) {
            auto it = resp.answers.find(qid);
            if (it == resp.answers.end() || !std::holds_alternative<int>(it->second)) {
                throw InputError("candidate \"" + resp.candidateId +
                                 "\" has no MCQ answer for question \"" + qid + "\"");
            }
            row.push_back(static_cast<double>(std::get<int>(it->second)));
        }
        out.rows.push_back(std::move(row));
        out.rowIds.push_back(resp.candidateId);
    }

    if (standardize && !out.rows.empty()) {
        const std::size_t n = out.rows.size();
        for (std::size_t j = 0; j < out.columns.size(); ++j) {
            double mean = 0.0;
            for (const auto& row : out.rows) mean += row[j];
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (const auto& row : out.rows) {
                const double d = row[j] - mean;
                var += d * d;
            }
            var /= static_cast<double>(n);
            if (var <= 0.0) {
                for (auto& row : out.rows) row[j] = 0.0;
            } else {
                const double sd = std::sqrt(var);
                for (auto& row : out.rows) row[j] = (row[j] - mean) / sd;
            }
        }
    }

    return out;
}

void writePointsCsv(const PointMatrix& points, std::ostream& out) {
    out << "candidate_id";
    for (const auto& col : points.columns) out << ',' << csvField(col);
    out << '\n';
    for (std::size_t i = 0; i < points.rows.size(); ++i) {
        out << csvField(i < points.rowIds.size() ? points.rowIds[i] : std::to_string(i));
        for (double v : points.rows[i]) out << ',' << formatNumber(v);
        out << '\n';
    }
}

}  // namespace affinity
