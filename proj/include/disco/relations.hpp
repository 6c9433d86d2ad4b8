#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace disco {

inline constexpr std::size_t kNumRelations = 43;
inline constexpr std::string_view kRelationVocabVersion = "rst-relations-v1";

// Fixed, ordered relation vocabulary; the index of a name is its relation id.
// Mirrors data/rst_relations.v1.txt.
inline constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "root",          "elaboration",       "attribution",
    "joint",         "same-unit",         "contrast",
    "explanation",   "background",        "cause",
    "result",        "condition",         "temporal",
    "enablement",    "comparison",        "evaluation",
    "topic-comment", "summary",           "manner-means",
    "topic-change",  "textual-organization", "list",
    "sequence",      "purpose",           "circumstance",
    "concession",    "antithesis",        "consequence",
    "example",       "definition",        "restatement",
    "evidence",      "interpretation",    "problem-solution",
    "question-answer", "statement-response", "reason",
    "otherwise",     "hypothetical",      "analogy",
    "preference",    "proportion",        "inverted-sequence",
    "unknown",
};

inline constexpr int kRootRelation = 0;
inline constexpr int kUnknownRelation = static_cast<int>(kNumRelations) - 1;

// Case-, '_'- and '-'-insensitive lookup ("Same_Unit" == "same-unit").
// Unseen names map to kUnknownRelation and log a warning once per name.
int relation_id(std::string_view name);

std::string_view relation_name(int id);

}  // namespace disco
