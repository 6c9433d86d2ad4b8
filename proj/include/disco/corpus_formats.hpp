#pragma once

// Readers and writers for the annotation formats emitted by the external
// preprocessing tools (CoreNLP -> .conll, DPLP -> .merge/.bracket) and the
// JSONL document records used between pipeline stages.

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace disco {

inline constexpr std::string_view kFormatVersion = "disco-1";

struct Token {
  int sentence_index = 0;
  int token_index = 0;
  std::string surface;
  std::string lemma;
  std::string pos;
  std::string dep_label;
  int dep_head = 0;  // 0 = sentence root
  std::string ner;
  std::string constituent;
  std::optional<int> edu_index;  // 0-based; absent before the .merge stage

  friend bool operator==(const Token&, const Token&) = default;
};

// Half-open token range [start, end).
struct EduSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  friend bool operator==(const EduSpan&, const EduSpan&) = default;
};

class Document {
 public:
  Document() = default;
  Document(std::string doc_id, std::vector<Token> tokens,
           std::optional<std::string> reference_summary = std::nullopt);

  const std::string& doc_id() const noexcept { return doc_id_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  const std::optional<std::string>& reference_summary() const noexcept {
    return reference_summary_;
  }
  const std::vector<EduSpan>& edu_spans() const noexcept { return edu_spans_; }
  std::size_t num_edus() const noexcept { return edu_spans_.size(); }

  // Surface forms of the tokens in EDU `edu` (ordinal into edu_spans()).
  std::vector<std::string> edu_tokens(std::size_t edu) const;
  std::vector<std::vector<std::string>> all_edu_tokens() const;
  std::string edu_text(std::size_t edu) const;

  Document with_reference(std::optional<std::string> summary) const;

  friend bool operator==(const Document& a, const Document& b) {
    return a.doc_id_ == b.doc_id_ && a.tokens_ == b.tokens_ &&
           a.reference_summary_ == b.reference_summary_;
  }

 private:
  std::string doc_id_;
  std::vector<Token> tokens_;
  std::optional<std::string> reference_summary_;
  std::vector<EduSpan> edu_spans_;
};

// Consecutive runs of equal edu_index form one span; tokens without an
// index break runs and are not covered.
std::vector<EduSpan> derive_edu_spans(const std::vector<Token>& tokens);

enum class Nuclearity { Nucleus, Satellite, Root };

std::string_view nuclearity_name(Nuclearity n);

struct RstTreeNode {
  int first_edu = 1;  // inclusive, 1-based
  int last_edu = 1;
  Nuclearity nuclearity = Nuclearity::Nucleus;
  std::string relation;

  bool is_leaf() const noexcept { return first_edu == last_edu; }
  bool contains(const RstTreeNode& other) const noexcept {
    return first_edu <= other.first_edu && other.last_edu <= last_edu;
  }
  friend bool operator==(const RstTreeNode&, const RstTreeNode&) = default;
};

// .conll: 9 tab-separated fields per token, blank lines between sentences.
std::vector<Token> parse_conll(std::string_view raw_text);
std::string serialize_conll(const std::vector<Token>& tokens);

// .merge: .conll plus a 10th field holding the 1-based, document-wide EDU
// index. Gaps in the numbering are accepted; decreases are not.
Document parse_merge(std::string_view raw_text, std::string doc_id = {});
std::string serialize_merge(const Document& doc);

// .bracket: one node per line, "((first, last), 'Nuclearity', 'relation')".
std::vector<RstTreeNode> parse_bracket(std::string_view raw_text);
std::string serialize_bracket(const std::vector<RstTreeNode>& nodes);

// Replaces the EDU index of every EDU-carrying token (0-based, document
// order) and re-derives the spans.
Document update_edu_indices(const Document& doc,
                            const std::vector<int>& new_indices);

// One JSON object per document; no trailing newline.
std::string serialize_jsonl(const Document& doc);
Document parse_jsonl(std::string_view line);

// Reads a sidecar of {"doc_id", "summary"} records.
std::vector<std::pair<std::string, std::string>> parse_summary_sidecar(
    std::string_view text);

}  // namespace disco
