#include "disco/corpus_formats.hpp"

#include <charconv>
#include <regex>

#include <json.hpp>

#include "disco/errors.hpp"

namespace disco {

namespace {

using json = nlohmann::json;

constexpr std::size_t kConllFields = 9;
constexpr std::size_t kMergeFields = 10;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

int parse_index(std::string_view field, std::size_t line_no,
                const char* what) {
  int value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::NonNumericIndex,
                std::string(what) + " field '" + std::string(field) +
                    "' is not an integer",
                line_no);
  }
  return value;
}

// Shared reader for the conll family. Sentence and token indices come from
// the file structure; the on-disk index columns only need to be numeric.
std::vector<Token> parse_rows(std::string_view raw_text,
                              std::size_t expected_fields) {
  std::vector<Token> tokens;
  int sentence = 0;
  int token_in_sentence = 0;
  bool sentence_open = false;
  const auto lines = split_lines(raw_text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) {
      if (sentence_open) {
        ++sentence;
        token_in_sentence = 0;
        sentence_open = false;
      }
      continue;
    }
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != expected_fields) {
      throw Error(ErrorCode::MalformedLine,
                  "expected " + std::to_string(expected_fields) +
                      " tab-separated fields, found " +
                      std::to_string(fields.size()),
                  line_no);
    }
    parse_index(fields[0], line_no, "sentence index");
    parse_index(fields[1], line_no, "token index");
    Token tok;
    tok.sentence_index = sentence;
    tok.token_index = token_in_sentence++;
    tok.surface = fields[2];
    tok.lemma = fields[3];
    tok.pos = fields[4];
    tok.dep_label = fields[5];
    tok.dep_head = parse_index(fields[6], line_no, "dependency head");
    tok.ner = fields[7];
    tok.constituent = fields[8];
    if (expected_fields == kMergeFields) {
      const int edu = parse_index(fields[9], line_no, "EDU index");
      if (edu < 1) {
        throw Error(ErrorCode::NonNumericIndex,
                    "EDU index must be 1-based, found " + std::to_string(edu),
                    line_no);
      }
      if (!tokens.empty() && tokens.back().edu_index &&
          edu - 1 < *tokens.back().edu_index) {
        throw Error(ErrorCode::NonMonotoneEduIndex,
                    "EDU index " + std::to_string(edu) + " follows " +
                        std::to_string(*tokens.back().edu_index + 1),
                    line_no);
      }
      tok.edu_index = edu - 1;
    }
    tokens.push_back(std::move(tok));
    sentence_open = true;
  }
  return tokens;
}

std::string serialize_rows(const std::vector<Token>& tokens, bool with_edu) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (i > 0 && t.sentence_index != tokens[i - 1].sentence_index) {
      out += '\n';
    }
    out += std::to_string(t.sentence_index + 1);
    out += '\t';
    out += std::to_string(t.token_index + 1);
    for (const std::string* field :
         {&t.surface, &t.lemma, &t.pos, &t.dep_label}) {
      out += '\t';
      out += *field;
    }
    out += '\t';
    out += std::to_string(t.dep_head);
    out += '\t';
    out += t.ner;
    out += '\t';
    out += t.constituent;
    if (with_edu) {
      out += '\t';
      out += std::to_string(t.edu_index.value_or(0) + 1);
    }
    out += '\n';
  }
  return out;
}

std::optional<Nuclearity> nuclearity_from(std::string_view s) {
  if (s == "Nucleus") return Nuclearity::Nucleus;
  if (s == "Satellite") return Nuclearity::Satellite;
  if (s == "Root") return Nuclearity::Root;
  return std::nullopt;
}

void check_token_invariants(const std::vector<Token>& tokens) {
  std::optional<int> last_edu;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    const bool new_sentence =
        i == 0 || t.sentence_index != tokens[i - 1].sentence_index;
    const int expected = new_sentence ? 0 : tokens[i - 1].token_index + 1;
    if (t.token_index != expected) {
      throw Error(ErrorCode::MalformedRecord,
                  "token_index values must be contiguous from 0 within a "
                  "sentence (token " +
                      std::to_string(i) + ")");
    }
    if (new_sentence && i > 0 &&
        t.sentence_index < tokens[i - 1].sentence_index) {
      throw Error(ErrorCode::MalformedRecord,
                  "sentence_index decreases at token " + std::to_string(i));
    }
    if (t.edu_index) {
      if (*t.edu_index < 0 || (last_edu && *t.edu_index < *last_edu)) {
        throw Error(ErrorCode::NonMonotoneEduIndex,
                    "edu_index decreases at token " + std::to_string(i));
      }
      last_edu = t.edu_index;
    }
  }
}

}  // namespace

Document::Document(std::string doc_id, std::vector<Token> tokens,
                   std::optional<std::string> reference_summary)
    : doc_id_(std::move(doc_id)),
      tokens_(std::move(tokens)),
      reference_summary_(std::move(reference_summary)),
      edu_spans_(derive_edu_spans(tokens_)) {}

std::vector<std::string> Document::edu_tokens(std::size_t edu) const {
  if (edu >= edu_spans_.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "EDU " + std::to_string(edu) + " of " +
                    std::to_string(edu_spans_.size()));
  }
  std::vector<std::string> out;
  const EduSpan span = edu_spans_[edu];
  out.reserve(span.size());
  for (std::size_t i = span.start; i < span.end; ++i) {
    out.push_back(tokens_[i].surface);
  }
  return out;
}

std::vector<std::vector<std::string>> Document::all_edu_tokens() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(edu_spans_.size());
  for (std::size_t e = 0; e < edu_spans_.size(); ++e) {
    out.push_back(edu_tokens(e));
  }
  return out;
}

std::string Document::edu_text(std::size_t edu) const {
  std::string out;
  for (const auto& tok : edu_tokens(edu)) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

Document Document::with_reference(std::optional<std::string> summary) const {
  Document copy = *this;
  copy.reference_summary_ = std::move(summary);
  return copy;
}

std::vector<EduSpan> derive_edu_spans(const std::vector<Token>& tokens) {
  std::vector<EduSpan> spans;
  bool open = false;
  int current = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& idx = tokens[i].edu_index;
    if (!idx) {
      open = false;
      continue;
    }
    if (open && current == *idx) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({i, i + 1});
      current = *idx;
      open = true;
    }
  }
  return spans;
}

std::string_view nuclearity_name(Nuclearity n) {
  switch (n) {
    case Nuclearity::Nucleus: return "Nucleus";
    case Nuclearity::Satellite: return "Satellite";
    case Nuclearity::Root: return "Root";
  }
  return "Nucleus";
}

std::vector<Token> parse_conll(std::string_view raw_text) {
  return parse_rows(raw_text, kConllFields);
}

std::string serialize_conll(const std::vector<Token>& tokens) {
  return serialize_rows(tokens, false);
}

Document parse_merge(std::string_view raw_text, std::string doc_id) {
  return Document(std::move(doc_id), parse_rows(raw_text, kMergeFields));
}

std::string serialize_merge(const Document& doc) {
  return serialize_rows(doc.tokens(), true);
}

std::vector<RstTreeNode> parse_bracket(std::string_view raw_text) {
  static const std::regex line_re(
      R"(^\s*\(\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*,\s*['"]([^'"]*)['"]\s*,\s*['"]([^'"]*)['"]\s*\)\s*$)");
  std::vector<RstTreeNode> nodes;
  std::vector<std::size_t> line_of;
  const auto lines = split_lines(raw_text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    const std::string line(lines[i]);
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) {
      throw Error(ErrorCode::MalformedBracketLine, "unparseable node", line_no);
    }
    RstTreeNode node;
    node.first_edu = std::stoi(m[1].str());
    node.last_edu = std::stoi(m[2].str());
    if (node.first_edu < 1 || node.last_edu < node.first_edu) {
      throw Error(ErrorCode::MalformedBracketLine,
                  "invalid span (" + m[1].str() + ", " + m[2].str() + ")",
                  line_no);
    }
    const auto nuc = nuclearity_from(m[3].str());
    if (!nuc) {
      throw Error(ErrorCode::MalformedBracketLine,
                  "unknown nuclearity '" + m[3].str() + "'", line_no);
    }
    node.nuclearity = *nuc;
    node.relation = m[4].str();
    nodes.push_back(std::move(node));
    line_of.push_back(line_no);
  }
  // Spans must form a laminar family: any two are nested or disjoint.
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const auto& x = nodes[a];
      const auto& y = nodes[b];
      const bool disjoint =
          x.last_edu < y.first_edu || y.last_edu < x.first_edu;
      const bool same = x.first_edu == y.first_edu && x.last_edu == y.last_edu;
      if (same || (!disjoint && !x.contains(y) && !y.contains(x))) {
        throw Error(ErrorCode::InconsistentSpan,
                    "span (" + std::to_string(y.first_edu) + ", " +
                        std::to_string(y.last_edu) + ") crosses (" +
                        std::to_string(x.first_edu) + ", " +
                        std::to_string(x.last_edu) + ")",
                    line_of[b]);
      }
    }
  }
  return nodes;
}

std::string serialize_bracket(const std::vector<RstTreeNode>& nodes) {
  std::string out;
  for (const auto& n : nodes) {
    out += "((" + std::to_string(n.first_edu) + ", " +
           std::to_string(n.last_edu) + "), '" +
           std::string(nuclearity_name(n.nuclearity)) + "', '" + n.relation +
           "')\n";
  }
  return out;
}

Document update_edu_indices(const Document& doc,
                            const std::vector<int>& new_indices) {
  std::vector<Token> tokens = doc.tokens();
  std::size_t carrying = 0;
  for (const auto& t : tokens) carrying += t.edu_index.has_value();
  if (carrying != new_indices.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(new_indices.size()) + " indices for " +
                    std::to_string(carrying) + " EDU-indexed tokens");
  }
  std::size_t next = 0;
  for (auto& t : tokens) {
    if (!t.edu_index) continue;
    const int idx = new_indices[next];
    if (idx < 0 || (next > 0 && idx < new_indices[next - 1])) {
      throw Error(ErrorCode::NonMonotoneEduIndex,
                  "replacement index " + std::to_string(idx) +
                      " at position " + std::to_string(next));
    }
    t.edu_index = idx;
    ++next;
  }
  return Document(doc.doc_id(), std::move(tokens), doc.reference_summary());
}

std::string serialize_jsonl(const Document& doc) {
  json tokens = json::array();
  for (const auto& t : doc.tokens()) {
    json jt = {{"sentence_index", t.sentence_index},
               {"token_index", t.token_index},
               {"surface", t.surface},
               {"lemma", t.lemma},
               {"pos", t.pos},
               {"dep_label", t.dep_label},
               {"dep_head", t.dep_head},
               {"ner", t.ner},
               {"constituent", t.constituent}};
    if (t.edu_index) jt["edu_index"] = *t.edu_index;
    tokens.push_back(std::move(jt));
  }
  json record = {{"version", kFormatVersion},
                 {"doc_id", doc.doc_id()},
                 {"tokens", std::move(tokens)}};
  if (doc.reference_summary()) {
    record["reference_summary"] = *doc.reference_summary();
  }
  return record.dump();
}

Document parse_jsonl(std::string_view line) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
  try {
    if (!record.is_object()) {
      throw Error(ErrorCode::MalformedRecord, "record is not an object");
    }
    if (record.contains("version") &&
        record.at("version").get<std::string>() != kFormatVersion) {
      throw Error(ErrorCode::VersionMismatch,
                  "record version " + record.at("version").get<std::string>());
    }
    std::vector<Token> tokens;
    for (const auto& jt : record.at("tokens")) {
      Token t;
      t.sentence_index = jt.at("sentence_index").get<int>();
      t.token_index = jt.at("token_index").get<int>();
      t.surface = jt.at("surface").get<std::string>();
      t.lemma = jt.at("lemma").get<std::string>();
      t.pos = jt.at("pos").get<std::string>();
      t.dep_label = jt.at("dep_label").get<std::string>();
      t.dep_head = jt.at("dep_head").get<int>();
      t.ner = jt.at("ner").get<std::string>();
      t.constituent = jt.at("constituent").get<std::string>();
      if (jt.contains("edu_index")) t.edu_index = jt.at("edu_index").get<int>();
      tokens.push_back(std::move(t));
    }
    check_token_invariants(tokens);
    std::optional<std::string> summary;
    if (record.contains("reference_summary")) {
      summary = record.at("reference_summary").get<std::string>();
    }
    return Document(record.at("doc_id").get<std::string>(), std::move(tokens),
                    std::move(summary));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

std::vector<std::pair<std::string, std::string>> parse_summary_sidecar(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    try {
      const json record = json::parse(lines[i]);
      out.emplace_back(record.at("doc_id").get<std::string>(),
                       record.at("summary").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, e.what(), i + 1);
    }
  }
  return out;
}

}  // namespace disco
