#include "disco/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "disco/bootstrap.hpp"
#include "disco/checkpoint.hpp"
#include "disco/corpus_formats.hpp"
#include "disco/discourse_graphs.hpp"
#include "disco/errors.hpp"
#include "disco/graph_features.hpp"
#include "disco/oracle.hpp"
#include "disco/rouge.hpp"
#include "disco/text.hpp"
#include "disco/training.hpp"

namespace disco {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kDocuments = "documents.jsonl";
constexpr const char* kTrees = "trees.jsonl";
constexpr const char* kGraphs = "graphs.jsonl";
constexpr const char* kLabels = "labels.jsonl";
constexpr const char* kOracleStats = "oracle_stats.json";
constexpr const char* kFeatures = "features.jsonl";
constexpr const char* kMetrics = "metrics.csv";
constexpr const char* kCheckpointDir = "checkpoint";
constexpr const char* kExtractions = "extractions.jsonl";
constexpr const char* kEvaluation = "evaluation.json";
constexpr const char* kStats = "stats.json";

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

fs::path output_dir(const PipelineOptions& o) {
  const fs::path dir = o.output.empty() ? fs::path(o.input) : fs::path(o.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::Io, "cannot create output directory " + dir.string());
  }
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + p.string());
}

json parse_record(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what(), line_no);
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "not an object", line_no);
  const std::string version = j.value("version", "");
  if (version != kFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "record version '" + version + "', expected '" +
                    std::string(kFormatVersion) + "'",
                line_no);
  }
  return j;
}

template <typename F>
auto with_line(std::size_t line_no, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.line()) throw;
    throw Error(e.code(), e.what(), line_no);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what(), line_no);
  }
}

std::vector<Document> load_documents(const fs::path& dir) {
  std::vector<Document> docs;
  std::size_t n = 0;
  for (const auto& line : read_lines(dir / kDocuments)) {
    ++n;
    docs.push_back(with_line(n, [&] { return parse_jsonl(line); }));
  }
  return docs;
}

std::map<std::string, DocumentGraphs> load_graphs(const fs::path& dir,
                                                  bool required) {
  std::map<std::string, DocumentGraphs> out;
  if (!required && !fs::exists(dir / kGraphs)) return out;
  std::size_t n = 0;
  for (const auto& line : read_lines(dir / kGraphs)) {
    ++n;
    DocumentGraphs g = with_line(n, [&] { return parse_graphs_jsonl(line); });
    out[g.doc_id] = std::move(g);
  }
  return out;
}

RstGraph graph_or_empty(const std::map<std::string, DocumentGraphs>& graphs,
                        const Document& doc) {
  const auto it = graphs.find(doc.doc_id());
  if (it != graphs.end()) {
    if (it->second.rst.num_edus != static_cast<int>(doc.num_edus())) {
      throw Error(ErrorCode::GraphSizeMismatch,
                  doc.doc_id() + ": graph has " +
                      std::to_string(it->second.rst.num_edus) + " EDUs, document " +
                      std::to_string(doc.num_edus()));
    }
    return it->second.rst;
  }
  RstGraph empty;
  empty.num_edus = static_cast<int>(doc.num_edus());
  return empty;
}

std::optional<CorefGraph> coref_of(
    const std::map<std::string, DocumentGraphs>& graphs, const std::string& id) {
  const auto it = graphs.find(id);
  return it == graphs.end() ? std::nullopt : it->second.coref;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int cmd_parse(const PipelineOptions& o) {
  const fs::path in(o.input);
  std::error_code ec;
  if (!fs::is_directory(in, ec)) {
    throw Error(ErrorCode::Io, "input directory unreadable: " + o.input);
  }
  std::map<std::string, fs::path> merges;
  std::map<std::string, fs::path> conlls;
  std::map<std::string, fs::path> brackets;
  for (const auto& entry : fs::directory_iterator(in, ec)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    const std::string stem = p.stem().string();
    if (p.extension() == ".merge") merges[stem] = p;
    if (p.extension() == ".conll") conlls[stem] = p;
    if (p.extension() == ".bracket") brackets[stem] = p;
  }
  if (ec) throw Error(ErrorCode::Io, "cannot list " + o.input);

  std::map<std::string, std::string> summaries;
  if (fs::exists(in / "summaries.jsonl")) {
    for (auto& [id, s] : parse_summary_sidecar(read_text(in / "summaries.jsonl"))) {
      summaries[id] = s;
    }
  }
  std::map<std::string, json> clusters;
  if (fs::exists(in / "coref.jsonl")) {
    std::size_t n = 0;
    for (const auto& line : read_lines(in / "coref.jsonl")) {
      ++n;
      with_line(n, [&] {
        const json j = json::parse(line);
        clusters[j.at("doc_id").get<std::string>()] = j.at("clusters");
        return 0;
      });
    }
  }

  std::map<std::string, fs::path> sources = conlls;
  for (const auto& [stem, p] : merges) sources[stem] = p;

  std::string docs_out;
  std::string trees_out;
  std::size_t failures = 0;
  for (const auto& [stem, path] : sources) {
    try {
      const std::string raw = read_text(path);
      Document doc = path.extension() == ".merge"
                         ? parse_merge(raw, stem)
                         : Document(stem, parse_conll(raw));
      if (const auto s = summaries.find(stem); s != summaries.end()) {
        doc = doc.with_reference(s->second);
      }
      std::vector<RstTreeNode> tree;
      if (const auto b = brackets.find(stem); b != brackets.end()) {
        tree = parse_bracket(read_text(b->second));
      }
      const int n = static_cast<int>(doc.num_edus());
      tree_to_graph(tree, n);  // reject trees that do not fit the document
      json cl = nullptr;
      if (const auto c = clusters.find(stem); c != clusters.end()) {
        cl = c->second;
        build_coref_graph(n, cl.get<std::vector<std::vector<int>>>());
      }
      docs_out += serialize_jsonl(doc) + "\n";
      trees_out += json{{"version", std::string(kFormatVersion)},
                        {"doc_id", stem},
                        {"num_edus", n},
                        {"bracket", serialize_bracket(tree)},
                        {"coref_clusters", cl}}
                       .dump() +
                   "\n";
    } catch (const Error& e) {
      ++failures;
      spdlog::error("{}: {}", path.filename().string(), e.what());
    } catch (const nlohmann::json::exception& e) {
      ++failures;
      spdlog::error("{}: coref clusters: {}", path.filename().string(), e.what());
    }
  }
  const fs::path out = output_dir(o);
  write_text(out / kDocuments, docs_out);
  write_text(out / kTrees, trees_out);
  spdlog::info("parse: {} documents, {} skipped", sources.size() - failures,
               failures);
  return kExitOk;
}

int cmd_graph(const PipelineOptions& o) {
  const fs::path in(o.input);
  std::string out_text;
  std::size_t n = 0;
  for (const auto& line : read_lines(in / kTrees)) {
    ++n;
    out_text += with_line(n, [&] {
      const json j = parse_record(line, n);
      DocumentGraphs g;
      g.doc_id = j.at("doc_id").get<std::string>();
      const int num_edus = j.at("num_edus").get<int>();
      g.rst = tree_to_graph(parse_bracket(j.at("bracket").get<std::string>()),
                            num_edus);
      if (!j.at("coref_clusters").is_null()) {
        g.coref = build_coref_graph(
            num_edus,
            j.at("coref_clusters").get<std::vector<std::vector<int>>>());
      }
      return serialize_graphs_jsonl(g) + "\n";
    });
  }
  write_text(output_dir(o) / kGraphs, out_text);
  return kExitOk;
}

int cmd_oracle(const PipelineOptions& o) {
  const fs::path in(o.input);
  const OracleMetric metric = parse_oracle_metric(o.metric);
  const std::vector<Document> docs = load_documents(in);
  const auto graphs = load_graphs(in, true);
  std::vector<RstGraph> rst;
  rst.reserve(docs.size());
  for (const auto& d : docs) rst.push_back(graph_or_empty(graphs, d));
  std::vector<LabelInput> inputs;
  for (std::size_t i = 0; i < docs.size(); ++i) inputs.push_back({&docs[i], &rst[i]});
  const CorpusLabels labels = label_corpus(inputs, o.budget, metric);

  std::string out_text;
  for (const auto& d : labels.documents) {
    out_text += json{{"version", std::string(kFormatVersion)},
                     {"doc_id", d.doc_id},
                     {"labels", d.labels.labels},
                     {"selected_order", d.labels.selected_order},
                     {"score", d.labels.final_score}}
                    .dump() +
                "\n";
  }
  const CorpusStats& s = labels.stats;
  const json stats{{"version", std::string(kFormatVersion)},
                   {"budget", o.budget},
                   {"metric", std::string(oracle_metric_name(metric))},
                   {"labeled_documents", labels.documents.size()},
                   {"missing_reference", s.missing_reference},
                   {"empty_oracle", s.empty_oracle_labels}};
  const fs::path out = output_dir(o);
  write_text(out / kLabels, out_text);
  write_text(out / kOracleStats, stats.dump(2) + "\n");
  return kExitOk;
}

int cmd_features(const PipelineOptions& o) {
  std::string out_text;
  for (const auto& [id, g] : load_graphs(o.input, true)) {
    const CorefGraph* coref = g.coref ? &*g.coref : nullptr;
    out_text += serialize_features_jsonl(id, encode_document(g.rst, coref)) + "\n";
  }
  write_text(output_dir(o) / kFeatures, out_text);
  return kExitOk;
}

int cmd_train(const PipelineOptions& o) {
  const fs::path in(o.input);
  TrainConfig config = o.config.empty() ? TrainConfig{} : load_train_config(o.config);
  if (o.seed) {
    config.seed = *o.seed;
    config.model.seed = *o.seed;
    config.embedding.seed = *o.seed;
  }
  const std::vector<Document> docs = load_documents(in);
  const auto graphs = load_graphs(in, true);
  std::map<std::string, std::vector<int>> labels;
  std::size_t n = 0;
  for (const auto& line : read_lines(in / kLabels)) {
    ++n;
    with_line(n, [&] {
      const json j = parse_record(line, n);
      labels[j.at("doc_id").get<std::string>()] =
          j.at("labels").get<std::vector<int>>();
      return 0;
    });
  }
  std::vector<TrainingExample> corpus;
  for (const auto& d : docs) {
    const auto it = labels.find(d.doc_id());
    if (it == labels.end()) continue;
    corpus.push_back({d.doc_id(), d.all_edu_tokens(), graph_or_empty(graphs, d),
                      coref_of(graphs, d.doc_id()), it->second});
  }
  const auto provider = make_provider(config.embedding, config.model.embed_dim);
  const TrainResult result = train(corpus, config, *provider);

  const fs::path out = output_dir(o);
  save_checkpoint((out / kCheckpointDir).string(), result.model, config.embedding);
  std::string csv = "epoch,split,precision,recall,f1,loss\n";
  for (const auto& m : result.history) {
    csv += std::to_string(m.epoch) + "," + m.split + "," + fixed6(m.precision) +
           "," + fixed6(m.recall) + "," + fixed6(m.f1) + "," + fixed6(m.loss) + "\n";
  }
  write_text(out / kMetrics, csv);
  spdlog::info("train: {} train / {} validation documents, {} epochs",
               result.train_ids.size(), result.validation_ids.size(),
               result.history.empty() ? 0 : result.history.back().epoch);
  return kExitOk;
}

int cmd_extract(const PipelineOptions& o) {
  const fs::path in(o.input);
  const fs::path ck_dir =
      o.checkpoint.empty() ? in / kCheckpointDir : fs::path(o.checkpoint);
  const Checkpoint ck = load_checkpoint(ck_dir.string());
  const auto provider = make_provider(ck.embedding, ck.model.config().embed_dim);
  const std::vector<Document> docs = load_documents(in);
  const auto graphs = load_graphs(in, true);

  Selection selection;
  selection.top_k = o.top_k;
  selection.threshold = o.threshold;
  std::string out_text;
  for (const auto& d : docs) {
    const RstGraph rst = graph_or_empty(graphs, d);
    const auto coref = coref_of(graphs, d.doc_id());
    const Extraction ex =
        predict_and_extract(ck.model, *provider, d.doc_id(), d.all_edu_tokens(),
                            &rst, coref ? &*coref : nullptr, selection);
    std::vector<std::string> words;
    for (const auto& t : d.tokens()) words.push_back(t.surface);
    json reference = nullptr;
    if (d.reference_summary()) reference = *d.reference_summary();
    out_text += json{{"version", std::string(kFormatVersion)},
                     {"doc_id", d.doc_id()},
                     {"selected", ex.selected},
                     {"candidate", ex.text},
                     {"reference", reference},
                     {"source", join(words)}}
                    .dump() +
                "\n";
  }
  write_text(output_dir(o) / kExtractions, out_text);
  return kExitOk;
}

int cmd_evaluate(const PipelineOptions& o) {
  const fs::path in(o.input);
  std::vector<double> r1;
  std::vector<double> r2;
  std::vector<double> rl;
  double novel[3] = {0.0, 0.0, 0.0};
  std::size_t n = 0;
  std::size_t skipped = 0;
  for (const auto& line : read_lines(in / kExtractions)) {
    ++n;
    with_line(n, [&] {
      const json j = parse_record(line, n);
      if (j.at("reference").is_null()) {
        ++skipped;
        return 0;
      }
      const Tokens cand = tokenize(j.at("candidate").get<std::string>());
      const Tokens ref = tokenize(j.at("reference").get<std::string>());
      const Tokens src = tokenize(j.value("source", std::string()));
      r1.push_back(rouge_n(cand, ref, 1).f1);
      r2.push_back(rouge_n(cand, ref, 2).f1);
      rl.push_back(rouge_l(cand, ref).f1);
      for (int k = 0; k < 3; ++k) novel[k] += novel_ngram_proportion(cand, src, k + 1);
      return 0;
    });
  }
  const std::uint64_t seed = o.seed.value_or(0);
  auto metric = [&](const std::vector<double>& scores) {
    if (scores.empty()) {
      return json{{"point", 0.0}, {"lower", 0.0}, {"upper", 0.0}, {"margin", 0.0}};
    }
    const BootstrapResult b = bootstrap_ci(scores, o.replicates, o.confidence, seed);
    return json{{"point", b.point_estimate},
                {"lower", b.lower},
                {"upper", b.upper},
                {"margin", b.margin_of_error}};
  };
  const double count = r1.empty() ? 1.0 : static_cast<double>(r1.size());
  const json report{{"version", std::string(kFormatVersion)},
                    {"documents", r1.size()},
                    {"skipped_without_reference", skipped},
                    {"replicates", o.replicates},
                    {"confidence", o.confidence},
                    {"seed", seed},
                    {"rouge1", metric(r1)},
                    {"rouge2", metric(r2)},
                    {"rougeL", metric(rl)},
                    {"novel_ngrams",
                     {{"1", novel[0] / count},
                      {"2", novel[1] / count},
                      {"3", novel[2] / count}}}};
  write_text(output_dir(o) / kEvaluation, report.dump(2) + "\n");
  return kExitOk;
}

int cmd_stats(const PipelineOptions& o) {
  const fs::path in(o.input);
  const OracleMetric metric = parse_oracle_metric(o.metric);
  const std::vector<Document> docs = load_documents(in);
  const auto graphs = load_graphs(in, false);
  std::vector<RstGraph> rst;
  rst.reserve(docs.size());
  for (const auto& d : docs) rst.push_back(graph_or_empty(graphs, d));
  std::vector<LabelInput> inputs;
  for (std::size_t i = 0; i < docs.size(); ++i) inputs.push_back({&docs[i], &rst[i]});
  const CorpusStats s = label_corpus(inputs, o.budget, metric).stats;
  const json stats{{"version", std::string(kFormatVersion)},
                   {"average_edus", s.avg_edus},
                   {"average_summary_words", s.avg_summary_words},
                   {"empty_rst", s.empty_rst_graph},
                   {"empty_oracle", s.empty_oracle_labels},
                   {"empty_both", s.empty_both},
                   {"total_records", s.total_records},
                   {"missing_reference", s.missing_reference}};
  write_text(output_dir(o) / kStats, stats.dump(2) + "\n");
  return kExitOk;
}

int run_stage(const std::string& name, const PipelineOptions& o) {
  static const std::map<std::string, int (*)(const PipelineOptions&)> stages = {
      {"parse", cmd_parse},       {"graph", cmd_graph},
      {"oracle-label", cmd_oracle}, {"features", cmd_features},
      {"train", cmd_train},       {"extract", cmd_extract},
      {"evaluate", cmd_evaluate}, {"stats", cmd_stats},
  };
  const auto it = stages.find(name);
  if (it == stages.end()) {
    spdlog::error("unknown command '{}'", name);
    return kExitValidation;
  }
  try {
    return it->second(o);
  } catch (const Error& e) {
    spdlog::error("{}: {}", name, e.what());
    switch (e.code()) {
      case ErrorCode::Io: return kExitIo;
      case ErrorCode::VersionMismatch: return kExitVersion;
      default: return kExitValidation;
    }
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}: {}", name, e.what());
    return kExitIo;
  }
}

void configure_logging() {
  auto logger = spdlog::get("disco");
  if (!logger) logger = spdlog::stderr_logger_mt("disco");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("DISCO_LOG")) {
    // from_str maps unknown names to off; keep the default for those.
    const auto parsed = spdlog::level::from_str(level);
    if (parsed != spdlog::level::off || std::string_view(level) == "off") {
      spdlog::set_level(parsed);
    } else {
      spdlog::warn("ignoring DISCO_LOG={}", level);
    }
  }
}

}  // namespace disco
