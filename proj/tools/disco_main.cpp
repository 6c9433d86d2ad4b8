// Command-line front end: one subcommand per pipeline stage.

#include <CLI11.hpp>

#include "disco/pipeline.hpp"

int main(int argc, char** argv) {
  disco::configure_logging();

  CLI::App app{"Discourse-aware extractive summarization pipeline"};
  app.require_subcommand(1);

  disco::PipelineOptions opts;
  std::uint64_t seed = 0;
  int top_k = 0;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"parse", "read .merge/.conll/.bracket files into JSONL documents and trees"},
      {"graph", "convert RST trees and coref clusters into EDU graphs"},
      {"oracle-label", "derive greedy ROUGE oracle labels"},
      {"features", "encode 256-dim graph feature vectors per EDU"},
      {"train", "train the extraction model"},
      {"extract", "select important EDUs with a trained checkpoint"},
      {"evaluate", "ROUGE with bootstrap confidence intervals"},
      {"stats", "corpus statistics"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--input", opts.input, "input directory")->required();
    sub->add_option("--output", opts.output, "output directory (default: input)");
    sub->add_option("--seed", seed, "random seed");
    if (name == "oracle-label" || name == "stats") {
      sub->add_option("--budget", opts.budget, "maximum EDUs per oracle summary");
      sub->add_option("--metric", opts.metric, "r1|r2|rl|mean-r1r2");
    }
    if (name == "train") sub->add_option("--config", opts.config, "TOML config");
    if (name == "extract") {
      sub->add_option("--checkpoint", opts.checkpoint, "checkpoint directory");
      sub->add_option("--top-k", top_k, "select the k most probable EDUs");
      sub->add_option("--threshold", opts.threshold, "select EDUs with p > threshold");
    }
    if (name == "evaluate") {
      sub->add_option("--replicates", opts.replicates, "bootstrap replicates");
      sub->add_option("--confidence", opts.confidence, "confidence level");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : disco::kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) opts.seed = seed;
  if (sub->get_option_no_throw("--top-k") != nullptr && sub->count("--top-k") > 0) {
    opts.top_k = top_k;
  }
  return disco::run_stage(sub->get_name(), opts);
}
