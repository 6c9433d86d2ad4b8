#include "disco/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>
#include <toml.hpp>

#include "disco/errors.hpp"
#include "disco/random.hpp"
#include "disco/text.hpp"

namespace disco {

using nn::Matrix;
using nn::Var;

LrSchedule::Kind parse_schedule_kind(std::string_view s) {
  if (s == "constant") return LrSchedule::Kind::Constant;
  if (s == "linear") return LrSchedule::Kind::Linear;
  if (s == "step") return LrSchedule::Kind::Step;
  if (s == "exponential") return LrSchedule::Kind::Exponential;
  throw Error(ErrorCode::InvalidConfig, "unknown lr schedule '" + std::string(s) + "'");
}

std::string_view schedule_kind_name(LrSchedule::Kind k) {
  switch (k) {
    case LrSchedule::Kind::Constant: return "constant";
    case LrSchedule::Kind::Linear: return "linear";
    case LrSchedule::Kind::Step: return "step";
    case LrSchedule::Kind::Exponential: return "exponential";
  }
  return "linear";
}

double lr_at_step(const LrSchedule& s, int step) {
  step = std::max(step, 0);
  switch (s.kind) {
    case LrSchedule::Kind::Constant:
      return s.initial;
    case LrSchedule::Kind::Linear: {
      if (s.total_steps <= 0) return step == 0 ? s.initial : 0.0;
      const double frac = std::min(1.0, static_cast<double>(step) / s.total_steps);
      return s.initial * (1.0 - frac);
    }
    case LrSchedule::Kind::Step:
      return s.initial *
             std::pow(s.gamma, static_cast<double>(step / std::max(s.step_size, 1)));
    case LrSchedule::Kind::Exponential:
      return s.initial * std::pow(s.gamma, static_cast<double>(step));
  }
  return s.initial;
}

namespace {

void validate(const TrainConfig& c) {
  if (c.epochs_frozen < 0 || c.epochs_full < 0) {
    throw Error(ErrorCode::InvalidConfig, "epochs must be >= 0");
  }
  if (!(c.lr.initial > 0.0)) throw Error(ErrorCode::InvalidConfig, "lr must be > 0");
  if ((c.lr.kind == LrSchedule::Kind::Step ||
       c.lr.kind == LrSchedule::Kind::Exponential) &&
      !(c.lr.gamma > 0.0 && c.lr.gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "lr gamma must lie in (0, 1]");
  }
  if (c.pos_weight < 1.0) throw Error(ErrorCode::InvalidConfig, "pos_weight < 1");
  if (c.batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size < 1");
  if (c.model.dropout < 0.0 || c.model.dropout >= 1.0) {
    throw Error(ErrorCode::InvalidConfig, "dropout must lie in [0, 1)");
  }
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "validation_fraction must lie in [0, 1)");
  }
  if (c.budget < 0) throw Error(ErrorCode::InvalidConfig, "budget < 0");
  const auto& m = c.model;
  if (m.embed_dim < 1 || m.gat_heads < 1 || m.gat_hidden < 1 || m.gat_stages < 1) {
    throw Error(ErrorCode::InvalidConfig, "model widths must be >= 1");
  }
  if (m.tower.empty() || m.tower.back() != 1 ||
      std::any_of(m.tower.begin(), m.tower.end(), [](int d) { return d < 1; })) {
    throw Error(ErrorCode::InvalidConfig, "tower widths must be >= 1 and end in 1");
  }
}

template <typename T>
T get_or(const toml::table& t, std::string_view path, T fallback) {
  return t.at_path(path).value<T>().value_or(fallback);
}

}  // namespace

TrainConfig parse_train_config(std::string_view toml_text) {
  toml::table t;
  try {
    t = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string(e.description()),
                static_cast<std::size_t>(e.source().begin.line));
  }
  TrainConfig c;
  c.seed = static_cast<std::uint64_t>(get_or<std::int64_t>(t, "seed", 0));
  c.epochs_frozen = get_or<int>(t, "train.epochs_frozen", c.epochs_frozen);
  c.epochs_full = get_or<int>(t, "train.epochs_full", c.epochs_full);
  c.pos_weight = get_or<double>(t, "train.pos_weight", c.pos_weight);
  c.batch_size = get_or<int>(t, "train.batch_size", c.batch_size);
  c.threshold = get_or<double>(t, "train.threshold", c.threshold);
  c.validation_fraction =
      get_or<double>(t, "train.validation_fraction", c.validation_fraction);
  c.stop_at_perfect_validation = get_or<bool>(
      t, "train.stop_at_perfect_validation", c.stop_at_perfect_validation);
  c.momentum = get_or<double>(t, "train.momentum", c.momentum);
  const std::string opt = get_or<std::string>(t, "train.optimizer", "sgd");
  if (opt == "sgd") {
    c.optimizer = OptimizerKind::SgdMomentum;
  } else if (opt == "adam") {
    c.optimizer = OptimizerKind::Adam;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown optimizer '" + opt + "'");
  }
  c.lr.kind = parse_schedule_kind(
      get_or<std::string>(t, "train.lr.kind", std::string(schedule_kind_name(c.lr.kind))));
  c.lr.initial = get_or<double>(t, "train.lr.initial", c.lr.initial);
  c.lr.total_steps = get_or<int>(t, "train.lr.total_steps", c.lr.total_steps);
  c.lr.step_size = get_or<int>(t, "train.lr.step_size", c.lr.step_size);
  c.lr.gamma = get_or<double>(t, "train.lr.gamma", c.lr.gamma);
  c.schedule_spans_run = !t.at_path("train.lr.total_steps").is_value() &&
                         get_or<bool>(t, "train.lr.spans_run", true);

  c.budget = get_or<int>(t, "oracle.budget", c.budget);
  c.metric = parse_oracle_metric(get_or<std::string>(
      t, "oracle.metric", std::string(oracle_metric_name(c.metric))));

  ModelConfig& m = c.model;
  m.seed = c.seed;
  m.embed_dim = get_or<int>(t, "model.embed_dim", m.embed_dim);
  m.mode = parse_graph_mode(
      get_or<std::string>(t, "model.mode", std::string(graph_mode_name(m.mode))));
  m.use_rst = get_or<bool>(t, "model.use_rst", m.use_rst);
  m.use_coref = get_or<bool>(t, "model.use_coref", m.use_coref);
  m.gat_heads = get_or<int>(t, "model.gat_heads", m.gat_heads);
  m.gat_hidden = get_or<int>(t, "model.gat_hidden", m.gat_hidden);
  m.gat_stages = get_or<int>(t, "model.gat_stages", m.gat_stages);
  m.dropout = get_or<double>(t, "model.dropout", m.dropout);
  const std::string act = get_or<std::string>(t, "model.activation", "relu");
  if (act == "relu") {
    m.activation = nn::Activation::ReLU;
  } else if (act == "elu") {
    m.activation = nn::Activation::ELU;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown activation '" + act + "'");
  }
  if (const auto* tower = t.at_path("model.tower").as_array()) {
    m.tower.clear();
    for (const auto& v : *tower) {
      const auto dim = v.value<int>();
      if (!dim || *dim < 1) throw Error(ErrorCode::InvalidConfig, "tower dims");
      m.tower.push_back(*dim);
    }
  }

  c.embedding.kind = get_or<std::string>(t, "embedding.kind", c.embedding.kind);
  c.embedding.path = get_or<std::string>(t, "embedding.path", c.embedding.path);
  c.embedding.seed = static_cast<std::uint64_t>(
      get_or<std::int64_t>(t, "embedding.seed", static_cast<std::int64_t>(c.seed)));
  validate(c);
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_train_config(text.str());
}

std::vector<bool> validation_split(const std::vector<std::string>& doc_ids,
                                   double fraction) {
  std::vector<bool> is_val(doc_ids.size(), false);
  if (doc_ids.size() < 2) return is_val;
  const double cut = std::clamp(fraction, 0.0, 1.0);
  // FNV high bits barely move between similar ids; mix before bucketing.
  std::vector<std::uint64_t> h;
  for (const auto& id : doc_ids) h.push_back(mix64(stable_hash(id)));
  std::size_t count = 0;
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    const double u = static_cast<double>(h[i] >> 11) * 0x1.0p-53;
    is_val[i] = u < cut;
    count += is_val[i];
  }
  if (count == 0 || count == doc_ids.size()) {
    std::fill(is_val.begin(), is_val.end(), false);
    std::size_t lowest = 0;
    for (std::size_t i = 1; i < doc_ids.size(); ++i) {
      if (h[i] < h[lowest]) lowest = i;
    }
    is_val[lowest] = true;
  }
  return is_val;
}

namespace {

struct Prepared {
  const TrainingExample* example;
  ModelInput input;
};

Prepared prepare(const TrainingExample& ex, const EmbeddingProvider& provider) {
  if (ex.labels.size() != ex.edus.size()) {
    throw Error(ErrorCode::LengthMismatch,
                ex.doc_id + ": " + std::to_string(ex.labels.size()) +
                    " labels for " + std::to_string(ex.edus.size()) + " EDUs");
  }
  Prepared p{&ex, {}};
  p.input.edus = provider.embed(ex.doc_id, ex.edus);
  p.input.rst = &ex.rst;
  p.input.coref = ex.coref ? &*ex.coref : nullptr;
  return p;
}

EpochMetrics score(const ExtractorModel& model,
                   const std::vector<Prepared>& docs, double threshold,
                   double pos_weight) {
  EpochMetrics m;
  std::vector<int> predicted;
  std::vector<int> gold;
  double loss = 0.0;
  for (const auto& d : docs) {
    if (d.example->edus.empty()) continue;
    const Var probs = model.forward(d.input, false);
    loss += nn::weighted_mse_loss(probs, d.example->labels, pos_weight).scalar();
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      predicted.push_back(probs.value()(i, 0) > threshold ? 1 : 0);
    }
    gold.insert(gold.end(), d.example->labels.begin(), d.example->labels.end());
  }
  const SelectionScore s = selection_prf(predicted, gold);
  m.precision = s.precision;
  m.recall = s.recall;
  m.f1 = s.f1;
  m.loss = docs.empty() ? 0.0 : loss / static_cast<double>(docs.size());
  return m;
}

class Optimizer {
 public:
  Optimizer(const TrainConfig& c, const nn::ParameterList& params)
      : config_(c), params_(params) {
    for (const auto& p : params_) {
      first_.push_back(Matrix::Zero(p.var.rows(), p.var.cols()));
      second_.push_back(Matrix::Zero(p.var.rows(), p.var.cols()));
    }
  }

  void step(double lr) {
    ++t_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Var v = params_[i].var;
      if (!v.requires_grad()) continue;
      const Matrix g = v.grad();
      if (config_.optimizer == OptimizerKind::SgdMomentum) {
        first_[i] = config_.momentum * first_[i] + g;
        v.mutable_value() -= lr * first_[i];
      } else {
        first_[i] = config_.adam_beta1 * first_[i] + (1.0 - config_.adam_beta1) * g;
        second_[i] = config_.adam_beta2 * second_[i] +
                     (1.0 - config_.adam_beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(config_.adam_beta1, t_);
        const double c2 = 1.0 - std::pow(config_.adam_beta2, t_);
        v.mutable_value().array() -=
            lr * (first_[i].array() / c1) /
            ((second_[i].array() / c2).sqrt() + config_.adam_eps);
      }
    }
  }

  void zero_grad() {
    for (const auto& p : params_) {
      Var v = p.var;
      v.zero_grad();
    }
  }

 private:
  const TrainConfig& config_;
  nn::ParameterList params_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  int t_ = 0;
};

}  // namespace

EpochMetrics evaluate_selection(const ExtractorModel& model,
                                const std::vector<TrainingExample>& examples,
                                const EmbeddingProvider& provider,
                                double threshold, double pos_weight) {
  std::vector<Prepared> docs;
  for (const auto& ex : examples) docs.push_back(prepare(ex, provider));
  return score(model, docs, threshold, pos_weight);
}

TrainResult train(const std::vector<TrainingExample>& corpus,
                  const TrainConfig& config, const EmbeddingProvider& provider) {
  validate(config);
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "nothing to train on");
  if (provider.dim() != config.model.embed_dim) {
    throw Error(ErrorCode::ShapeMismatch,
                "provider dim " + std::to_string(provider.dim()) +
                    " vs model dim " + std::to_string(config.model.embed_dim));
  }

  std::vector<std::string> ids;
  for (const auto& ex : corpus) ids.push_back(ex.doc_id);
  const std::vector<bool> is_val = validation_split(ids, config.validation_fraction);

  TrainResult result{ExtractorModel(config.model), {}, {}, {}, std::nullopt};
  std::vector<Prepared> train_docs;
  std::vector<Prepared> val_docs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].edus.empty()) continue;
    Prepared p = prepare(corpus[i], provider);
    if (is_val[i]) {
      result.validation_ids.push_back(corpus[i].doc_id);
      val_docs.push_back(std::move(p));
    } else {
      result.train_ids.push_back(corpus[i].doc_id);
      train_docs.push_back(std::move(p));
    }
  }
  if (train_docs.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no training documents with EDUs");
  }

  const ExtractorModel& model = result.model;
  const nn::ParameterList params = model.parameters();
  const nn::ParameterList encoder = model.encoder_parameters();
  Optimizer optimizer(config, params);

  const int total_epochs = config.epochs_frozen + config.epochs_full;
  const int batch = config.batch_size;
  const int steps_per_epoch =
      (static_cast<int>(train_docs.size()) + batch - 1) / batch;
  LrSchedule schedule = config.lr;
  if (config.schedule_spans_run && schedule.kind == LrSchedule::Kind::Linear) {
    schedule.total_steps = total_epochs * steps_per_epoch;
  }

  Rng shuffle_rng(derive_seed(config.seed, stable_hash("shuffle")));
  Rng dropout_rng(derive_seed(config.seed, stable_hash("dropout")));
  std::vector<std::size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  int step = 0;

  for (int epoch = 1; epoch <= total_epochs; ++epoch) {
    const bool frozen = epoch <= config.epochs_frozen;
    for (const auto& p : encoder) {
      Var v = p.var;
      v.set_requires_grad(!frozen);
    }
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
      optimizer.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const Prepared& d = train_docs[order[k]];
        const Var probs = model.forward(d.input, true, &dropout_rng);
        const Var loss = nn::scale(
            nn::weighted_mse_loss(probs, d.example->labels, config.pos_weight),
            1.0 / static_cast<double>(end - start));
        if (!std::isfinite(loss.scalar())) {
          throw Error(ErrorCode::NonFiniteLoss,
                      "epoch " + std::to_string(epoch) + ", document " +
                          d.example->doc_id + ", lr " +
                          std::to_string(lr_at_step(schedule, step)));
        }
        nn::backward(loss);
      }
      optimizer.step(lr_at_step(schedule, step));
      ++step;
    }

    EpochMetrics train_m = score(model, train_docs, config.threshold, config.pos_weight);
    train_m.epoch = epoch;
    train_m.split = "train";
    result.history.push_back(train_m);
    if (!val_docs.empty()) {
      EpochMetrics val_m = score(model, val_docs, config.threshold, config.pos_weight);
      val_m.epoch = epoch;
      val_m.split = "validation";
      result.history.push_back(val_m);
      spdlog::debug("epoch {} ({}) train loss {:.6f} f1 {:.3f} | val f1 {:.3f}",
                    epoch, frozen ? "frozen" : "full", train_m.loss, train_m.f1,
                    val_m.f1);
      if (val_m.f1 == 1.0 && !result.perfect_validation_epoch) {
        result.perfect_validation_epoch = epoch;
        if (config.stop_at_perfect_validation) break;
      }
    }
  }
  for (const auto& p : encoder) {
    Var v = p.var;
    v.set_requires_grad(true);
    v.zero_grad();
  }
  for (const auto& p : params) {
    Var v = p.var;
    v.zero_grad();
  }
  return result;
}

Extraction predict_and_extract(const ExtractorModel& model,
                               const EmbeddingProvider& provider,
                               const std::string& doc_id,
                               const std::vector<Tokens>& edus,
                               const RstGraph* rst, const CorefGraph* coref,
                               const Selection& selection) {
  Extraction out;
  if (edus.empty()) return out;
  ModelInput input;
  input.edus = provider.embed(doc_id, edus);
  input.rst = rst;
  input.coref = coref;
  const Var probs = model.forward(input, false);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    out.probabilities.push_back(probs.value()(i, 0));
  }
  if (selection.top_k) {
    std::vector<int> ranked(edus.size());
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
      return out.probabilities[static_cast<std::size_t>(a)] >
             out.probabilities[static_cast<std::size_t>(b)];
    });
    const auto k = static_cast<std::size_t>(
        std::clamp(*selection.top_k, 0, static_cast<int>(edus.size())));
    out.selected.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.selected.begin(), out.selected.end());
  } else {
    for (std::size_t i = 0; i < edus.size(); ++i) {
      if (out.probabilities[i] > selection.threshold) {
        out.selected.push_back(static_cast<int>(i));
      }
    }
  }
  std::vector<std::string> parts;
  for (int e : out.selected) parts.push_back(join(edus[static_cast<std::size_t>(e)]));
  out.text = join(parts);
  return out;
}

}  // namespace disco
