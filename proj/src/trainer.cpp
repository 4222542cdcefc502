#include "fairgb/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace fairgb {

std::string method_name(Method m) {
  switch (m) {
    case Method::vanilla: return "vanilla";
    case Method::rw: return "rw";
    case Method::os: return "os";
    case Method::fairgb: return "fairgb";
    case Method::fairgb_wo_cal: return "fairgb_wo_cal";
    case Method::fairgb_wo_cnm: return "fairgb_wo_cnm";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::vanilla, Method::rw, Method::os, Method::fairgb,
                   Method::fairgb_wo_cal, Method::fairgb_wo_cnm}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

std::string encoder_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::gcn: return "gcn";
    case EncoderKind::sage: return "sage";
    case EncoderKind::gin: return "gin";
  }
  return "unknown";
}

EncoderKind parse_encoder(const std::string& name) {
  for (EncoderKind k : {EncoderKind::gcn, EncoderKind::sage, EncoderKind::gin}) {
    if (encoder_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown encoder: " + name);
}

void TrainConfig::validate(const Graph& graph) const {
  encoder.validate();
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (warmup < 0 || warmup > epochs) {
    throw std::invalid_argument("train config: warmup must lie in [0, epochs]");
  }
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("train config: eta outside [0,1]");
  if (beta_alpha <= 0.0) throw std::invalid_argument("train config: beta_alpha must be > 0");
  if (repeats < 1) throw std::invalid_argument("train config: repeats must be >= 1");
  if (adam.lr <= 0.0) throw std::invalid_argument("train config: lr must be > 0");
  if (graph.num_classes != 2) {
    throw std::invalid_argument("train config: binary labels required (num_classes == 2)");
  }
  if (graph.train_mask.empty()) throw std::invalid_argument("train config: empty train set");
  for (int v : graph.train_mask) {
    if (graph.labels[v] == kUndefined) {
      throw std::invalid_argument("train config: train node " + std::to_string(v) +
                                  " has no label");
    }
  }
  if (method != Method::vanilla) {
    GroupTable groups = build_group_table(graph);  // throws on missing sensitive values
    if (method == Method::fairgb || method == Method::fairgb_wo_cal) {
      std::set<int> sens;
      for (const auto& [key, nodes] : groups.groups) sens.insert(key.s);
      if (sens.size() < 2) {
        throw std::invalid_argument(
            "train config: mixup needs at least two sensitive groups in the train set");
      }
    }
  }
}

namespace {

Matrix extract_rows(const Matrix& m, std::span<const int> rows) {
  Matrix out(static_cast<int>(rows.size()), m.cols);
  for (size_t r = 0; r < rows.size(); ++r) {
    std::copy(m.row(rows[r]).begin(), m.row(rows[r]).end(),
              out.row(static_cast<int>(r)).begin());
  }
  return out;
}

void scatter_rows(Matrix& full, std::span<const int> rows, const Matrix& part) {
  for (size_t r = 0; r < rows.size(); ++r) {
    std::copy(part.row(static_cast<int>(r)).begin(), part.row(static_cast<int>(r)).end(),
              full.row(rows[r]).begin());
  }
}

std::vector<double> positive_probs(const Matrix& logits) {
  Matrix prob = softmax_rows(logits);
  std::vector<double> p(prob.rows);
  for (int r = 0; r < prob.rows; ++r) p[r] = prob.at(r, 1);
  return p;
}

double selection_score(const Evaluation& val, int epoch, bool has_valid) {
  if (!has_valid) return static_cast<double>(epoch);
  double sum = 0.0;
  int n = 0;
  if (val.auc) {
    sum += *val.auc;
    ++n;
  }
  if (val.f1) {
    sum += *val.f1;
    ++n;
  }
  if (n == 0 && val.accuracy) {
    sum = *val.accuracy;
    n = 1;
  }
  return n > 0 ? sum / n : static_cast<double>(epoch);
}

// State shared by the oversampling branch, built once per run.
struct OsState {
  bool ready = false;
  AugmentedGraph aug;
  Matrix features;
  std::vector<std::vector<int>> neighbor_lists;
  AggOp agg;
  std::vector<int> rows;    // train rows then injected rows
  std::vector<int> labels;  // matching labels
};

}  // namespace

TrainOutcome train(const Graph& graph, const TrainConfig& cfg, uint64_t run_seed) {
  cfg.validate(graph);
  GroupTable groups;
  if (cfg.method != Method::vanilla) groups = build_group_table(graph);

  Rng init_rng(Rng::mix(run_seed, kRngInit));
  ModelState state = init_model(cfg.encoder, graph.features.cols, graph.num_classes, init_rng);
  Rng dropout_rng(Rng::mix(run_seed, kRngDropout));

  const AggOp base_agg = build_agg(cfg.encoder.kind, graph.adj);
  const CnmConfig cnm_cfg{cfg.eta, cfg.beta_alpha, cfg.degree_mode};

  std::vector<int> train_labels;
  train_labels.reserve(graph.train_mask.size());
  for (int v : graph.train_mask) train_labels.push_back(graph.labels[v]);

  std::vector<double> rw_row_weights;
  if (cfg.method == Method::rw) {
    auto wmap = rw_weights(groups);
    for (int v : graph.train_mask) rw_row_weights.push_back(wmap.at(v));
  }

  OsState os;

  TrainOutcome out;
  out.record.seed = run_seed;
  const bool has_valid = !graph.valid_mask.empty();
  double best = -std::numeric_limits<double>::infinity();

  for (int t = 1; t <= cfg.epochs; ++t) {
    EpochRecord rec;
    rec.epoch = t;
    state.zero_grads();
    const bool warm = t <= cfg.warmup || cfg.method == Method::vanilla;

    if (warm || cfg.method == Method::rw || cfg.method == Method::fairgb_wo_cnm) {
      // Plain-graph branch: CE over train nodes, optionally re-weighted.
      std::vector<double> row_weights(graph.train_mask.size(), 1.0);
      if (!warm && cfg.method == Method::rw) row_weights = rw_row_weights;
      if (!warm && cfg.method == Method::fairgb_wo_cnm) {
        // Gradient measurement on the plain graph, then frozen group weights.
        ForwardCache mcache;
        Matrix z = encode(base_agg, graph.features, cfg.encoder, state, mcache, nullptr);
        Matrix logits = classify(z, cfg.encoder, state);
        ContributionLedger ledger;
        ledger.epoch = t;
        for (int v : graph.train_mask) {
          ledger.r[{graph.labels[v], graph.sensitive[v]}] +=
              contribution(logits.row(v), graph.labels[v]);
        }
        GroupWeights weights = group_weights(ledger);
        for (size_t k = 0; k < graph.train_mask.size(); ++k) {
          const int v = graph.train_mask[k];
          row_weights[k] = weights.w.at({graph.labels[v], graph.sensitive[v]});
        }
        rec.ledger = ledger.r;
        rec.weights = weights.w;
      }
      ForwardCache cache;
      Matrix z = encode(base_agg, graph.features, cfg.encoder, state, cache, &dropout_rng);
      Matrix logits = classify(z, cfg.encoder, state);
      CalResult res =
          weighted_ce(extract_rows(logits, graph.train_mask), train_labels, row_weights);
      Matrix dlogits(logits.rows, logits.cols);
      scatter_rows(dlogits, graph.train_mask, res.grad);
      model_backward(base_agg, cfg.encoder, state, cache, dlogits);
      rec.loss = res.loss;
    } else if (cfg.method == Method::os) {
      if (!os.ready) {
        Rng os_rng(Rng::mix(run_seed, kRngOversample));
        os.aug = materialize_oversample(graph, oversample(groups, os_rng));
        os.features = os.aug.build_features();
        os.neighbor_lists = os.aug.neighbor_lists();
        os.agg = build_agg(cfg.encoder.kind, graph.adj, os.neighbor_lists);
        os.rows = graph.train_mask;
        os.labels = train_labels;
        for (int m = 0; m < os.aug.num_injected(); ++m) {
          os.rows.push_back(graph.num_nodes() + m);
          os.labels.push_back(os.aug.injected[m].y_i);
        }
        os.ready = true;
      }
      ForwardCache cache;
      Matrix z = encode(os.agg, os.features, cfg.encoder, state, cache, &dropout_rng);
      Matrix logits = classify(z, cfg.encoder, state);
      std::vector<double> unit(os.rows.size(), 1.0);
      CalResult res = weighted_ce(extract_rows(logits, os.rows), os.labels, unit);
      Matrix dlogits(logits.rows, logits.cols);
      scatter_rows(dlogits, os.rows, res.grad);
      model_backward(os.agg, cfg.encoder, state, cache, dlogits);
      rec.loss = res.loss;
    } else {
      // Mixup branch (fairgb and fairgb_wo_cal).
      AugmentedGraph aug = build_augmented_graph(graph, groups, cnm_cfg, run_seed, t);
      Matrix feats = aug.build_features();
      auto neighbor_lists = aug.neighbor_lists();
      AggOp agg = build_agg(cfg.encoder.kind, graph.adj, neighbor_lists);
      std::vector<int> injected_rows(aug.num_injected());
      for (int m = 0; m < aug.num_injected(); ++m) injected_rows[m] = graph.num_nodes() + m;

      GroupWeights weights;
      if (cfg.method == Method::fairgb) {
        // Measurement pass without dropout; weights frozen for this epoch.
        ForwardCache mcache;
        Matrix z = encode(agg, feats, cfg.encoder, state, mcache, nullptr);
        Matrix logits = classify(z, cfg.encoder, state);
        auto sides = pair_contributions(extract_rows(logits, injected_rows), aug.injected);
        ContributionLedger ledger = accumulate(sides, t);
        weights = group_weights(ledger);
        rec.ledger = ledger.r;
        rec.weights = weights.w;
      } else {
        weights = unit_weights(aug.injected);
      }
      rec.occurrences = pair_occurrences(aug);

      ForwardCache cache;
      Matrix z = encode(agg, feats, cfg.encoder, state, cache, &dropout_rng);
      Matrix logits = classify(z, cfg.encoder, state);
      CalResult res = cal_loss(extract_rows(logits, injected_rows), aug.injected, weights);
      Matrix dlogits(logits.rows, logits.cols);
      scatter_rows(dlogits, injected_rows, res.grad);
      model_backward(agg, cfg.encoder, state, cache, dlogits);
      rec.loss = res.loss;
    }

    adam_step(state, cfg.adam);

    // Checkpoint selection on the plain graph without dropout.
    ForwardCache ecache;
    Matrix z = encode(base_agg, graph.features, cfg.encoder, state, ecache, nullptr);
    Matrix logits = classify(z, cfg.encoder, state);
    std::vector<double> p1 = positive_probs(logits);
    Evaluation val = evaluate_nodes(graph, graph.valid_mask, p1);
    const double score = selection_score(val, t, has_valid);
    rec.val_score = score;
    if (score > best) {
      best = score;
      out.best_state = state;
      out.record.best_epoch = t;
      out.record.valid = val;
      out.record.test = evaluate_nodes(graph, graph.test_mask, p1);
    }
    out.record.epochs.push_back(std::move(rec));
  }
  return out;
}

namespace {

struct MetricColumn {
  const char* key;
  std::optional<double> Evaluation::* field;
};

constexpr MetricColumn kMetricColumns[] = {
    {"accuracy", &Evaluation::accuracy},   {"f1", &Evaluation::f1},
    {"auc", &Evaluation::auc},             {"delta_sp", &Evaluation::delta_sp},
    {"delta_eo", &Evaluation::delta_eo},   {"delta_eodds", &Evaluation::delta_eodds},
};

MetricAggregate aggregate_metric(const std::vector<RepeatResult>& repeats,
                                 std::optional<double> Evaluation::* field, bool sample_std) {
  std::vector<double> values;
  for (const auto& rep : repeats) {
    if (rep.test.*field) values.push_back(*(rep.test.*field));
  }
  MetricAggregate agg;
  agg.count = static_cast<int>(values.size());
  if (values.empty()) return agg;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  agg.mean = mean;
  if (values.size() > 1) {
    const double denom = sample_std ? values.size() - 1.0 : values.size();
    agg.stddev = std::sqrt(ss / denom);
  }
  return agg;
}

int worker_count(int repeats) {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("FAIRGB_THREADS")) {
    int requested = 0;
    try {
      requested = std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("FAIRGB_THREADS is not a number");
    }
    if (requested < 1) throw std::invalid_argument("FAIRGB_THREADS must be >= 1");
    threads = std::min(threads, requested);
  }
  return std::min(threads, repeats);
}

}  // namespace

RunReport run_experiment(const Graph& graph, const TrainConfig& cfg,
                         const std::string& dataset_name) {
  cfg.validate(graph);
  RunReport report;
  report.dataset_name = dataset_name;
  report.config = cfg;
  report.repeats.resize(cfg.repeats);

  std::atomic<int> next{0};
  std::vector<std::string> failures(cfg.repeats);
  auto worker = [&]() {
    while (true) {
      const int k = next.fetch_add(1);
      if (k >= cfg.repeats) return;
      const uint64_t run_seed = cfg.seed + static_cast<uint64_t>(k);
      try {
        report.repeats[k] = train(graph, cfg, run_seed).record;
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };

  const int threads = worker_count(cfg.repeats);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (int k = 0; k < cfg.repeats; ++k) {
    if (!failures[k].empty()) {
      throw std::runtime_error("repeat with seed " + std::to_string(cfg.seed + k) +
                               " failed: " + failures[k]);
    }
  }

  for (const auto& col : kMetricColumns) {
    report.aggregate[col.key] = aggregate_metric(report.repeats, col.field, cfg.sample_std);
  }
  return report;
}

namespace {

using nlohmann::json;

std::string group_key(GroupKey key) {
  return std::to_string(key.y) + "," + std::to_string(key.s);
}

json evaluation_json(const Evaluation& ev) {
  json j;
  for (const auto& col : kMetricColumns) {
    const auto& value = ev.*(col.field);
    j[col.key] = value ? json(*value) : json(nullptr);
  }
  return j;
}

template <typename V>
json group_map_json(const std::map<GroupKey, V>& m) {
  json j = json::object();
  for (const auto& [key, v] : m) j[group_key(key)] = v;
  return j;
}

json config_json(const TrainConfig& cfg) {
  return json{{"method", method_name(cfg.method)},
              {"encoder",
               {{"kind", encoder_name(cfg.encoder.kind)},
                {"layers", cfg.encoder.layers},
                {"hidden_dim", cfg.encoder.hidden_dim},
                {"embed_dim", cfg.encoder.embed_dim},
                {"dropout", cfg.encoder.dropout}}},
              {"epochs", cfg.epochs},
              {"warmup", cfg.warmup},
              {"eta", cfg.eta},
              {"beta_alpha", cfg.beta_alpha},
              {"degree_mode", cfg.degree_mode == DegreeMode::global ? "global" : "interpolated"},
              {"lr", cfg.adam.lr},
              {"weight_decay", cfg.adam.weight_decay},
              {"seed", cfg.seed},
              {"repeats", cfg.repeats},
              {"sample_std", cfg.sample_std}};
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  json j;
  j["dataset"] = report.dataset_name;
  j["config"] = config_json(report.config);
  json reps = json::array();
  for (const auto& rep : report.repeats) {
    json r;
    r["seed"] = rep.seed;
    r["best_epoch"] = rep.best_epoch;
    r["valid"] = evaluation_json(rep.valid);
    r["test"] = evaluation_json(rep.test);
    json epochs = json::array();
    for (const auto& e : rep.epochs) {
      json je{{"epoch", e.epoch}, {"loss", e.loss}, {"val_score", e.val_score}};
      if (!e.occurrences.empty()) je["occurrences"] = group_map_json(e.occurrences);
      if (!e.ledger.empty()) je["ledger"] = group_map_json(e.ledger);
      if (!e.weights.empty()) je["weights"] = group_map_json(e.weights);
      epochs.push_back(std::move(je));
    }
    r["epochs"] = std::move(epochs);
    reps.push_back(std::move(r));
  }
  j["repeats"] = std::move(reps);
  json agg;
  for (const auto& [key, a] : report.aggregate) {
    agg[key] = {{"mean", a.mean}, {"std", a.stddev}, {"count", a.count}};
  }
  j["aggregate"] = std::move(agg);
  return j.dump(2) + "\n";
}

void write_report_json(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << report_to_json(report);
}

namespace {

std::string percent_cell(const RunReport& report, const std::string& key) {
  auto it = report.aggregate.find(key);
  if (it == report.aggregate.end() || it->second.count == 0) return "n/a";
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << it->second.mean * 100.0 << "+-" << it->second.stddev * 100.0;
  return ss.str();
}

}  // namespace

std::string table_csv_header() {
  return "dataset,method,encoder,auc,f1,acc,delta_sp,delta_eo\n";
}

std::string table_csv_row(const RunReport& report) {
  std::ostringstream ss;
  ss << report.dataset_name << "," << method_name(report.config.method) << ","
     << encoder_name(report.config.encoder.kind) << "," << percent_cell(report, "auc") << ","
     << percent_cell(report, "f1") << "," << percent_cell(report, "accuracy") << ","
     << percent_cell(report, "delta_sp") << "," << percent_cell(report, "delta_eo") << "\n";
  return ss.str();
}

void write_table_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << table_csv_header() << table_csv_row(report);
}

void write_occurrences_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "seed,epoch,y,s,count\n";
  for (const auto& rep : report.repeats) {
    for (const auto& e : rep.epochs) {
      for (const auto& [key, c] : e.occurrences) {
        out << rep.seed << "," << e.epoch << "," << key.y << "," << key.s << "," << c << "\n";
      }
    }
  }
}

}  // namespace fairgb
