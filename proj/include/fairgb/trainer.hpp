#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairgb/cal.hpp"
#include "fairgb/cnm.hpp"
#include "fairgb/encoders.hpp"
#include "fairgb/graph.hpp"
#include "fairgb/metrics.hpp"
#include "fairgb/nn.hpp"

namespace fairgb {

enum class Method { vanilla, rw, os, fairgb, fairgb_wo_cal, fairgb_wo_cnm };

std::string method_name(Method m);
Method parse_method(const std::string& name);

std::string encoder_name(EncoderKind k);
EncoderKind parse_encoder(const std::string& name);

struct TrainConfig {
  Method method = Method::fairgb;
  EncoderConfig encoder;
  int epochs = 1000;  // T
  int warmup = 400;   // T_warm; plain CE for every method while t <= warmup
  double eta = 0.5;
  double beta_alpha = 1.0;
  DegreeMode degree_mode = DegreeMode::global;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8, 1e-5};
  uint64_t seed = 0;
  int repeats = 10;
  bool sample_std = false;

  // Throws a config error when the method's preconditions cannot be met on
  // this graph (e.g. mixup with a single sensitive group in the train set).
  void validate(const Graph& graph) const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double val_score = 0.0;
  // Populated for mixup-family epochs after warm-up.
  std::map<GroupKey, long> occurrences;
  std::map<GroupKey, double> ledger;
  std::map<GroupKey, double> weights;
};

struct RepeatResult {
  uint64_t seed = 0;
  int best_epoch = 0;
  Evaluation valid;  // at the selected checkpoint
  Evaluation test;   // at the selected checkpoint
  std::vector<EpochRecord> epochs;
};

struct TrainOutcome {
  ModelState best_state;
  RepeatResult record;
};

// One full training run (Algorithm: warm-up CE epochs, then the method's
// post-warm-up loss), selecting the checkpoint with the best validation
// (AUC + F1) / 2; earliest epoch wins ties.
TrainOutcome train(const Graph& graph, const TrainConfig& cfg, uint64_t run_seed);

struct MetricAggregate {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;  // repeats where the metric was defined
};

struct RunReport {
  std::string dataset_name;
  TrainConfig config;
  std::vector<RepeatResult> repeats;
  // Keys: accuracy, f1, auc, delta_sp, delta_eo, delta_eodds.
  std::map<std::string, MetricAggregate> aggregate;
};

// Runs repeats with seeds seed..seed+repeats-1 (parallel up to
// FAIRGB_THREADS) and aggregates test metrics.
RunReport run_experiment(const Graph& graph, const TrainConfig& cfg,
                         const std::string& dataset_name);

std::string report_to_json(const RunReport& report);
void write_report_json(const RunReport& report, const std::string& path);

// Table-style row: percentages, two decimals, "mean +- std".
std::string table_csv_header();
std::string table_csv_row(const RunReport& report);
void write_table_csv(const RunReport& report, const std::string& path);

// Per-epoch per-group occurrence counts across repeats.
void write_occurrences_csv(const RunReport& report, const std::string& path);

}  // namespace fairgb
