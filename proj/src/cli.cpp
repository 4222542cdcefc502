#include "fairgb/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairgb/data_io.hpp"
#include "fairgb/trainer.hpp"

namespace fairgb {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

SyntheticSpec read_synthetic_spec(const std::string& path, double* train_fraction,
                                  double* valid_fraction) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synthetic spec: " + path);
  json j = json::parse(in);
  SyntheticSpec spec;
  for (auto& [key, value] : j.items()) {
    if (key == "group_counts") {
      auto counts = value.get<std::vector<int>>();
      if (counts.size() != 4) {
        throw std::runtime_error(path + ": group_counts needs 4 entries ((y,s) blocks)");
      }
      std::copy(counts.begin(), counts.end(), spec.group_counts.begin());
    } else if (key == "intra_p") {
      spec.intra_p = value.get<double>();
    } else if (key == "inter_p") {
      spec.inter_p = value.get<double>();
    } else if (key == "feature_dim") {
      spec.feature_dim = value.get<int>();
    } else if (key == "class_signal") {
      spec.class_signal = value.get<double>();
    } else if (key == "sens_signal") {
      spec.sens_signal = value.get<double>();
    } else if (key == "seed") {
      spec.seed = value.get<uint64_t>();
    } else if (key == "train_fraction") {
      *train_fraction = value.get<double>();
    } else if (key == "valid_fraction") {
      *valid_fraction = value.get<double>();
    } else {
      throw std::runtime_error(path + ": unknown synthetic spec key '" + key + "'");
    }
  }
  return spec;
}

struct CliOptions {
  std::string dataset = "synthetic";
  std::string data_dir = "data";
  std::string spec_path;
  std::string method = "fairgb";
  std::string encoder = "gcn";
  std::string degree_mode = "global";
  std::string label_column = "label";
  std::string sensitive_column = "sensitive";
  std::string output = ".";
  double eta = 0.5;
  double beta_alpha = 1.0;
  int epochs = 1000;
  int warmup = 400;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  int hidden = 16;
  int embed = 16;
  int layers = 2;
  double dropout = 0.5;
  uint64_t seed = 0;
  int repeats = 10;
  bool eta_sweep = false;
  bool include_sensitive = true;
  bool occurrences = false;
  bool sample_std = false;
};

Graph build_graph(const CliOptions& opt) {
  if (opt.dataset == "synthetic") {
    double train_fraction = 0.5;
    double valid_fraction = 0.25;
    SyntheticSpec spec;
    spec.group_counts = {140, 110, 110, 140};
    spec.intra_p = 0.03;
    spec.inter_p = 0.005;
    spec.feature_dim = 8;
    spec.class_signal = 0.3;
    spec.sens_signal = 2.0;
    spec.seed = 7;
    if (!opt.spec_path.empty()) {
      spec = read_synthetic_spec(opt.spec_path, &train_fraction, &valid_fraction);
    }
    Graph g = generate_synthetic(spec);
    g.features = standardize_features(g.features);
    SplitPolicy policy;
    policy.train_fraction = train_fraction;
    policy.valid_fraction = valid_fraction;
    policy.seed = spec.seed;
    auto masks = split_nodes(g, policy);
    g.train_mask = std::move(masks.train);
    g.valid_mask = std::move(masks.valid);
    g.test_mask = std::move(masks.test);
    g.validate();
    return g;
  }

  const fs::path dir = fs::path(opt.data_dir) / opt.dataset;
  DatasetSpec spec;
  spec.name = opt.dataset;
  spec.nodes_file = (dir / "nodes.csv").string();
  spec.edges_file = (dir / "edges.csv").string();
  spec.label_column = opt.label_column;
  spec.sensitive_column = opt.sensitive_column;
  spec.include_sensitive_in_features = opt.include_sensitive;
  spec.split_seed = opt.seed;
  for (auto [member, file] : {std::pair{&DatasetSpec::train_idx, "train.idx"},
                              std::pair{&DatasetSpec::valid_idx, "valid.idx"},
                              std::pair{&DatasetSpec::test_idx, "test.idx"}}) {
    const fs::path p = dir / file;
    if (fs::exists(p)) spec.*member = p.string();
  }
  return load_dataset(spec);
}

TrainConfig build_config(const CliOptions& opt) {
  TrainConfig cfg;
  cfg.method = parse_method(opt.method);
  cfg.encoder.kind = parse_encoder(opt.encoder);
  cfg.encoder.layers = opt.layers;
  cfg.encoder.hidden_dim = opt.hidden;
  cfg.encoder.embed_dim = opt.embed;
  cfg.encoder.dropout = opt.dropout;
  cfg.epochs = opt.epochs;
  cfg.warmup = opt.warmup;
  cfg.eta = opt.eta;
  cfg.beta_alpha = opt.beta_alpha;
  if (opt.degree_mode == "global") {
    cfg.degree_mode = DegreeMode::global;
  } else if (opt.degree_mode == "interpolated") {
    cfg.degree_mode = DegreeMode::interpolated;
  } else {
    throw std::runtime_error("unknown degree mode: " + opt.degree_mode);
  }
  cfg.adam.lr = opt.lr;
  cfg.adam.weight_decay = opt.weight_decay;
  cfg.seed = opt.seed;
  cfg.repeats = opt.repeats;
  cfg.sample_std = opt.sample_std;
  return cfg;
}

std::string eta_tag(double eta) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(1);
  ss << eta;
  return ss.str();
}

}  // namespace

int cli_main(int argc, char** argv) {
  CliOptions opt;
  CLI::App app{"Fair graph training via group re-balancing"};
  app.set_config("--config");
  app.add_option("--dataset", opt.dataset,
                 "Dataset name: a directory under --data-dir, or 'synthetic'");
  app.add_option("--data-dir", opt.data_dir, "Directory holding dataset folders");
  app.add_option("--spec", opt.spec_path, "Synthetic spec JSON (used with --dataset synthetic)");
  app.add_option("--method", opt.method,
                 "vanilla | rw | os | fairgb | fairgb_wo_cal | fairgb_wo_cnm");
  app.add_option("--encoder", opt.encoder, "gcn | sage | gin");
  app.add_option("--eta", opt.eta, "Probability of an inter-class mix");
  app.add_option("--beta-alpha", opt.beta_alpha, "Beta(alpha, alpha) shape for lambda");
  app.add_option("--epochs", opt.epochs, "Total training epochs");
  app.add_option("--warmup", opt.warmup, "Plain-CE warm-up epochs");
  app.add_option("--lr", opt.lr, "Adam learning rate");
  app.add_option("--weight-decay", opt.weight_decay, "L2 weight decay");
  app.add_option("--hidden", opt.hidden, "Hidden width");
  app.add_option("--embed", opt.embed, "Embedding width");
  app.add_option("--layers", opt.layers, "Message-passing layers");
  app.add_option("--dropout", opt.dropout, "Dropout rate on layer inputs");
  app.add_option("--seed", opt.seed, "Base seed; repeats use seed..seed+repeats-1");
  app.add_option("--repeats", opt.repeats, "Independent runs to aggregate");
  app.add_option("--output", opt.output, "Output directory for report files");
  app.add_flag("--eta-sweep", opt.eta_sweep, "Run eta over 0.0,0.1,...,1.0");
  app.add_option("--include-sensitive-in-features", opt.include_sensitive,
                 "Keep the sensitive column in the feature matrix");
  app.add_option("--degree-mode", opt.degree_mode, "global | interpolated");
  app.add_option("--label-column", opt.label_column, "Label column in nodes.csv");
  app.add_option("--sensitive-column", opt.sensitive_column, "Sensitive column in nodes.csv");
  app.add_flag("--occurrences", opt.occurrences, "Also write occurrences.csv");
  app.add_flag("--sample-std", opt.sample_std, "Report sample std instead of population std");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const Graph graph = build_graph(opt);
    TrainConfig cfg = build_config(opt);
    fs::create_directories(opt.output);

    std::vector<RunReport> reports;
    if (opt.eta_sweep) {
      for (int k = 0; k <= 10; ++k) {
        cfg.eta = k / 10.0;
        RunReport report = run_experiment(graph, cfg, opt.dataset + "@eta=" + eta_tag(cfg.eta));
        write_report_json(report,
                          (fs::path(opt.output) / ("report-eta-" + eta_tag(cfg.eta) + ".json"))
                              .string());
        reports.push_back(std::move(report));
      }
    } else {
      RunReport report = run_experiment(graph, cfg, opt.dataset);
      write_report_json(report, (fs::path(opt.output) / "report.json").string());
      reports.push_back(std::move(report));
    }

    std::ofstream table((fs::path(opt.output) / "table.csv").string());
    if (!table) throw std::runtime_error("cannot write table.csv");
    table << table_csv_header();
    std::cout << table_csv_header();
    for (const auto& report : reports) {
      table << table_csv_row(report);
      std::cout << table_csv_row(report);
    }
    if (opt.occurrences) {
      for (size_t k = 0; k < reports.size(); ++k) {
        const std::string name =
            reports.size() == 1 ? "occurrences.csv"
                                : "occurrences-eta-" + eta_tag(k / 10.0) + ".csv";
        write_occurrences_csv(reports[k], (fs::path(opt.output) / name).string());
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fairgb
