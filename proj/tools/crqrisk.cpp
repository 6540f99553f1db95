// Copyright 2026 The crqrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// crqrisk: command-line driver for generation, training, scoring, drift
// checks, review administration, metrics, the HTTP service and the
// closed-loop simulation.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crqrisk/corpus.hpp"
#include "crqrisk/drift.hpp"
#include "crqrisk/http_api.hpp"
#include "crqrisk/pipeline.hpp"
#include "crqrisk/service.hpp"
#include "crqrisk/simulate.hpp"

namespace {

using namespace crqrisk;

constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

ModelBundle load_bundle(const std::string& path) { return Json::parse(read_file(path)).get<ModelBundle>(); }

DriftInjection parse_drift_flag(const std::string& text) {
  // feature:kind:magnitude:onset
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (parts.size() != 4) throw CLI::ValidationError("--drift", "expected feature:kind:magnitude:onset");
  DriftInjection d;
  d.feature_name = parts[0];
  d.kind = parse_drift_kind(parts[1]);
  d.magnitude = std::stod(parts[2]);
  d.onset_index = std::stoul(parts[3]);
  return d;
}

Timestamp latest_time(const std::vector<ChangeRequest>& records) {
  Timestamp t = 0;
  for (const auto& r : records) t = std::max(t, r.submitted_at);
  return t;
}

struct ServiceFlags {
  std::string config_path;
  std::string data_dir;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "key=value service config file")->check(CLI::ExistingFile);
    app->add_option("--data-dir", data_dir, "service data directory (overrides config and $CRQRISK_DATA_DIR)");
  }

  ServiceConfig resolve() const {
    ServiceConfig cfg;
    if (!config_path.empty()) cfg = load_service_config(config_path);
    cfg = apply_env_overrides(cfg);
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    return cfg;
  }
};

volatile std::sig_atomic_t g_stop = 0;
httplib::Server* g_server = nullptr;

void handle_signal(int) {
  g_stop = 1;
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crqrisk: change-request risk assessment"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable JSON on stdout");

  // generate ---------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic labeled corpus");
  GeneratorConfig gen;
  gen.n_records = 10000;
  std::string gen_out, gen_labels, gen_mechanism = "interaction";
  std::vector<std::string> gen_drifts;
  gen_cmd->add_option("--n", gen.n_records, "number of records")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--prevalence", gen.risky_prevalence, "risky fraction")->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--teams", gen.n_teams, "number of teams")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--mechanism", gen_mechanism, "risk mechanism")
      ->check(CLI::IsMember({"linear", "interaction"}));
  gen_cmd->add_option("--start", gen.start_time, "first submission time (unix seconds)");
  gen_cmd->add_option("--interval", gen.interval_seconds, "seconds between submissions")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--first-index", gen.first_index, "index of the first record");
  gen_cmd->add_option("--drift", gen_drifts, "planted drift feature:kind:magnitude:onset");
  gen_cmd->add_option("--out", gen_out, "corpus JSONL path")->required();
  gen_cmd->add_option("--labels", gen_labels, "labels CSV path (default: <out>.labels.csv)");

  // train ------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a model bundle from a labeled corpus");
  std::string train_corpus, train_labels, train_out, train_config;
  std::string train_oversample = "smote";
  PipelineConfig pcfg;
  train_cmd->add_option("--corpus", train_corpus, "corpus JSONL")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--labels", train_labels, "labels CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "model bundle JSON path")->required();
  train_cmd->add_option("--config", train_config, "key=value config file")->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", pcfg.gbdt.seed, "random seed");
  train_cmd->add_option("--n-trees", pcfg.gbdt.n_trees, "boosting rounds");
  train_cmd->add_option("--max-depth", pcfg.gbdt.max_depth, "tree depth");
  train_cmd->add_option("--learning-rate", pcfg.gbdt.learning_rate, "shrinkage");
  train_cmd->add_option("--oversample", train_oversample, "minority oversampling")
      ->check(CLI::IsMember({"none", "smote", "adasyn"}));
  train_cmd->add_option("--target-ratio", pcfg.target_ratio, "minority:majority ratio after oversampling");
  train_cmd->add_option("--validation-fraction", pcfg.validation_fraction, "newest fraction held out")
      ->check(CLI::Range(0.0, 0.9));

  // score ------------------------------------------------------------------
  auto* score_cmd = app.add_subcommand("score", "score change requests with a model bundle");
  std::string score_model, score_input, score_out, score_version = "local";
  score_cmd->add_option("--model", score_model, "model bundle JSON")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--input", score_input, "change requests JSONL")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--out", score_out, "scores JSONL path (default: stdout)");
  score_cmd->add_option("--version-label", score_version, "model_version stamped on scores");

  // drift-check ------------------------------------------------------------
  auto* drift_cmd = app.add_subcommand("drift-check", "importance-weighted KS drift between two windows");
  std::string drift_ref, drift_cur, drift_model;
  double drift_threshold = kDefaultDriftThreshold;
  bool drift_predictions = false;
  drift_cmd->add_option("--ref", drift_ref, "reference window JSONL")->required()->check(CLI::ExistingFile);
  drift_cmd->add_option("--cur", drift_cur, "current window JSONL")->required()->check(CLI::ExistingFile);
  drift_cmd->add_option("--model", drift_model, "model bundle JSON")->required()->check(CLI::ExistingFile);
  drift_cmd->add_option("--threshold", drift_threshold, "alarm threshold on d_final")
      ->check(CLI::Range(0.0, 1.0));
  drift_cmd->add_flag("--with-predictions", drift_predictions, "also monitor the predicted probability");

  // reviews ----------------------------------------------------------------
  auto* reviews_cmd = app.add_subcommand("reviews", "review queue administration");
  reviews_cmd->require_subcommand(1);
  auto* list_cmd = reviews_cmd->add_subcommand("list", "list review items");
  ServiceFlags list_flags;
  list_flags.add(list_cmd);
  std::string list_status = "pending";
  list_cmd->add_option("--status", list_status, "item status")->check(CLI::IsMember({"pending", "reviewed", "expired"}));
  auto* verdict_cmd = reviews_cmd->add_subcommand("verdict", "record an expert verdict");
  ServiceFlags verdict_flags;
  verdict_flags.add(verdict_cmd);
  std::string verdict_id, verdict_label, verdict_reviewer = "cli";
  verdict_cmd->add_option("--change-id", verdict_id, "change request id")->required();
  verdict_cmd->add_option("--label", verdict_label, "expert label")->required()->check(CLI::IsMember({"risky", "normal"}));
  verdict_cmd->add_option("--reviewer", verdict_reviewer, "reviewer id");

  // metrics ----------------------------------------------------------------
  auto* metrics_cmd = app.add_subcommand("metrics", "export service metrics");
  ServiceFlags metrics_flags;
  metrics_flags.add(metrics_cmd);

  // serve ------------------------------------------------------------------
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  ServiceFlags serve_flags;
  serve_flags.add(serve_cmd);
  std::string serve_host, serve_model, serve_history, serve_history_labels, serve_token;
  int serve_port = 0;
  int serve_maintenance_s = 60;
  serve_cmd->add_option("--host", serve_host, "bind address");
  serve_cmd->add_option("--port", serve_port, "port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--token", serve_token, "static bearer token");
  serve_cmd->add_option("--model", serve_model, "bundle to stage and activate when none is active")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--history", serve_history, "labeled history corpus to ingest at start")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--history-labels", serve_history_labels, "labels CSV for --history")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--maintenance-seconds", serve_maintenance_s, "maintenance period")
      ->check(CLI::PositiveNumber);

  // simulate ---------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "closed-loop monthly simulation");
  SimulationConfig sim = default_simulation_config();
  std::string sim_out;
  std::string sim_config;
  sim_cmd->add_option("--config", sim_config, "key=value service settings layered over the simulation defaults")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--months", sim.months, "simulated months")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--drift-at-month", sim.drift_at_month, "drift starts after this month (0: none)");
  sim_cmd->add_option("--bootstrap-months", sim.bootstrap_months, "labeled months before month 1")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--records-per-month", sim.records_per_month, "changes per month")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--batches-per-month", sim.batches_per_month, "scoring batches per month")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--prevalence", sim.prevalence, "risky fraction")->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--review-m", sim.service.review_m, "review items per batch");
  sim_cmd->add_option("--data-dir", sim.data_dir, "keep service state here (default: temporary)");
  sim_cmd->add_option("--out", sim_out, "monthly metrics CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return e.get_exit_code() == 0 ? rc : kExitUsageError;
  }

  try {
    if (gen_cmd->parsed()) {
      gen.risk_mechanism = parse_risk_mechanism(gen_mechanism);
      std::vector<DriftInjection> drifts;
      for (const auto& d : gen_drifts) drifts.push_back(parse_drift_flag(d));
      const auto corpus = generate(gen, drifts);
      if (gen_labels.empty()) gen_labels = gen_out + ".labels.csv";
      write_corpus(gen_out, corpus.records);
      write_labels(gen_labels, corpus.records, corpus.labels);
      const auto n_risky = static_cast<std::size_t>(std::count(corpus.labels.begin(), corpus.labels.end(), Label::kRisky));
      if (as_json) {
        print_json({{"corpus", gen_out}, {"labels", gen_labels}, {"n_records", corpus.records.size()},
                    {"n_risky", n_risky}, {"seed", gen.seed}});
      } else {
        std::cout << "wrote " << corpus.records.size() << " records (" << n_risky << " risky) to " << gen_out
                  << " and " << gen_labels << '\n';
      }
    } else if (train_cmd->parsed()) {
      PipelineConfig cfg = pcfg;
      if (!train_config.empty()) {
        ServiceConfig sc;
        sc.pipeline = pcfg;
        cfg = load_service_config(train_config, sc).pipeline;
        // explicit flags win over the file
        for (const auto* opt : train_cmd->get_options()) {
          if (opt->count() == 0) continue;
          const auto name = opt->get_name();
          if (name == "--seed") cfg.gbdt.seed = pcfg.gbdt.seed;
          if (name == "--n-trees") cfg.gbdt.n_trees = pcfg.gbdt.n_trees;
          if (name == "--max-depth") cfg.gbdt.max_depth = pcfg.gbdt.max_depth;
          if (name == "--learning-rate") cfg.gbdt.learning_rate = pcfg.gbdt.learning_rate;
          if (name == "--target-ratio") cfg.target_ratio = pcfg.target_ratio;
          if (name == "--validation-fraction") cfg.validation_fraction = pcfg.validation_fraction;
        }
      }
      if (train_cmd->get_option("--oversample")->count() || train_config.empty()) {
        cfg.oversample = parse_oversample_mode(train_oversample);
      }
      validate_train_config(cfg.gbdt);
      const auto records = load_corpus(train_corpus);
      const auto labels = load_labels(train_labels, records);
      const auto result = train_pipeline(records, labels, {}, latest_time(records), cfg);
      write_file_atomic(train_out, Json(result.bundle).dump());
      Json summary{{"model", train_out},
                   {"schema_version", result.bundle.model.schema_version},
                   {"n_train", result.n_train},
                   {"n_synthetic", result.n_synthetic},
                   {"operating_threshold", result.bundle.operating_threshold},
                   {"validation", result.validation ? metrics_json(*result.validation) : Json(nullptr)},
                   {"top_features", Json::array()},
                   {"warnings", result.warnings}};
      const auto& model = result.bundle.model;
      for (const auto f : model.top_features(10)) {
        summary["top_features"].push_back(
            Json{{"feature", model.feature_names.at(f)}, {"importance", model.feature_importances[f]}});
      }
      if (as_json) {
        print_json(summary);
      } else {
        std::cout << "trained " << result.bundle.model.trees.size() << " trees on " << result.n_train << " rows (+"
                  << result.n_synthetic << " synthetic); threshold " << result.bundle.operating_threshold << '\n';
        if (result.validation) {
          std::cout << "validation TPR " << result.validation->tpr << " FPR " << result.validation->fpr << " PLR "
                    << result.validation->plr << '\n';
        }
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      }
    } else if (score_cmd->parsed()) {
      const auto bundle = load_bundle(score_model);
      const auto records = load_corpus(score_input);
      std::ofstream file;
      if (!score_out.empty()) {
        file.open(score_out, std::ios::trunc);
        if (!file) throw Error(ErrorCode::kIoError, "cannot open '" + score_out + "'");
      }
      std::ostream& os = score_out.empty() ? std::cout : file;
      std::size_t flagged = 0;
      for (const auto& r : records) {
        const auto s = bundle.score(validate_change(r), score_version);
        flagged += s.flagged;
        os << Json(s).dump() << '\n';
      }
      if (!score_out.empty() && as_json) print_json({{"scores", score_out}, {"n", records.size()}, {"flagged", flagged}});
    } else if (drift_cmd->parsed()) {
      const auto bundle = load_bundle(drift_model);
      const auto ref = load_corpus(drift_ref);
      const auto cur = load_corpus(drift_cur);
      std::vector<FeatureVector> ref_x, cur_x;
      std::optional<PredictionSamples> preds;
      if (drift_predictions) preds.emplace();
      for (const auto& r : ref) {
        ref_x.push_back(bundle.encode(r));
        if (preds) preds->ref.push_back(bundle.model.predict_proba(ref_x.back()));
      }
      for (const auto& r : cur) {
        cur_x.push_back(bundle.encode(r));
        if (preds) preds->cur.push_back(bundle.model.predict_proba(cur_x.back()));
      }
      const auto report = weighted_drift(*bundle.schema, ref_x, cur_x, bundle.model.feature_importances,
                                         drift_threshold, preds, wall_clock_now());
      if (as_json) {
        print_json(Json(report));
      } else {
        std::cout << "d_final " << report.d_final << " threshold " << report.threshold
                  << (report.alarm ? " ALARM" : " ok") << '\n';
      }
    } else if (list_cmd->parsed()) {
      RiskService service(list_flags.resolve());
      const auto items = service.reviews(parse_review_status(list_status));
      if (as_json) {
        print_json(Json{{"status", list_status}, {"items", items}});
      } else {
        for (const auto& it : items) {
          std::cout << it.change_id << "  p=" << it.risk_score.probability
                    << "  knowledge=" << it.risk_score.uncertainty.knowledge << "  " << to_string(it.status) << '\n';
        }
      }
    } else if (verdict_cmd->parsed()) {
      RiskService service(verdict_flags.resolve());
      const auto v = service.record_verdict(verdict_id, parse_label(verdict_label), verdict_reviewer, wall_clock_now());
      if (as_json) {
        print_json(Json(v));
      } else {
        std::cout << "recorded " << to_string(v.expert_label) << " for " << v.change_id
                  << (v.agrees_with_model ? " (agrees with model)" : " (disagrees with model)") << '\n';
      }
    } else if (metrics_cmd->parsed()) {
      RiskService service(metrics_flags.resolve());
      print_json(service.metrics());
    } else if (serve_cmd->parsed()) {
      auto cfg = serve_flags.resolve();
      if (!serve_host.empty()) cfg.host = serve_host;
      if (serve_port != 0) cfg.port = serve_port;
      if (!serve_token.empty()) cfg.api_token = serve_token;
      RiskService service(cfg);
      if (!serve_history.empty()) {
        if (serve_history_labels.empty()) throw CLI::ValidationError("--history-labels", "required with --history");
        const auto records = load_corpus(serve_history);
        service.add_history(records, load_labels(serve_history_labels, records));
      }
      if (!service.active() && !serve_model.empty()) {
        const auto entry = service.registry().stage(load_bundle(serve_model), "manual", wall_clock_now());
        service.activate(entry.version);
      }
      httplib::Server server;
      register_routes(server, service);
      MaintenanceLoop maintenance(service, std::chrono::seconds(serve_maintenance_s));
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "crqrisk listening on " << cfg.host << ':' << cfg.port << " (data dir " << cfg.data_dir << ")\n";
      if (!server.listen(cfg.host, cfg.port)) {
        if (!g_stop) throw Error(ErrorCode::kIoError, "cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
      }
      g_server = nullptr;
    } else if (sim_cmd->parsed()) {
      if (!sim_config.empty()) {
        const auto review_m = sim_cmd->count("--review-m") ? std::optional(sim.service.review_m) : std::nullopt;
        sim.service = load_service_config(sim_config, sim.service);
        if (review_m) sim.service.review_m = *review_m;
      }
      const auto result = simulate(sim);
      const auto csv = month_series_csv(result.months);
      if (!sim_out.empty()) {
        write_file_atomic(sim_out, csv);
      }
      if (as_json) {
        print_json(Json{{"months", result.months}, {"retrains", result.retrains}});
      } else if (sim_out.empty()) {
        std::cout << csv;
      }
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return 0;
}
