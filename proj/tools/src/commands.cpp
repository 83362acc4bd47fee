// Copyright 2026 The nullspace-unlearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unsc_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "unsc/errors.hpp"
#include "unsc/rng.hpp"
#include "unsc_cli/pipeline.hpp"

namespace unsc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

json stamp(const RunConfig& cfg, const std::string& kind, const std::string& data_hash) {
  return json{{"format_version", kFormatVersion},
              {"kind", kind},
              {"config_hash", cfg.hash},
              {"seed", cfg.seed},
              {"data_hash", data_hash}};
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(1) + "\n"); }

json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw ArtifactError("missing artifact: " + path.string());
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + ": not valid JSON");
  return j;
}

// Non-finite values (an infinite MIA threshold) are stored as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

// Reloads the dataset written by gen-data and checks it against its sidecar.
Views load_views(const RunConfig& cfg) {
  const json meta = read_json(cfg.path(kDatasetMeta));
  const fs::path csv = cfg.path(kDatasetCsv);
  if (!fs::exists(csv)) throw ArtifactError("missing artifact: " + csv.string());
  Dataset ds = load_csv(csv, meta.at("num_classes").get<std::size_t>());
  ds.provenance = meta.at("provenance").dump();
  Views v = make_views(std::move(ds), cfg);
  if (v.data_hash != meta.at("data_hash").get<std::string>())
    throw ValidationError("dataset.csv does not match the hash recorded in dataset.json");
  return v;
}

std::string checkpoint_meta(const RunConfig& cfg, const std::string& role, const Views& v) {
  json m = stamp(cfg, "unsc.checkpoint-metadata", v.data_hash);
  m["role"] = role;
  return m.dump();
}

void save_model(const RunConfig& cfg, const fs::path& path, const Network& net,
                const std::string& role, const Views& v) {
  save_checkpoint(net, path, cfg.seed, checkpoint_meta(cfg, role, v));
}

Network load_model(const fs::path& path) {
  if (!fs::exists(path)) throw ArtifactError("missing artifact: " + path.string());
  return load_checkpoint(path);
}

std::string file_hash(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

fs::path subspace_path(const RunConfig& cfg, std::size_t c) {
  return cfg.path("subspaces/class_" + std::to_string(c) + ".json");
}

std::vector<ClassSubspace> load_subspaces(const RunConfig& cfg, const Views& v) {
  const std::string ckpt = file_hash(cfg.path(kOriginalCkpt));
  std::vector<ClassSubspace> out;
  for (std::size_t c = 0; c < v.all.num_classes; ++c) {
    const fs::path p = subspace_path(cfg, c);
    if (!fs::exists(p)) throw ArtifactError("missing artifact: " + p.string());
    std::string source;
    out.push_back(subspace_from_json(read_file(p), &source));
    if (source != ckpt)
      throw ValidationError(p.string() + " was built from a different original checkpoint");
  }
  return out;
}

json utility_json(const UtilityReport& u) {
  json per_class = json::array();
  for (std::size_t c = 0; c < u.per_class_accuracy.size(); ++c)
    per_class.push_back({{"class", c},
                         {"count", u.per_class_count[c]},
                         {"accuracy", u.per_class_accuracy[c] ? json(*u.per_class_accuracy[c])
                                                              : json(nullptr)}});
  return {{"acc_remaining_test", u.acc_remaining_test},
          {"acc_unlearn_test", u.acc_unlearn_test ? json(*u.acc_unlearn_test) : json(nullptr)},
          {"loss_remaining", u.loss_remaining},
          {"per_class", per_class}};
}

json summary_json(const ConfidenceSummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}};
}

json mia_json(const MiaReport& m) {
  return {{"threshold", number(m.threshold)},
          {"acc_mia", m.acc_mia},
          {"holdout_balanced_accuracy", m.holdout_balanced_accuracy},
          {"members", summary_json(m.members)},
          {"nonmembers", summary_json(m.nonmembers)},
          {"unlearn", summary_json(m.unlearn)},
          {"holdouts", m.holdout_description}};
}

void announce(std::ostream& out, const fs::path& p) { out << "wrote " << p.string() << "\n"; }

}  // namespace

void cmd_gen_data(const RunConfig& cfg, std::ostream& out) {
  const Views v = make_views(load_source(cfg), cfg);
  save_csv(v.all, cfg.path(kDatasetCsv));
  json meta = stamp(cfg, "unsc.dataset", v.data_hash);
  meta["num_classes"] = v.all.num_classes;
  meta["size"] = v.all.size();
  meta["dim"] = v.all.dim();
  meta["provenance"] = v.all.provenance.empty() ? json::object() : json::parse(v.all.provenance);
  meta["split"] = {{"train", v.split.train.size()},
                   {"val", v.split.val.size()},
                   {"test", v.split.test.size()},
                   {"d_u", v.split.d_u.size()},
                   {"d_r", v.split.d_r.size()},
                   {"test_unlearn", v.split.test_unlearn.size()},
                   {"test_remaining", v.split.test_remaining.size()}};
  write_json(cfg.path(kDatasetMeta), meta);
  announce(out, cfg.path(kDatasetCsv));
  announce(out, cfg.path(kDatasetMeta));
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const Views v = load_views(cfg);
  TrainLog log;
  const Network net = train_original(cfg, v, &log);
  save_model(cfg, cfg.path(kOriginalCkpt), net, "original", v);
  out << "best epoch " << log.best_epoch << ", train accuracy " << accuracy(net, v.train) << "\n";
  announce(out, cfg.path(kOriginalCkpt));
}

void cmd_retrain(const RunConfig& cfg, std::ostream& out) {
  const Views v = load_views(cfg);
  const Network net = train_retrain(cfg, v);
  save_model(cfg, cfg.path(kRetrainCkpt), net, "retrain", v);
  announce(out, cfg.path(kRetrainCkpt));
}

void cmd_subspace(const RunConfig& cfg, std::ostream& out) {
  const Views v = load_views(cfg);
  const Network net = load_model(cfg.path(kOriginalCkpt));
  const std::string ckpt = file_hash(cfg.path(kOriginalCkpt));
  for (const auto& s : build_subspaces(cfg, net, v)) {
    json j = json::parse(subspace_to_json(s, ckpt));
    j["config_hash"] = cfg.hash;
    j["seed"] = cfg.seed;
    j["data_hash"] = v.data_hash;
    const fs::path p = subspace_path(cfg, static_cast<std::size_t>(s.class_id));
    write_json(p, j);
    announce(out, p);
  }
}

void cmd_unlearn(const RunConfig& cfg, std::ostream& out) {
  const Views v = load_views(cfg);
  const Network net_o = load_model(cfg.path(kOriginalCkpt));
  std::optional<ProjectorCache> cache;
  if (cfg.unlearn.use_null_space) cache.emplace(load_subspaces(cfg, v), cfg.epsilons);
  UnlearnLog log;
  const Network net_u =
      run_method(cfg, Method::kConfigured, net_o, v, cache ? &*cache : nullptr, &log);
  save_model(cfg, cfg.path(kUnlearnedCkpt), net_u, "unlearned", v);

  json m = stamp(cfg, "unsc.unlearn-manifest", v.data_hash);
  m["plan"] = {{"unlearn_classes", cfg.unlearn.unlearn_classes},
               {"labeling", labeling_name(cfg.unlearn.labeling)},
               {"null_space", cfg.unlearn.use_null_space},
               {"ascend", cfg.unlearn.ascend},
               {"lr", cfg.unlearn.schedule.lr},
               {"epochs", cfg.unlearn.schedule.epochs},
               {"batch_size", cfg.unlearn.schedule.batch_size},
               {"epsilons", cfg.epsilons}};
  if (cache) {
    json ranks = json::object();
    for (int c : cfg.unlearn.unlearn_classes) ranks[std::to_string(c)] = cache->get(c).ranks;
    m["retained_ranks"] = ranks;
  }
  json labels = json::array();
  for (const auto& l : log.labels)
    labels.push_back({{"index", l.index}, {"original", l.original}, {"assigned", l.assigned}});
  m["labels"] = labels;
  m["epoch_loss"] = log.epoch_loss;
  m["unlearn_train_accuracy"] = log.unlearn_train_accuracy;
  write_json(cfg.path(kUnlearnManifest), m);
  announce(out, cfg.path(kUnlearnedCkpt));
  announce(out, cfg.path(kUnlearnManifest));
}

void cmd_evaluate(const RunConfig& cfg, const std::string& model, std::ostream& out) {
  fs::path ckpt;
  if (model == "original") {
    ckpt = cfg.path(kOriginalCkpt);
  } else if (model == "retrain") {
    ckpt = cfg.path(kRetrainCkpt);
  } else if (model == "unlearned") {
    ckpt = cfg.path(kUnlearnedCkpt);
  } else {
    throw ValidationError("evaluate: unknown model '" + model +
                          "' (expected original, retrain or unlearned)");
  }
  const Views v = load_views(cfg);
  const Network net = load_model(ckpt);
  json r = stamp(cfg, "unsc.evaluation", v.data_hash);
  r["model"] = model;
  r["checkpoint_hash"] = file_hash(ckpt);
  r["utility"] = utility_json(utility(net, v.test_remaining, v.test_unlearn));
  r["mia"] = mia_json(run_mia(cfg, net, v));

  if (model == "unlearned") {
    const Network net_o = load_model(cfg.path(kOriginalCkpt));
    const Dataset build = remaining_build_set(cfg, v);
    const ActivationTrace trace = *forward(net_o, build.columns(), true).trace;
    const AuditReport a = orthogonality_audit(net_o, net, trace, &build);
    r["audit"] = {{"layer_residual", a.layer_residual},
                  {"max_residual", a.max_residual},
                  {"loss_original", *a.loss_original},
                  {"loss_unlearned", *a.loss_unlearned},
                  {"loss_change", *a.loss_change},
                  {"samples", build.size()}};
    const json manifest = read_json(cfg.path(kUnlearnManifest));
    if (fs::exists(cfg.path(kRetrainCkpt)) && manifest.at("plan").at("labeling") == "pseudo") {
      std::vector<PseudoLabeledSample> labels;
      for (const auto& l : manifest.at("labels"))
        labels.push_back({l.at("index").get<std::size_t>(), l.at("original").get<int>(),
                          l.at("assigned").get<int>()});
      const AgreementReport ag =
          pseudo_label_agreement(labels, v.d_u, load_model(cfg.path(kRetrainCkpt)));
      r["pseudo_label_agreement"] = {{"agreement", ag.agreement},
                                     {"pseudo_histogram", ag.pseudo_histogram},
                                     {"retrained_histogram", ag.retrained_histogram}};
    }
  }
  const fs::path p = cfg.path("reports/eval_" + model + ".json");
  write_json(p, r);
  out << model << ": acc_remaining_test " << r["utility"]["acc_remaining_test"]
      << ", acc_unlearn_test " << r["utility"]["acc_unlearn_test"] << ", acc_mia "
      << r["mia"]["acc_mia"] << "\n";
  announce(out, p);
}

void cmd_contour(const RunConfig& cfg, std::ostream& out) {
  const Views v = load_views(cfg);
  const Network net = load_model(cfg.path(kOriginalCkpt));
  const std::vector<double> eps(net.num_layers(), cfg.contour_epsilon);
  const ProjectorCache cache(load_subspaces(cfg, v), eps);
  const int target = cfg.split.unlearn_classes.front();
  const ContourDirections dirs =
      make_contour_directions(net, cache.get(target), derive_seed(cfg.seed, "contour"));
  std::vector<double> axis(cfg.contour_steps);
  for (std::size_t i = 0; i < axis.size(); ++i)
    axis[i] = -cfg.contour_radius +
              2.0 * cfg.contour_radius * static_cast<double>(i) /
                  static_cast<double>(axis.size() - 1);
  const ContourGrid g = loss_contour(net, dirs.null_dir, dirs.off_dir, axis, axis, v.test_remaining);

  const std::size_t mid = axis.size() / 2;
  double null_var = 0.0, off_var = 0.0;
  const double center = g.loss(mid, mid);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    null_var = std::max(null_var, std::abs(g.loss(i, mid) - center));
    off_var = std::max(off_var, std::abs(g.loss(mid, i) - center));
  }
  write_file(cfg.path("reports/contour.csv"), contour_to_csv(g));
  json j = stamp(cfg, "unsc.contour", v.data_hash);
  j["epsilon"] = cfg.contour_epsilon;
  j["excluded_class"] = target;
  j["alphas"] = g.alphas;
  j["betas"] = g.betas;
  json rows = json::array();
  for (std::size_t i = 0; i < g.loss.rows(); ++i) {
    const auto r = g.loss.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["loss"] = rows;
  j["center_loss"] = center;
  j["null_axis_variation"] = null_var;
  j["off_axis_variation"] = off_var;
  write_json(cfg.path("reports/contour.json"), j);
  out << "null-axis variation " << null_var << ", off-axis variation " << off_var << "\n";
  announce(out, cfg.path("reports/contour.csv"));
  announce(out, cfg.path("reports/contour.json"));
}

void cmd_ablate(const RunConfig& cfg, std::ostream& out) {
  const Views v = load_views(cfg);
  const Network net_o = load_model(cfg.path(kOriginalCkpt));
  const Network net_r = load_model(cfg.path(kRetrainCkpt));
  const ProjectorCache cache(load_subspaces(cfg, v), cfg.epsilons);
  const auto rows = ablate(cfg, v, net_o, net_r, cache);

  std::string csv = "method,acc_remaining_test,acc_unlearn_test,acc_mia\n";
  json table = json::array();
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r.acc_remaining_test, r.acc_unlearn_test,
                  r.acc_mia);
    csv += r.name + "," + buf + "\n";
    table.push_back({{"method", r.name},
                     {"acc_remaining_test", r.acc_remaining_test},
                     {"acc_unlearn_test", r.acc_unlearn_test},
                     {"acc_mia", r.acc_mia}});
    out << r.name << ": Acc_rt " << r.acc_remaining_test << ", Acc_ut " << r.acc_unlearn_test
        << "\n";
  }
  write_file(cfg.path("reports/ablation.csv"), csv);
  json j = stamp(cfg, "unsc.ablation", v.data_hash);
  j["rows"] = table;
  write_json(cfg.path("reports/ablation.json"), j);
  announce(out, cfg.path("reports/ablation.csv"));
  announce(out, cfg.path("reports/ablation.json"));
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.path("reports");
  if (!fs::is_directory(dir)) throw ArtifactError("missing artifact: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.path().extension() == ".json" && name != "summary.json") files.push_back(e.path());
  }
  if (files.empty()) throw ArtifactError("no reports in " + dir.string());
  std::sort(files.begin(), files.end());

  json summary = stamp(cfg, "unsc.summary", "");
  json parts = json::object();
  std::string data_hash;
  for (const auto& f : files) {
    const json j = read_json(f);
    const std::string h = j.value("data_hash", "");
    if (data_hash.empty()) data_hash = h;
    if (h != data_hash)
      throw ValidationError("report: " + f.filename().string() + " has data hash " + h +
                            ", expected " + data_hash);
    parts[f.stem().string()] = j;
  }
  summary["data_hash"] = data_hash;
  summary["reports"] = parts;
  write_json(dir / "summary.json", summary);
  announce(out, dir / "summary.json");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto fail = [&](int code, const std::string& kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
    return code;
  };

  CLI::App app{"Class unlearning with null-space calibration", "unsc"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string model = "unlearned";
  const std::pair<const char*, const char*> commands[] = {
      {"gen-data", "generate or import the dataset and its split"},
      {"train", "train the original model"},
      {"retrain", "train the reference model on the remaining classes only"},
      {"subspace", "record per-class layer input subspaces of the original model"},
      {"unlearn", "run the configured unlearning method"},
      {"evaluate", "utility, membership inference and audit for one model"},
      {"contour", "loss surface along null-space and retained directions"},
      {"ablate", "compare Original, Retrain, RL, RL+NullSpace and UNSC"},
      {"report", "join every report into summary.json"},
  };
  for (const auto& [n, help] : commands) {
    CLI::App* sub = app.add_subcommand(n, help);
    sub->add_option("-c,--config", config_path, "run config (JSON)")->required();
    sub->add_option("--set", overrides, "override a config value, dotted.key=value");
    if (std::string(n) == "evaluate")
      sub->add_option("--model", model, "original | retrain | unlearned");
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(kInvalid, "usage", e.what());
  }

  try {
    const RunConfig cfg = load_config(config_path, overrides);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "gen-data") cmd_gen_data(cfg, out);
    else if (cmd == "train") cmd_train(cfg, out);
    else if (cmd == "retrain") cmd_retrain(cfg, out);
    else if (cmd == "subspace") cmd_subspace(cfg, out);
    else if (cmd == "unlearn") cmd_unlearn(cfg, out);
    else if (cmd == "evaluate") cmd_evaluate(cfg, model, out);
    else if (cmd == "contour") cmd_contour(cfg, out);
    else if (cmd == "ablate") cmd_ablate(cfg, out);
    else cmd_report(cfg, out);
  } catch (const ArtifactError& e) {
    return fail(kMissingArtifact, "missing_artifact", e.what());
  } catch (const NumericError& e) {
    return fail(kNumeric, "numeric", e.what());
  } catch (const ValidationError& e) {
    return fail(kInvalid, "validation", e.what());
  } catch (const ParseError& e) {
    return fail(kInvalid, "parse", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "internal", e.what());
  }
  return kOk;
}

}  // namespace unsc::cli
