// Copyright 2026 The MSNet Lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "msnet/cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <map>

#include "msnet/cli/pipeline.hpp"
#include "msnet/common/error.hpp"
#include "msnet/common/util.hpp"
#include "msnet/model/checkpoint.hpp"

namespace msnet::cli {

namespace fs = std::filesystem;

namespace {

enum class Format { kHuman, kMachine };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string format = "human";
  std::string dataset;
  bool no_verify = false;

  Format fmt() const { return format == "machine" ? Format::kMachine : Format::kHuman; }

  ExperimentConfig load() const {
    ExperimentConfig c = config.empty() ? parse_experiment("{}") : load_experiment(config);
    if (seed) {
      c.seed = *seed;
      c.model.seed = *seed;
    }
    if (!dataset.empty()) c.paths.dataset = dataset;
    return c;
  }
};

void add_common(CLI::App& app, Common& c, bool with_dataset = true) {
  app.add_option("--config", c.config, "experiment config (JSON with comments)");
  app.add_option("--seed", c.seed, "overrides the config seed");
  app.add_option("--format", c.format, "output format")->check(CLI::IsMember({"human", "machine"}));
  if (with_dataset) {
    app.add_option("--dataset", c.dataset, "dataset directory (default: paths.dataset)");
    app.add_flag("--no-verify", c.no_verify, "skip dataset hash verification");
  }
}

std::string fmt_opt(const std::optional<double>& v, const char* spec) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

void write_report_files(const fs::path& dir, const std::string& name, const metrics::PredictionFile& preds,
                        const metrics::MetricReport& report) {
  fs::create_directories(dir);
  metrics::write_predictions(preds, dir / (name + ".predictions.tsv"));
  write_file_atomic(dir / (name + ".report.json"), metrics::report_to_json(report).dump(2) + "\n");
}

std::optional<metrics::MetricReport> load_baseline(const std::string& path, const std::string& dataset_hash,
                                                   std::string& note) {
  if (path.empty()) return std::nullopt;
  if (!fs::exists(path)) {
    note = "baseline report '" + path + "' not found; RelaImpr columns omitted";
    return std::nullopt;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kParse, path + ": " + e.what());
  }
  metrics::MetricReport base = metrics::report_from_json(j);
  if (base.meta.dataset_hash != dataset_hash) {
    throw Error(errc::kHashMismatch, "baseline '" + path + "' was computed on dataset " + base.meta.dataset_hash +
                                         " but this evaluation uses dataset " + dataset_hash);
  }
  return base;
}

// --- generate ------------------------------------------------------------

struct GenerateArgs {
  Common common;
  bool force = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const ExperimentConfig c = a.common.load();
  const Dataset d = generate_dataset(c);
  write_dataset_dir(d, c.paths.dataset, a.force);
  if (a.common.fmt() == Format::kMachine) {
    nlohmann::json j = d.manifest.to_json();
    j["dir"] = c.paths.dataset.string();
    out << j.dump() << "\n";
  } else {
    out << "wrote " << d.train.size() << " train and " << d.test.size() << " test impressions to "
        << c.paths.dataset.string() << "\n"
        << "dataset_hash=" << d.manifest.dataset_hash << " generator_hash=" << d.manifest.generator_hash << "\n";
  }
  return 0;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string arch;
  std::string name;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const ExperimentConfig c = a.common.load();
  const model::Arch arch = a.arch.empty() ? c.model.arch : model::parse_arch(a.arch);
  const model::ModelConfig mc = c.model_for(arch);
  const std::string name = a.name.empty() ? model::to_string(arch) : a.name;
  const Dataset d = read_dataset_dir(c.paths.dataset, c.generator_hash(), !a.common.no_verify);
  const TrainResult r = train_model(mc, d, c.paths.checkpoints, name);

  std::string log = "#model=" + name + "\n#config_hash=" + mc.hash() + "\n#dataset_hash=" +
                    d.manifest.dataset_hash + "\n";
  for (const auto& e : r.logs) log += model::format_epoch(e) + "\n";
  write_file_atomic(c.paths.checkpoints / (name + ".log"), log);

  const fs::path ckpt = c.paths.checkpoints / (name + ".ckpt");
  if (a.common.fmt() == Format::kMachine) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : r.logs) {
      epochs.push_back({{"epoch", e.epoch}, {"batches", e.batches}, {"ce", e.ce}, {"aux", e.aux}, {"total", e.total}});
    }
    out << nlohmann::json{{"checkpoint", ckpt.string()}, {"config_hash", mc.hash()},
                          {"dataset_hash", d.manifest.dataset_hash}, {"epochs", epochs}}
               .dump()
        << "\n";
  } else {
    for (const auto& e : r.logs) out << model::format_epoch(e) << "\n";
    if (r.logs.empty()) {
      out << "final: no epochs trained\n";
    } else {
      const auto& e = r.logs.back();
      out << "final ce=" << format_double(e.ce) << " aux=" << format_double(e.aux)
          << " total=" << format_double(e.total) << "\n";
    }
    out << "checkpoint " << ckpt.string() << " config_hash=" << mc.hash() << "\n";
  }
  return 0;
}

// --- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  std::string checkpoint;
  std::string baseline;
  std::string name;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const ExperimentConfig c = a.common.load();
  model::Checkpoint ck = model::load_checkpoint(a.checkpoint);
  const Dataset d = read_dataset_dir(c.paths.dataset, std::nullopt, !a.common.no_verify);
  if (!a.common.no_verify && ck.dataset_hash != d.manifest.dataset_hash) {
    throw Error(errc::kHashMismatch, "checkpoint '" + a.checkpoint + "' (config " + ck.config_hash +
                                         ") was trained on dataset " + ck.dataset_hash + " but '" +
                                         c.paths.dataset.string() + "' is dataset " + d.manifest.dataset_hash);
  }
  const std::string name = a.name.empty() ? fs::path(a.checkpoint).stem().string() : a.name;
  const model::CtrModel m = model::model_from(ck);
  const metrics::PredictionFile preds = evaluate_model(m, name, d, c.partition_seed);
  std::string note;
  const auto base = load_baseline(a.baseline, d.manifest.dataset_hash, note);
  metrics::MetricReport rep = metrics::grouped_report(preds.records, preds.meta, base ? &*base : nullptr);
  if (!note.empty()) rep.baseline_note = note;
  write_report_files(c.paths.reports, name, preds, rep);
  if (a.common.fmt() == Format::kMachine) {
    out << metrics::report_to_json(rep).dump() << "\n";
  } else {
    out << metrics::render_report(rep);
    out << "wrote " << (c.paths.reports / (name + ".predictions.tsv")).string() << " and "
        << (c.paths.reports / (name + ".report.json")).string() << "\n";
  }
  return 0;
}

// --- ablate --------------------------------------------------------------

struct AblationRow {
  std::string name;
  std::optional<metrics::MetricReport> report;
  std::string error;  // "CODE: message" when the variant failed
};

std::string ablation_block(const std::vector<AblationRow>& rows, const std::string& group) {
  std::string out = "variant              AUC  RelaImpr     GAUC  RelaImpr\n";
  for (const auto& r : rows) {
    std::string line = r.name;
    line.resize(std::max<std::size_t>(line.size(), 14), ' ');
    if (!r.report) {
      out += line + "  FAILED " + r.error + "\n";
      continue;
    }
    const metrics::GroupMetrics* g = r.report->group(group);
    if (!g || g->absent_reason) {
      out += line + "  absent\n";
      continue;
    }
    line += pad(fmt_opt(g->auc_mean, "%.4f"), 9) + pad(fmt_opt(g->rela_auc, "%+.2f%%"), 10) +
            pad(fmt_opt(g->gauc, "%.4f"), 9) + pad(fmt_opt(g->rela_gauc, "%+.2f%%"), 10);
    out += line + "\n";
  }
  return out;
}

std::string format_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

int cmd_ablate(const Common& common, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = common.load();
  Dataset d;
  if (!fs::exists(c.paths.dataset / kManifestFile)) {
    d = generate_dataset(c);
    write_dataset_dir(d, c.paths.dataset, false);
    err << "generated dataset " << d.manifest.dataset_hash << " in " << c.paths.dataset.string() << "\n";
  } else {
    d = read_dataset_dir(c.paths.dataset, c.generator_hash(), !common.no_verify);
  }

  std::vector<Variant> grid{variant_by_name("base")};
  for (const auto& n : c.ablation) {
    if (n != "base") grid.push_back(variant_by_name(n));
  }
  for (double alpha : c.alpha_sweep) {
    Variant v = variant_by_name("full");
    v.name = "full@alpha=" + format_alpha(alpha);
    v.alpha = alpha;
    grid.push_back(v);
  }

  const fs::path ckpt_dir = c.paths.checkpoints / "ablation";
  const fs::path report_dir = c.paths.reports / "ablation";
  std::vector<AblationRow> rows;
  std::map<std::string, std::size_t> by_config;  // config hash -> row, to reuse identical runs
  std::optional<metrics::MetricReport> base;
  for (const auto& v : grid) {
    AblationRow row{v.name, std::nullopt, ""};
    try {
      const model::ModelConfig mc = apply(v, c.model_for(v.arch));
      if (auto it = by_config.find(mc.hash()); it != by_config.end() && rows[it->second].report) {
        row.report = rows[it->second].report;
        row.report->meta.model = v.name;
      } else {
        err << "training " << v.name << " (config " << mc.hash() << ")\n";
        const TrainResult t = train_model(mc, d, ckpt_dir, v.name);
        const metrics::PredictionFile preds = evaluate_model(t.model, v.name, d, c.partition_seed);
        row.report = metrics::grouped_report(preds.records, preds.meta, base ? &*base : nullptr);
        if (v.name == "base") {
          const metrics::MetricReport self = *row.report;
          row.report = metrics::grouped_report(preds.records, preds.meta, &self);
        }
        if (!base && v.name != "base") row.report->baseline_note = "base variant failed";
        write_report_files(report_dir, v.name, preds, *row.report);
      }
      by_config[mc.hash()] = rows.size();
      if (v.name == "base") base = row.report;
    } catch (const Error& e) {
      row.error = e.code() + ": " + e.what();
    } catch (const std::exception& e) {
      row.error = std::string("INTERNAL: ") + e.what();
    }
    rows.push_back(std::move(row));
  }

  nlohmann::json j{{"format", "msnet-ablation/v1"}, {"dataset_hash", d.manifest.dataset_hash}, {"seed", c.seed}};
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"variant", r.name},
                         {"report", r.report ? metrics::report_to_json(*r.report) : nlohmann::json(nullptr)},
                         {"error", r.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.error)}});
  }
  const std::string text = "overall\n" + ablation_block(rows, "overall") + "\nlimited-stock items\n" +
                           ablation_block(rows, "limited") + "\nnew items\n" + ablation_block(rows, "new");
  fs::create_directories(c.paths.reports);
  write_file_atomic(c.paths.reports / "ablation.json", j.dump(2) + "\n");
  write_file_atomic(c.paths.reports / "ablation.txt", text);
  if (common.fmt() == Format::kMachine) {
    out << j.dump() << "\n";
  } else {
    out << text;
  }
  const bool any_failed = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return !r.report; });
  if (any_failed) throw Error("VARIANT_FAILED", "one or more ablation variants failed; see the table");
  return 0;
}

// --- report --------------------------------------------------------------

struct ReportArgs {
  Common common;
  std::vector<std::string> files;
  std::string checkpoint;
};

std::string comparison_table(const std::vector<metrics::MetricReport>& reports) {
  std::string out = "group    ";
  for (const auto& r : reports) {
    std::string h = r.meta.model;
    out += " | " + pad(h, 8) + " AUC  RelaImpr     GAUC  RelaImpr";
  }
  out += "\n";
  for (const char* group : {"overall", "new", "limited", "multi"}) {
    std::string line = group;
    line.resize(9, ' ');
    for (const auto& r : reports) {
      const metrics::GroupMetrics* g = r.group(group);
      if (!g || g->absent_reason) {
        line += " | " + pad("absent", 40);
        continue;
      }
      line += " | " + pad(fmt_opt(g->auc_mean, "%.4f"), 12) + pad(fmt_opt(g->rela_auc, "%+.2f%%"), 10) +
              pad(fmt_opt(g->gauc, "%.4f"), 9) + pad(fmt_opt(g->rela_gauc, "%+.2f%%"), 10);
    }
    out += line + "\n";
  }
  return out;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<metrics::PredictionFile> files;
  for (const auto& f : a.files) files.push_back(metrics::read_predictions(f));
  for (std::size_t i = 1; i < files.size(); ++i) {
    if (files[i].meta.dataset_hash != files[0].meta.dataset_hash) {
      throw Error(errc::kHashMismatch, "'" + a.files[i] + "' is from dataset " + files[i].meta.dataset_hash + " but '" +
                                           a.files[0] + "' is from dataset " + files[0].meta.dataset_hash);
    }
  }
  std::vector<metrics::MetricReport> reports;
  for (const auto& f : files) {
    reports.push_back(metrics::grouped_report(f.records, f.meta, reports.empty() ? nullptr : &reports.front()));
  }

  std::optional<seq::ScoreTable> scores;
  if (!a.checkpoint.empty()) {
    const ExperimentConfig c = a.common.load();
    model::Checkpoint ck = model::load_checkpoint(a.checkpoint);
    if (ck.dataset_hash != files[0].meta.dataset_hash) {
      throw Error(errc::kHashMismatch, "checkpoint '" + a.checkpoint + "' was trained on dataset " + ck.dataset_hash +
                                           " but the prediction files are from dataset " + files[0].meta.dataset_hash);
    }
    const Dataset d = read_dataset_dir(c.paths.dataset, std::nullopt, !a.common.no_verify);
    if (!a.common.no_verify && d.manifest.dataset_hash != ck.dataset_hash) {
      throw Error(errc::kHashMismatch, "'" + c.paths.dataset.string() + "' is dataset " + d.manifest.dataset_hash +
                                           " but the checkpoint was trained on " + ck.dataset_hash);
    }
    const model::CtrModel m = model::model_from(ck);
    scores.emplace();
    m.attention_scores(m.encode(d.test), *scores);
  }

  if (a.common.fmt() == Format::kMachine) {
    nlohmann::json j{{"format", "msnet-comparison/v1"}, {"reports", nlohmann::json::array()}};
    for (const auto& r : reports) j["reports"].push_back(metrics::report_to_json(r));
    j["attention"] = scores ? attention_table_json(*scores) : nlohmann::json(nullptr);
    out << j.dump() << "\n";
  } else {
    out << "dataset " << files[0].meta.dataset_hash;
    if (reports.size() > 1) out << "; RelaImpr relative to " << reports[0].meta.model;
    out << "\n" << comparison_table(reports);
    if (scores) out << "\n" << render_attention_table(*scores);
  }
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MSNet CTR lab: synthetic C2C market, DIN baseline and MSNet"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "simulate the market and write train/test files plus a manifest");
  add_common(*g, gen.common, false);
  g->add_option("--out", gen.common.dataset, "output directory (default: paths.dataset)");
  g->add_flag("--force", gen.force, "overwrite existing files");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train one architecture and write checkpoints and a log");
  add_common(*t, train.common);
  t->add_option("--arch", train.arch, "architecture")->check(CLI::IsMember({"din", "msnet"}));
  t->add_option("--name", train.name, "checkpoint name (default: the architecture)");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "predict the test day and write predictions and a grouped report");
  add_common(*e, eval.common);
  e->add_option("--checkpoint", eval.checkpoint, "checkpoint to evaluate")->required();
  e->add_option("--baseline", eval.baseline, "baseline report JSON for RelaImpr columns");
  e->add_option("--name", eval.name, "output name (default: checkpoint file stem)");

  Common ablate;
  auto* ab = app.add_subcommand("ablate", "train and evaluate the ablation grid and alpha sweep");
  add_common(*ab, ablate);

  ReportArgs report;
  auto* rp = app.add_subcommand("report", "compare prediction files; the first is the RelaImpr baseline");
  add_common(*rp, report.common);
  rp->add_option("files", report.files, "prediction files")->required();
  rp->add_option("--checkpoint", report.checkpoint, "checkpoint for the attention-score table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: USAGE: " << one_line(ex.what()) << "\n";
    return 2;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*t) return cmd_train(train, out);
    if (*e) return cmd_evaluate(eval, out);
    if (*ab) return cmd_ablate(ablate, out, err);
    if (*rp) return cmd_report(report, out);
  } catch (const Error& ex) {
    err << "error: " << ex.code() << ": " << one_line(ex.what()) << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: INTERNAL: " << one_line(ex.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace msnet::cli
