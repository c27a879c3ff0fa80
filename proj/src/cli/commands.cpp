// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctcf/checkpoint.hpp"
#include "ctcf/cli.hpp"
#include "ctcf/error.hpp"
#include "ctcf/evalharness.hpp"
#include "ctcf/io.hpp"
#include "ctcf/localization.hpp"
#include "ctcf/report.hpp"

namespace ctcf {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
};

struct DataFlags {
  std::optional<std::size_t> n_pos, n_neg;
  std::optional<std::uint64_t> seed;
};

struct ModelFlags {
  std::string data;
  std::string volume;
  std::string ae;
  std::string scorer;
  std::string kind;
  std::optional<std::size_t> chunk_start, chunk_length, chunk_size, stride;
};

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", prefix, i, ext);
  return buf;
}

RunConfig effective_config(const CommonFlags& common) {
  RunConfig cfg = common.config.empty() ? RunConfig{} : load_run_config(common.config);
  if (!common.out.empty()) cfg.output_dir = common.out;
  return cfg;
}

void echo_config(const RunConfig& cfg) {
  cfg.validate();
  write_file_atomic(cfg.output_dir / "effective_config.json", to_json(cfg).dump(2) + "\n");
}

void write_text(const RunConfig& cfg, const std::string& name, const std::string& text) {
  write_file_atomic(cfg.output_dir / name, text);
}

std::string metrics_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::string s = "metric,value\n";
  for (const auto& [k, v] : rows) s += k + "," + format_double(v) + "\n";
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::size_t parse_index(const std::string& text, const std::string& context) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) fail(ErrorKind::MalformedFile, context + ": bad integer '" + text + "'");
  return v;
}

// labels.csv: index,volume,mask,label,rim_begin,rim_end
std::vector<LabeledVolume> load_dataset(const fs::path& dir) {
  const fs::path labels = dir / "labels.csv";
  std::istringstream is(read_file(labels));
  std::string line;
  if (!std::getline(is, line) || line != "index,volume,mask,label,rim_begin,rim_end")
    fail(ErrorKind::MalformedFile, labels.string() + ": unexpected header");
  std::vector<LabeledVolume> items;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string ctx = labels.string() + ":" + std::to_string(row);
    if (cells.size() != 6) fail(ErrorKind::MalformedFile, ctx + ": expected 6 columns");
    LabeledVolume item;
    item.volume = read_ctvf(dir / cells[1]);
    item.truth_mask = read_ctvf(dir / cells[2]);
    require_same_shape(item.volume, item.truth_mask, "dataset mask");
    const std::size_t label = parse_index(cells[3], ctx);
    if (label > 1) fail(ErrorKind::MalformedFile, ctx + ": label must be 0 or 1");
    item.label = static_cast<Label>(label);
    items.push_back(std::move(item));
  }
  if (items.empty()) fail(ErrorKind::MalformedFile, labels.string() + ": no volumes listed");
  for (const auto& item : items) require_same_shape(items.front().volume, item.volume, "dataset volumes");
  return items;
}

void require_flag(const std::string& value, const char* name) {
  if (value.empty()) fail(ErrorKind::InvalidArgument, std::string("missing required flag --") + name);
}

VolumeScorer scorer_from_config(const RunConfig& cfg, std::size_t h, std::size_t w) {
  switch (scorer_kind_from_string(cfg.scorer.kind)) {
    case ScorerKind::SegSum:
      return VolumeScorer::seg_sum(h, w, {cfg.scorer.seg_weight, cfg.scorer.seg_bias});
    case ScorerKind::Constant:
      return VolumeScorer::constant(h, w, cfg.scorer.constant_value);
    case ScorerKind::RimDetector:
      return VolumeScorer::rim_detector(h, w);
    case ScorerKind::LinearProbe:
      break;
  }
  fail(ErrorKind::InvalidArgument, "scorer kind '" + cfg.scorer.kind + "' cannot be created by train-scorer");
}

void check_models(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v) {
  if (ae.height() != v.height || ae.width() != v.width || f.height() != v.height || f.width() != v.width)
    fail(ErrorKind::ShapeMismatch, "models expect " + std::to_string(ae.height()) + "x" +
                                       std::to_string(ae.width()) + " slices, volume has " +
                                       std::to_string(v.height) + "x" + std::to_string(v.width));
}

// ---------------------------------------------------------------------------

void cmd_make_data(RunConfig cfg, const DataFlags& flags, std::ostream& out) {
  if (flags.n_pos) cfg.dataset.n_pos = *flags.n_pos;
  if (flags.n_neg) cfg.dataset.n_neg = *flags.n_neg;
  if (flags.seed) cfg.dataset.seed = *flags.seed;
  echo_config(cfg);
  const auto items = make_dataset(cfg.dataset.n_pos, cfg.dataset.n_neg, cfg.phantom, cfg.dataset.seed,
                                  cfg.dataset.jitter);
  std::vector<std::string> rows(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const PhantomSpec spec = dataset_item_spec(i, i < cfg.dataset.n_pos, cfg.phantom, cfg.dataset.seed,
                                               cfg.dataset.jitter);
    const std::string vol = "volumes/" + numbered("vol", i, ".ctvf");
    const std::string mask = "masks/" + numbered("mask", i, ".ctvf");
    write_ctvf(cfg.output_dir / vol, items[i].volume);
    write_ctvf(cfg.output_dir / mask, items[i].truth_mask);
    rows[i] = std::to_string(i) + "," + vol + "," + mask + "," + std::to_string(static_cast<int>(items[i].label)) +
              "," + (spec.rim ? std::to_string(spec.rim->slice_begin) : "") + "," +
              (spec.rim ? std::to_string(spec.rim->slice_end) : "");
  }
  std::string csv = "index,volume,mask,label,rim_begin,rim_end\n";
  for (const auto& r : rows) csv += r + "\n";
  write_text(cfg, "labels.csv", csv);

  const LabeledVolume demo = make_phantom(cfg.phantom);
  write_ctvf(cfg.output_dir / "phantom.ctvf", demo.volume);
  write_ctvf(cfg.output_dir / "phantom_mask.ctvf", demo.truth_mask);
  out << "wrote " << items.size() << " volumes to " << cfg.output_dir.string() << "\n";
}

void cmd_train_ae(RunConfig cfg, const ModelFlags& flags, std::ostream& out) {
  require_flag(flags.data, "data");
  echo_config(cfg);
  const auto items = load_dataset(flags.data);
  std::vector<Volume> volumes;
  for (const auto& item : items) volumes.push_back(item.volume);
  const Volume& first = volumes.front();
  auto ae = SliceAutoencoder::make(first.height, first.width, cfg.autoencoder.latent_dim, cfg.autoencoder.hidden,
                                   cfg.autoencoder.init_seed);
  const AutoencoderTraining trained = train_autoencoder(std::move(ae), volumes, cfg.train_ae);
  const double mse = reconstruction_mse(trained.model, volumes);
  save_model(cfg.output_dir / "ae.mdl", trained.model);
  write_text(cfg, "ae_loss.csv", loss_csv(trained.loss_history));
  write_text(cfg, "ae_metrics.csv", metrics_csv({{"initial_loss", trained.loss_history.front()},
                                                 {"final_loss", trained.loss_history.back()},
                                                 {"reconstruction_mse", mse}}));
  out << "reconstruction_mse " << format_double(mse) << "\n";
}

void cmd_train_scorer(RunConfig cfg, const ModelFlags& flags, std::ostream& out) {
  if (!flags.kind.empty()) cfg.scorer.kind = flags.kind;
  echo_config(cfg);
  const ScorerKind kind = scorer_kind_from_string(cfg.scorer.kind);
  std::vector<LabeledVolume> items;
  if (kind == ScorerKind::RimDetector) {
    require_flag(flags.data, "data");
    items = load_dataset(flags.data);
  } else if (!flags.data.empty()) {
    items = load_dataset(flags.data);
  }
  const std::size_t h = items.empty() ? cfg.phantom.height : items.front().volume.height;
  const std::size_t w = items.empty() ? cfg.phantom.width : items.front().volume.width;
  VolumeScorer f = scorer_from_config(cfg, h, w);
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<double> history;
  if (kind == ScorerKind::RimDetector) {
    ScorerTraining trained = train_scorer(std::move(f), items, cfg.train_scorer);
    f = std::move(trained.model);
    history = std::move(trained.loss_history);
    metrics.emplace_back("train_accuracy", trained.train_accuracy);
    metrics.emplace_back("train_auc", trained.train_auc);
  }
  if (cfg.scorer.heldout_pos > 0 && cfg.scorer.heldout_neg > 0) {
    PhantomSpec base = cfg.phantom;
    base.height = h;
    base.width = w;
    const auto heldout = make_dataset(cfg.scorer.heldout_pos, cfg.scorer.heldout_neg, base,
                                      cfg.scorer.heldout_seed, cfg.dataset.jitter);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& item : heldout) {
      scores.push_back(f.score(item.volume));
      labels.push_back(static_cast<int>(item.label));
    }
    metrics.emplace_back("heldout_auc", auc(scores, labels));
  }
  save_model(cfg.output_dir / "scorer.mdl", f);
  write_text(cfg, "scorer_loss.csv", loss_csv(history));
  write_text(cfg, "scorer_metrics.csv", metrics_csv(metrics));
  for (const auto& [k, v] : metrics) out << k << " " << format_double(v) << "\n";
}

struct LoadedModels {
  Volume volume;
  SliceAutoencoder ae;
  VolumeScorer scorer;
};

LoadedModels load_models(const ModelFlags& flags) {
  require_flag(flags.volume, "volume");
  require_flag(flags.ae, "ae");
  require_flag(flags.scorer, "scorer");
  LoadedModels m{read_ctvf(flags.volume), load_autoencoder(flags.ae), load_scorer(flags.scorer)};
  check_models(m.ae, m.scorer, m.volume);
  return m;
}

void cmd_gen_cf(RunConfig cfg, const ModelFlags& flags, std::ostream& out) {
  if (flags.chunk_start) cfg.chunk.start = *flags.chunk_start;
  if (flags.chunk_length) cfg.chunk.length = *flags.chunk_length;
  echo_config(cfg);
  const LoadedModels m = load_models(flags);
  const std::size_t depth = m.volume.depth;
  const ChunkSpec chunk{cfg.chunk.start, cfg.chunk.length == 0 ? depth - std::min(depth, cfg.chunk.start)
                                                               : cfg.chunk.length};
  chunk.validate(depth);
  const CFResult r = generate_cf(m.ae, m.scorer, m.volume, chunk, cfg.search);
  write_ctvf(cfg.output_dir / "cf.ctvf", r.cf_volume);
  write_ctvf(cfg.output_dir / "reconstruction.ctvf", r.reconstruction);
  write_text(cfg, "cf_result.json", cf_result_json(r).dump(2) + "\n");
  write_text(cfg, "trace.csv", trace_csv(r.trace));
  write_pgm_slices(cfg.output_dir / "heatmap", "heatmap", diff_heatmap(r.reconstruction, r.cf_volume), 0, depth);
  out << "status " << to_string(r.status) << " lambda_star " << format_double(r.lambda_star) << " prediction "
      << format_double(r.min_prediction()) << " baseline " << format_double(r.baseline_prediction) << "\n";
}

void cmd_scan(RunConfig cfg, const ModelFlags& flags, std::ostream& out) {
  if (flags.chunk_size) cfg.chunk.scan_size = *flags.chunk_size;
  if (flags.stride) cfg.chunk.scan_stride = *flags.stride;
  echo_config(cfg);
  const LoadedModels m = load_models(flags);
  const ScanReport report =
      scan_chunks(m.ae, m.scorer, m.volume, cfg.chunk.scan_size, cfg.chunk.scan_stride, cfg.scan_search);
  write_text(cfg, "scan.csv", scan_csv(report));
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const ScanEntry& e = report.entries[i];
    const CFResult& r = report.runs[i];
    char dir[32];
    std::snprintf(dir, sizeof dir, "chunk_%03zu", e.start);
    write_pgm_slices(cfg.output_dir / "heatmaps" / dir, "heatmap", diff_heatmap(r.reconstruction, r.cf_volume),
                     e.start, e.end);
  }
  nlohmann::ordered_json summary;
  summary["chunk_size"] = report.chunk_size;
  summary["stride"] = report.stride;
  summary["windows"] = report.entries.size();
  summary["best_start"] = report.best().start;
  summary["best_end"] = report.best().end;
  summary["best_reduction"] = report.best().reduction;
  write_text(cfg, "scan_summary.json", summary.dump(2) + "\n");
  out << "windows " << report.entries.size() << " best_chunk " << report.best().start << "\n";
}

void cmd_evaluate(RunConfig cfg, const ModelFlags& flags, std::ostream& out) {
  require_flag(flags.data, "data");
  require_flag(flags.ae, "ae");
  require_flag(flags.scorer, "scorer");
  if (flags.chunk_size) cfg.evaluate.chunk_size = *flags.chunk_size;
  echo_config(cfg);
  const auto items = load_dataset(flags.data);
  const SliceAutoencoder ae = load_autoencoder(flags.ae);
  const VolumeScorer f = load_scorer(flags.scorer);
  check_models(ae, f, items.front().volume);

  const ReductionTable table = evaluate_reduction(ae, f, items, cfg.evaluate.chunk_size, cfg.search,
                                                  {cfg.evaluate.cf_negatives, 0});
  write_text(cfg, "reduction.csv", reduction_csv(table));
  write_text(cfg, "per_volume.csv", per_volume_csv(table));

  std::vector<LabeledVolume> positives;
  for (const auto& item : items)
    if (item.label == Label::Positive) positives.push_back(item);
  if (!cfg.evaluate.sweep_sizes.empty()) {
    const SweepResult sweep = chunk_size_sweep(ae, f, positives, cfg.evaluate.sweep_sizes, cfg.search);
    write_text(cfg, "sweep.csv", sweep_csv(sweep));
  }
  write_text(cfg, "histograms.csv", histograms_csv(prediction_histograms(table, cfg.evaluate.bins)));

  const double p = permutation_test(table.predictions(Label::Positive), table.predictions(Label::Negative),
                                    cfg.evaluate.permutation_iterations, cfg.evaluate.permutation_seed);
  const double gap = table.positives.mean - table.negatives.mean;
  nlohmann::ordered_json summary;
  summary["chunk_size"] = table.chunk_size;
  summary["mean_positive"] = table.positives.mean;
  summary["mean_negative"] = table.negatives.mean;
  summary["mean_cf_positive"] = table.cf_positives.mean;
  summary["reduction_fraction_of_gap"] = gap != 0.0 ? (table.positives.mean - table.cf_positives.mean) / gap : 0.0;
  summary["permutation_iterations"] = cfg.evaluate.permutation_iterations;
  summary["p_value"] = p;
  write_text(cfg, "summary.json", summary.dump(2) + "\n");
  out << "pos " << format_double(table.positives.mean) << " neg " << format_double(table.negatives.mean) << " cf "
      << format_double(table.cf_positives.mean) << " p " << format_double(p) << "\n";
}

std::string quote(const std::string& s) {
  return nlohmann::json(s).dump();
}

void report(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  std::string flat = message;
  for (char& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  err << "error code=" << code << " kind=" << kind << " message=" << quote(flat) << "\n";
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ctcf: slice-wise latent shift counterfactuals for CT-like volumes"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonFlags common;
  DataFlags data;
  ModelFlags model;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON run config");
    sub->add_option("--out", common.out, "output directory (overrides output_dir)");
  };

  auto* make_data = app.add_subcommand("make-data", "generate a seeded phantom dataset");
  add_common(make_data);
  make_data->add_option("--n-pos", data.n_pos);
  make_data->add_option("--n-neg", data.n_neg);
  make_data->add_option("--seed", data.seed);

  auto* train_ae = app.add_subcommand("train-ae", "train the slice autoencoder");
  add_common(train_ae);
  train_ae->add_option("--data", model.data, "dataset directory from make-data");

  auto* train_sc = app.add_subcommand("train-scorer", "train or construct a volume scorer");
  add_common(train_sc);
  train_sc->add_option("--data", model.data, "dataset directory from make-data");
  train_sc->add_option("--kind", model.kind, "rim_detector, seg_sum or constant");

  auto add_models = [&](CLI::App* sub) {
    sub->add_option("--ae", model.ae, "autoencoder checkpoint");
    sub->add_option("--scorer", model.scorer, "scorer checkpoint");
  };
  auto* gen_cf = app.add_subcommand("gen-cf", "generate one counterfactual");
  add_common(gen_cf);
  add_models(gen_cf);
  gen_cf->add_option("--volume", model.volume, "input CTVF volume");
  gen_cf->add_option("--chunk-start", model.chunk_start);
  gen_cf->add_option("--chunk-length", model.chunk_length, "0 means to the end of the volume");

  auto* scan = app.add_subcommand("scan", "counterfactuals for every chunk window");
  add_common(scan);
  add_models(scan);
  scan->add_option("--volume", model.volume, "input CTVF volume");
  scan->add_option("--chunk-size", model.chunk_size);
  scan->add_option("--stride", model.stride, "0 means chunk size");

  auto* evaluate = app.add_subcommand("evaluate", "reduction table, sweep, histograms and p-value");
  add_common(evaluate);
  add_models(evaluate);
  evaluate->add_option("--data", model.data, "dataset directory from make-data");
  evaluate->add_option("--chunk-size", model.chunk_size);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto code = static_cast<int>(ErrorKind::InvalidArgument);
    report(err, code, to_string(ErrorKind::InvalidArgument), e.what());
    return code;
  }

  try {
    const RunConfig cfg = effective_config(common);
    if (make_data->parsed()) cmd_make_data(cfg, data, out);
    else if (train_ae->parsed()) cmd_train_ae(cfg, model, out);
    else if (train_sc->parsed()) cmd_train_scorer(cfg, model, out);
    else if (gen_cf->parsed()) cmd_gen_cf(cfg, model, out);
    else if (scan->parsed()) cmd_scan(cfg, model, out);
    else if (evaluate->parsed()) cmd_evaluate(cfg, model, out);
    return 0;
  } catch (const Error& e) {
    const int code = static_cast<int>(e.kind());
    report(err, code, to_string(e.kind()), e.what());
    return code;
  } catch (const std::exception& e) {
    report(err, 1, "internal", e.what());
    return 1;
  }
}

}  // namespace ctcf
