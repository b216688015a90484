#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drivesal/checkpoint.hpp"
#include "drivesal/config.hpp"
#include "drivesal/decision.hpp"
#include "drivesal/errors.hpp"
#include "drivesal/gradcheck.hpp"
#include "drivesal/image_io.hpp"
#include "drivesal/manifest.hpp"
#include "drivesal/mapnorm.hpp"
#include "drivesal/metrics.hpp"
#include "drivesal/model.hpp"
#include "drivesal/synthetic.hpp"
#include "drivesal/telemetry.hpp"
#include "drivesal/trainer.hpp"

namespace {

using namespace drivesal;

// Flag values plus the CLI11 handles needed to tell "explicitly passed"
// apart from "left at default" when layering over a config file.
struct Flags {
  std::string config_path;
  std::string manifest;
  std::string checkpoint;
  std::string decision_checkpoint;
  std::string out;
  std::string variant;
  std::string losses;
  std::uint64_t seed = 1;

  CLI::Option* o_config = nullptr;
  CLI::Option* o_manifest = nullptr;
  CLI::Option* o_checkpoint = nullptr;
  CLI::Option* o_decision = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_variant = nullptr;
  CLI::Option* o_losses = nullptr;
  CLI::Option* o_seed = nullptr;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  f.o_config = cmd->add_option("--config", f.config_path, "key = value config file");
  f.o_seed = cmd->add_option("--seed", f.seed, "random seed");
  f.o_manifest = cmd->add_option("--manifest", f.manifest, "dataset manifest (JSON lines)");
  f.o_checkpoint = cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint path");
  f.o_out = cmd->add_option("--out", f.out, "output path");
  f.o_variant = cmd->add_option("--variant", f.variant, "prior variant (NCB/G16/G32/RBF16/RBF32)");
  f.o_losses = cmd->add_option("--losses", f.losses, "loss terms, e.g. CC,KL,NSS");
}

// Defaults, then the config file, then explicitly passed flags.
RunConfig assemble_config(const Flags& f) {
  RunConfig config;
  if (f.o_config->count() > 0) config = load_config(f.config_path);
  if (f.o_seed->count() > 0) config.seed = f.seed;
  if (f.o_manifest->count() > 0) config.manifest = f.manifest;
  if (f.o_checkpoint->count() > 0) config.checkpoint = f.checkpoint;
  if (f.o_out->count() > 0) config.out = f.out;
  if (f.o_variant->count() > 0) config.variant = f.variant;
  if (f.o_losses->count() > 0) set_losses(config, f.losses);
  if (f.o_decision != nullptr && f.o_decision->count() > 0) {
    config.decision_checkpoint = f.decision_checkpoint;
  }
  config.validate();
  return config;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

std::vector<Tensor> load_frames(const DatasetManifest& manifest, const ManifestEntry& entry) {
  std::vector<Tensor> frames;
  frames.reserve(entry.frame_paths.size());
  for (const std::string& p : entry.frame_paths) {
    frames.push_back(load_rgb_image(resolve_path(manifest.base_dir, p)));
  }
  return frames;
}

std::string format_row(const char* fmt, ...) {
  char buffer[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof(buffer), fmt, args);
  va_end(args);
  return buffer;
}

// ---- train ------------------------------------------------------------------

int cmd_train(const RunConfig& config) {
  if (config.manifest.empty()) throw ConfigError("train: a manifest is required");
  if (config.checkpoint.empty()) throw ConfigError("train: a checkpoint output path is required");

  const DatasetManifest manifest = load_manifest(config.manifest);
  SaliencyModel model(ModelConfig::from_run(config), config.seed);
  const TrainingLog log =
      train_saliency(model, manifest, config.loss_config(), config.epochs, config.lr, config.seed);
  model.save(config.checkpoint);

  for (std::size_t i = 0; i < log.epochs.size(); ++i) {
    const EpochRecord& r = log.epochs[i];
    std::printf("epoch %zu/%zu  total %.6f  kl %.6f  cc %.6f  nss %.6f  (%.2fs)\n", i + 1,
                log.epochs.size(), r.total, r.kl, r.cc, r.nss, r.seconds);
  }
  std::printf("saved %s (%s)\n", config.checkpoint.c_str(), config.model_id().c_str());

  if (!config.out.empty()) {
    std::string csv = "epoch,total,kl,cc,nss\n";
    for (std::size_t i = 0; i < log.epochs.size(); ++i) {
      const EpochRecord& r = log.epochs[i];
      csv += format_row("%zu,%.17g,%.17g,%.17g,%.17g\n", i + 1, r.total, r.kl, r.cc, r.nss);
    }
    write_text_file(config.out, csv);
  }

  if (!config.decision_checkpoint.empty()) {
    const auto dataset = build_decision_dataset(model, manifest);
    DecisionHead head(config.decision_config(), config.seed);
    const DecisionTrainLog decision_log =
        train_decision(head, dataset, config.decision_epochs, config.decision_lr, config.seed);
    head.save(config.decision_checkpoint);
    for (std::size_t i = 0; i < decision_log.epoch_loss.size(); ++i) {
      std::printf("decision epoch %zu/%zu  bce %.6f\n", i + 1, decision_log.epoch_loss.size(),
                  decision_log.epoch_loss[i]);
    }
    std::printf("saved %s\n", config.decision_checkpoint.c_str());
  }
  return 0;
}

// ---- eval -------------------------------------------------------------------

int cmd_eval(const RunConfig& base) {
  if (base.checkpoint.empty()) throw ConfigError("eval: a checkpoint is required");
  if (base.manifest.empty()) throw ConfigError("eval: a manifest is required");

  const SaliencyModel model = SaliencyModel::load(base.checkpoint);
  const DatasetManifest manifest = load_manifest(base.manifest);
  const EvalSummary summary = evaluate_saliency(model, manifest, base.epsilon);

  RunConfig named = base;  // the checkpoint, not the flags, defines the variant
  named.variant = variant_name(model.config().variant);
  std::string csv = "model_id,CC,KLD,NSS,AUC\n";
  csv += named.model_id();
  csv += format_row(",%.6f,%.6f", summary.cc, summary.kld);
  csv += summary.has_nss ? format_row(",%.6f", summary.nss) : ",";
  csv += ",\n";

  if (base.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text_file(base.out, csv);
    std::printf("wrote %s (%d samples)\n", base.out.c_str(), summary.samples);
  }
  return 0;
}

// ---- predict ----------------------------------------------------------------

int cmd_predict(const RunConfig& config, const std::vector<std::string>& frame_paths) {
  if (config.checkpoint.empty()) throw ConfigError("predict: a checkpoint is required");
  if (config.out.empty()) throw ConfigError("predict: an output map path is required");
  if (frame_paths.empty()) throw ArgumentError("predict: at least one frame is required");

  const SaliencyModel model = SaliencyModel::load(config.checkpoint);
  std::vector<Tensor> frames;
  frames.reserve(frame_paths.size());
  for (const std::string& p : frame_paths) frames.push_back(load_rgb_image(p));

  const Tensor map = model.predict(frames);
  write_gray_map(normalize_map(map, NormMode::MaxToOne), config.out);
  std::printf("wrote %s\n", config.out.c_str());
  return 0;
}

// ---- decide -----------------------------------------------------------------

int cmd_decide(const RunConfig& config, const std::vector<std::string>& frame_paths) {
  if (config.checkpoint.empty()) throw ConfigError("decide: a model checkpoint is required");
  if (config.decision_checkpoint.empty()) {
    throw ConfigError("decide: a decision checkpoint is required");
  }
  const bool batch = !config.manifest.empty();
  if (batch == !frame_paths.empty()) {
    throw ConfigError("decide: pass either --manifest or frame paths, not both");
  }

  const SaliencyModel model = SaliencyModel::load(config.checkpoint);
  const DecisionHead head = DecisionHead::load(config.decision_checkpoint);

  if (!batch) {
    std::vector<Tensor> frames;
    for (const std::string& p : frame_paths) frames.push_back(load_rgb_image(p));
    const BrakeDecision d = head.decide(model.predict(frames));
    std::printf("probability,brake\n%.6f,%d\n", d.probability, d.brake ? 1 : 0);
    return 0;
  }

  const DatasetManifest manifest = load_manifest(config.manifest);
  if (manifest.entries.empty()) throw ArgumentError("decide: manifest has no entries");
  std::string csv = "sample_id,probability,label\n";
  for (const ManifestEntry& entry : manifest.entries) {
    if (!entry.brake_label.has_value()) {
      throw DataError("sequence '" + entry.sequence_id + "' has no brake label");
    }
    const BrakeDecision d = head.decide(model.predict(load_frames(manifest, entry)));
    csv += format_row("%s,%.6f,%d\n", entry.sequence_id.c_str(), d.probability,
                      *entry.brake_label);
  }
  if (config.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text_file(config.out, csv);
    std::printf("wrote %s (%zu samples)\n", config.out.c_str(), manifest.entries.size());
  }
  return 0;
}

// ---- roc --------------------------------------------------------------------

double parse_field_double(const std::string& field, int line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw DataError("scores csv line " + std::to_string(line_no) + ": bad number '" + field + "'");
  }
  return v;
}

int cmd_roc(const std::string& scores_path, const std::string& out_path) {
  std::ifstream in(scores_path, std::ios::binary);
  if (!in) throw DataError("cannot open scores csv: " + scores_path);

  std::string line;
  int line_no = 0;
  std::vector<double> scores;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "sample_id,probability,label") {
        throw DataError("scores csv line 1: expected header sample_id,probability,label");
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 3) {
      throw DataError("scores csv line " + std::to_string(line_no) + ": expected 3 fields");
    }
    scores.push_back(parse_field_double(fields[1], line_no));
    const double label = parse_field_double(fields[2], line_no);
    if (label != 0.0 && label != 1.0) {
      throw DataError("scores csv line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    labels.push_back(static_cast<int>(label));
  }
  if (scores.empty()) throw DataError("scores csv has no data rows: " + scores_path);

  const std::vector<RocPoint> curve = roc_curve(scores, labels);
  std::printf("AUC,%.6f\n", auc(scores, labels));
  if (!out_path.empty()) {
    std::string csv = "fpr,tpr\n";
    for (const RocPoint& p : curve) csv += format_row("%.6f,%.6f\n", p.fpr, p.tpr);
    write_text_file(out_path, csv);
  }
  return 0;
}

// ---- label ------------------------------------------------------------------

std::vector<double> read_times_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open times file: " + path);
  std::vector<double> times;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const char* begin = line.c_str();
    char* end = nullptr;
    const double t = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      throw DataError("times file line " + std::to_string(line_no) + ": bad number '" + line +
                      "'");
    }
    times.push_back(t);
  }
  if (times.empty()) throw DataError("times file has no entries: " + path);
  return times;
}

int cmd_label(const std::string& telemetry_path, const std::string& times_path,
              const std::string& out_path) {
  if (out_path.empty()) throw ConfigError("label: an output path is required");
  const TelemetrySeries series = load_telemetry(telemetry_path);
  const BrakeLabelConfig config;

  std::vector<double> times;
  if (!times_path.empty()) {
    times = read_times_file(times_path);
  } else if (!series.samples.empty()) {
    // Default frame clock: 3 Hz across the telemetry span, starting one
    // comparison interval in so the first frame has a lookback sample.
    const double start = series.samples.front().timestamp_ms / 1000.0 + config.interval;
    const double stop = series.samples.back().timestamp_ms / 1000.0;
    for (double t = start; t <= stop + 1e-9; t += 1.0 / 3.0) times.push_back(t);
  }
  if (times.empty()) throw DataError("telemetry span too short for any frame");

  const BrakeLabelResult result = label_brakes(series, times, config);
  std::string csv = "frame_time,brake\n";
  for (const BrakeLabel& l : result.labels) {
    csv += format_row("%.6f,%d\n", l.frame_time, l.brake ? 1 : 0);
  }
  write_text_file(out_path, csv);

  const std::string skip_path = out_path + ".skipped.csv";
  std::string skipped = "frame_time,reason\n";
  for (const SkippedFrame& s : result.skipped) {
    skipped += format_row("%.6f,", s.frame_time);
    skipped += s.reason;
    skipped += "\n";
  }
  write_text_file(skip_path, skipped);
  std::printf("labeled %zu frames, skipped %zu (%s)\n", result.labels.size(),
              result.skipped.size(), skip_path.c_str());
  return 0;
}

// ---- synth ------------------------------------------------------------------

int cmd_synth(const std::string& out_dir, std::uint64_t seed) {
  if (out_dir.empty()) throw ConfigError("synth: an output directory is required");
  const SynthPaths paths = gen_synthetic(SynthConfig{}, out_dir, seed);
  std::printf("train %s\nval %s\ntest %s\n", paths.train_manifest.c_str(),
              paths.val_manifest.c_str(), paths.test_manifest.c_str());
  return 0;
}

// ---- gradcheck ----------------------------------------------------------------

int cmd_gradcheck(std::uint64_t seed) {
  const std::vector<OpCheck> checks = run_gradcheck_suite(seed);
  int failures = 0;
  for (const OpCheck& c : checks) {
    std::printf("%-24s max rel err %12.4e  tol %8.1e  %s\n", c.name.c_str(), c.max_rel_err,
                c.tolerance, c.pass ? "pass" : "FAIL");
    if (!c.pass) ++failures;
  }
  std::printf("%zu checks, %d failures\n", checks.size(), failures);
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driver-attention saliency pipeline: training, evaluation and braking decisions"};
  app.require_subcommand(1);

  Flags train_flags, eval_flags, predict_flags, decide_flags;
  std::vector<std::string> predict_frames, decide_frames;
  std::string roc_scores, roc_out, label_telemetry, label_times, label_out, synth_out;
  std::uint64_t synth_seed = 1;
  std::uint64_t gradcheck_seed = 1;

  CLI::App* train = app.add_subcommand("train", "Train the saliency model");
  add_common_flags(train, train_flags);
  train_flags.o_decision = train->add_option("--decision-checkpoint",
                                             train_flags.decision_checkpoint,
                                             "also train the brake head and save it here");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  add_common_flags(eval, eval_flags);

  CLI::App* predict = app.add_subcommand("predict", "Predict one saliency map");
  add_common_flags(predict, predict_flags);
  predict->add_option("frames", predict_frames, "input frame image(s)");

  CLI::App* decide = app.add_subcommand("decide", "Brake probability from frames or a manifest");
  add_common_flags(decide, decide_flags);
  decide_flags.o_decision = decide->add_option(
      "--decision-checkpoint", decide_flags.decision_checkpoint, "trained brake head checkpoint");
  decide->add_option("frames", decide_frames, "input frame image(s)");

  CLI::App* roc = app.add_subcommand("roc", "ROC curve and AUC from a decide CSV");
  roc->add_option("scores", roc_scores, "CSV from decide --manifest")->required();
  roc->add_option("--out", roc_out, "write curve points CSV here");

  CLI::App* label = app.add_subcommand("label", "Brake labels from telemetry");
  label->add_option("telemetry", label_telemetry, "telemetry CSV")->required();
  label->add_option("--times", label_times, "frame times file (seconds, one per line)");
  label->add_option("--out", label_out, "output labels CSV");

  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "random seed");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gradcheck->add_option("--seed", gradcheck_seed, "random seed");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(train)) return cmd_train(assemble_config(train_flags));
    if (app.got_subcommand(eval)) return cmd_eval(assemble_config(eval_flags));
    if (app.got_subcommand(predict)) {
      return cmd_predict(assemble_config(predict_flags), predict_frames);
    }
    if (app.got_subcommand(decide)) return cmd_decide(assemble_config(decide_flags), decide_frames);
    if (app.got_subcommand(roc)) return cmd_roc(roc_scores, roc_out);
    if (app.got_subcommand(label)) return cmd_label(label_telemetry, label_times, label_out);
    if (app.got_subcommand(synth)) return cmd_synth(synth_out, synth_seed);
    if (app.got_subcommand(gradcheck)) return cmd_gradcheck(gradcheck_seed);
    std::fprintf(stderr, "no subcommand given\n");
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const DegenerateInputError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
