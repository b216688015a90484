#include "drivesal/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "drivesal/errors.hpp"
#include "drivesal/image_io.hpp"
#include "drivesal/mapnorm.hpp"
#include "drivesal/metrics.hpp"
#include "drivesal/rng.hpp"

namespace drivesal {

namespace {

struct Sample {
  std::string id;
  std::vector<Tensor> frames;
  Tensor target;      // raw ground-truth map
  Tensor target_sum;  // sum-normalized, fixed
  Tensor fixation;    // undefined unless loaded
};

std::vector<Sample> load_samples(const DatasetManifest& manifest, int seq_len, bool need_fixation) {
  if (manifest.entries.empty()) throw ArgumentError("manifest has no entries");
  std::vector<Sample> samples;
  samples.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    if (entry.frame_paths.size() != 1 &&
        static_cast<int>(entry.frame_paths.size()) != seq_len) {
      throw DataError("sequence '" + entry.sequence_id + "' has " +
                      std::to_string(entry.frame_paths.size()) +
                      " frames, expected 1 or seq_len = " + std::to_string(seq_len));
    }
    Sample sample;
    sample.id = entry.sequence_id;
    for (const std::string& p : entry.frame_paths) {
      sample.frames.push_back(load_rgb_image(resolve_path(manifest.base_dir, p)));
    }
    sample.target = load_gray_map(resolve_path(manifest.base_dir, entry.saliency_map_path));
    sample.target_sum = normalize_map(sample.target, NormMode::SumToOne);
    if (need_fixation) {
      if (!entry.has_fixation()) {
        throw ConfigError("nss loss needs fixation maps, but sequence '" + entry.sequence_id +
                          "' has none");
      }
      sample.fixation =
          load_fixation_map(resolve_path(manifest.base_dir, entry.fixation_map_path));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace

TrainingLog train_saliency(SaliencyModel& model, const DatasetManifest& manifest,
                           const LossConfig& loss_config, int epochs, double lr,
                           std::uint64_t seed) {
  loss_config.validate();
  if (epochs < 1) throw ArgumentError("train_saliency: epochs must be at least 1");
  if (!(lr > 0.0)) throw ArgumentError("train_saliency: learning rate must be positive");

  const bool need_fixation = loss_config.nss_enabled && loss_config.w_nss > 0.0;
  std::vector<Sample> samples = load_samples(manifest, model.config().seq_len, need_fixation);

  std::vector<Tensor> params;
  for (auto& [name, p] : model.named_parameters()) {
    (void)name;
    params.push_back(p);
  }

  Rng rng(seed);
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainingLog log;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    rng.shuffle(order);
    EpochRecord record;
    for (const int i : order) {
      const Sample& sample = samples[static_cast<std::size_t>(i)];
      const Tensor predicted = normalize_map(model.predict(sample.frames), NormMode::SumToOne);
      const Tensor* fixation = sample.fixation.defined() ? &sample.fixation : nullptr;
      const LossBreakdown loss =
          combined_loss_breakdown(sample.target_sum, predicted, fixation, loss_config);
      const double value = loss.total.scalar_value();
      if (!std::isfinite(value)) {
        throw NumericError("training loss diverged on sequence '" + sample.id + "'");
      }
      record.total += value;
      record.kl += loss.kl;
      record.cc += loss.cc;
      record.nss += loss.nss;

      for (Tensor& p : params) p.zero_grad();
      loss.total.backward();
      for (Tensor& p : params) p.sgd_step(lr);
    }
    const double n = static_cast<double>(samples.size());
    record.total /= n;
    record.kl /= n;
    record.cc /= n;
    record.nss /= n;
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.epochs.push_back(record);
  }
  return log;
}

EvalSummary evaluate_saliency(const SaliencyModel& model, const DatasetManifest& manifest,
                              double epsilon) {
  if (manifest.entries.empty()) throw ArgumentError("manifest has no entries");
  bool all_fixations = true;
  for (const ManifestEntry& entry : manifest.entries) all_fixations &= entry.has_fixation();

  EvalSummary summary;
  summary.has_nss = all_fixations;
  for (const ManifestEntry& entry : manifest.entries) {
    std::vector<Tensor> frames;
    for (const std::string& p : entry.frame_paths) {
      frames.push_back(load_rgb_image(resolve_path(manifest.base_dir, p)));
    }
    const Tensor predicted = model.predict(frames);
    const Tensor target = load_gray_map(resolve_path(manifest.base_dir, entry.saliency_map_path));

    summary.cc += pearson_cc(predicted.data(), target.data());
    const std::vector<double> p_sum = normalize_map(predicted, NormMode::SumToOne).data();
    const std::vector<double> t_sum = normalize_map(target, NormMode::SumToOne).data();
    summary.kld += kld(t_sum, p_sum, epsilon);
    if (all_fixations) {
      const Tensor fixation =
          load_fixation_map(resolve_path(manifest.base_dir, entry.fixation_map_path));
      summary.nss += nss_metric(predicted.data(), fixation.data());
    }
    ++summary.samples;
  }
  summary.cc /= summary.samples;
  summary.kld /= summary.samples;
  if (all_fixations) summary.nss /= summary.samples;
  return summary;
}

std::vector<std::pair<Tensor, int>> build_decision_dataset(const SaliencyModel& model,
                                                           const DatasetManifest& manifest) {
  if (manifest.entries.empty()) throw ArgumentError("manifest has no entries");
  std::vector<std::pair<Tensor, int>> dataset;
  dataset.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    if (!entry.brake_label.has_value()) {
      throw DataError("sequence '" + entry.sequence_id + "' has no brake label");
    }
    std::vector<Tensor> frames;
    for (const std::string& p : entry.frame_paths) {
      frames.push_back(load_rgb_image(resolve_path(manifest.base_dir, p)));
    }
    const Tensor predicted = model.predict(frames);
    // Detach, so decision training does not drag the saliency graph along.
    dataset.emplace_back(Tensor::from_data(predicted.shape(), predicted.data()),
                         *entry.brake_label);
  }
  return dataset;
}

}  // namespace drivesal
