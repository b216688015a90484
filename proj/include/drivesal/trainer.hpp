#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "drivesal/decision.hpp"
#include "drivesal/losses.hpp"
#include "drivesal/manifest.hpp"
#include "drivesal/model.hpp"

namespace drivesal {

struct EpochRecord {
  double total = 0.0;  // mean combined loss over the epoch
  double kl = 0.0;     // mean unweighted term values, 0 when disabled
  double cc = 0.0;
  double nss = 0.0;
  double seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
};

// Batch-1 gradient descent over shuffled samples; maps are sum-normalized
// before the loss. Samples load once up front.
TrainingLog train_saliency(SaliencyModel& model, const DatasetManifest& manifest,
                           const LossConfig& loss_config, int epochs, double lr,
                           std::uint64_t seed);

struct EvalSummary {
  double cc = 0.0;
  double kld = 0.0;
  double nss = 0.0;
  bool has_nss = false;  // true only when every entry carries fixations
  int samples = 0;
};

EvalSummary evaluate_saliency(const SaliencyModel& model, const DatasetManifest& manifest,
                              double epsilon);

// Predicted map (detached from the model graph) plus brake label per entry.
std::vector<std::pair<Tensor, int>> build_decision_dataset(const SaliencyModel& model,
                                                           const DatasetManifest& manifest);

}  // namespace drivesal
