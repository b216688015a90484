#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "drivesal/errors.hpp"
#include "drivesal/image_io.hpp"
#include "drivesal/synthetic.hpp"
#include "drivesal/trainer.hpp"
#include "temp_dir.hpp"

using namespace drivesal;
using testutil::TempDir;

namespace {

// 24x24 on purpose: the 3x3 feature grid breaks the cell symmetry that can
// leave a centered prior bank spatially constant at 2x2.
SynthConfig tiny_synth() {
  SynthConfig config;
  config.num_sequences = 4;
  config.seq_len = 2;
  config.height = 24;
  config.width = 24;
  config.train_frac = 1.0;
  config.val_frac = 0.0;
  config.small_radius_lo = 1.5;
  config.small_radius_hi = 2.0;
  config.large_radius_lo = 3.0;
  config.large_radius_hi = 4.0;
  config.label_radius = 2.5;
  return config;
}

ModelConfig tiny_model() {
  ModelConfig config;
  config.backbone.input_h = 24;
  config.backbone.input_w = 24;
  config.backbone.block_channels = {2, 2, 2, 2, 2};
  config.backbone.feature_channels = 2;
  config.attn_channels = 2;
  config.seq_len = 2;
  // Priors keep the initial prediction spatially varied; a bare tiny backbone
  // can emit a constant map, which the correlation loss rightly rejects.
  config.variant = {PriorKind::Gaussian, 16};
  return config;
}

// One generated dataset shared across the cases below; generation dominates
// the runtime of each individual test otherwise.
struct Fixture {
  TempDir dir{"trainer"};
  DatasetManifest manifest;
  Fixture() {
    const SynthPaths paths = gen_synthetic(tiny_synth(), dir.str("data"), 91);
    manifest = load_manifest(paths.train_manifest);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

LossConfig kl_cc_only() {
  LossConfig config;
  config.w_nss = 0.0;
  config.nss_enabled = false;
  return config;
}

}  // namespace

TEST_CASE("training records one finite entry per epoch") {
  SaliencyModel model(tiny_model(), 92);
  const TrainingLog log = train_saliency(model, fixture().manifest, kl_cc_only(), 2, 1e-3, 93);

  REQUIRE(log.epochs.size() == 2);
  for (const EpochRecord& r : log.epochs) {
    CHECK(std::isfinite(r.total));
    CHECK(std::isfinite(r.kl));
    CHECK(std::isfinite(r.cc));
    CHECK(r.kl > 0.0);
    CHECK(r.nss == 0.0);  // disabled term stays silent
    CHECK(r.seconds >= 0.0);
    CHECK(r.total == doctest::Approx(r.kl + r.cc).epsilon(1e-12));
  }
}

TEST_CASE("training is bitwise deterministic per seed") {
  auto run = [&] {
    SaliencyModel model(tiny_model(), 94);
    const TrainingLog log = train_saliency(model, fixture().manifest, kl_cc_only(), 2, 1e-3, 95);
    std::vector<double> out;
    for (const EpochRecord& r : log.epochs) out.push_back(r.total);
    for (const auto& [name, p] : model.named_parameters()) {
      (void)name;
      out.insert(out.end(), p.data().begin(), p.data().end());
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("nss training demands fixation maps") {
  DatasetManifest stripped = fixture().manifest;
  stripped.entries[0].fixation_map_path.clear();

  SaliencyModel model(tiny_model(), 96);
  LossConfig with_nss;  // all three terms on
  CHECK_THROWS_AS(train_saliency(model, stripped, with_nss, 1, 1e-3, 97), ConfigError);
  // Disabling the term makes the same manifest usable again.
  CHECK_NOTHROW(train_saliency(model, stripped, kl_cc_only(), 1, 1e-3, 97));
}

TEST_CASE("training rejects bad arguments") {
  SaliencyModel model(tiny_model(), 98);
  CHECK_THROWS_AS(train_saliency(model, fixture().manifest, kl_cc_only(), 0, 1e-3, 99),
                  ArgumentError);
  CHECK_THROWS_AS(train_saliency(model, fixture().manifest, kl_cc_only(), 1, 0.0, 99),
                  ArgumentError);
  CHECK_THROWS_AS(train_saliency(model, DatasetManifest{}, kl_cc_only(), 1, 1e-3, 99),
                  ArgumentError);

  DatasetManifest padded = fixture().manifest;
  auto& paths = padded.entries[0].frame_paths;
  paths.push_back(paths.back());
  CHECK_THROWS_WITH_AS(train_saliency(model, padded, kl_cc_only(), 1, 1e-3, 99),
                       doctest::Contains("expected 1 or seq_len"), DataError);
}

TEST_CASE("evaluation summarizes every sequence") {
  const SaliencyModel model(tiny_model(), 100);
  const EvalSummary summary = evaluate_saliency(model, fixture().manifest, 1e-7);

  CHECK(summary.samples == 4);
  CHECK(std::isfinite(summary.cc));
  CHECK(summary.cc >= -1.0);
  CHECK(summary.cc <= 1.0);
  CHECK(std::isfinite(summary.kld));
  CHECK(summary.kld > 0.0);
  CHECK(summary.has_nss);
  CHECK(std::isfinite(summary.nss));

  DatasetManifest stripped = fixture().manifest;
  stripped.entries[2].fixation_map_path.clear();
  const EvalSummary partial = evaluate_saliency(model, stripped, 1e-7);
  CHECK_FALSE(partial.has_nss);
  CHECK(partial.nss == 0.0);
  CHECK(partial.cc == summary.cc);

  CHECK_THROWS_AS(evaluate_saliency(model, DatasetManifest{}, 1e-7), ArgumentError);
}

TEST_CASE("decision dataset pairs detached maps with labels") {
  const SaliencyModel model(tiny_model(), 101);
  const auto dataset = build_decision_dataset(model, fixture().manifest);

  REQUIRE(dataset.size() == 4);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ManifestEntry& entry = fixture().manifest.entries[i];
    CHECK(dataset[i].first.shape() == std::vector<int>{24, 24, 1});
    CHECK_FALSE(dataset[i].first.requires_grad());
    CHECK(dataset[i].second == *entry.brake_label);

    std::vector<Tensor> frames;
    for (const std::string& p : entry.frame_paths) {
      frames.push_back(load_rgb_image(resolve_path(fixture().manifest.base_dir, p)));
    }
    CHECK(dataset[i].first.data() == model.predict(frames).data());
  }
}

TEST_CASE("decision dataset needs brake labels") {
  const SaliencyModel model(tiny_model(), 102);
  DatasetManifest unlabeled = fixture().manifest;
  unlabeled.entries[1].brake_label.reset();
  CHECK_THROWS_WITH_AS(build_decision_dataset(model, unlabeled),
                       doctest::Contains("no brake label"), DataError);
  CHECK_THROWS_AS(build_decision_dataset(model, DatasetManifest{}), ArgumentError);
}
