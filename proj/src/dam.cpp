#include "drivesal/dam.hpp"

#include <map>

#include "drivesal/init.hpp"
#include "drivesal/rng.hpp"

namespace drivesal {

Tensor attn_weights(const std::vector<Tensor>& scores) {
  if (scores.empty()) throw ArgumentError("attn_weights needs at least one score");
  return softmax(stack_scalars(scores));
}

Tensor attention_context(const Tensor& alpha, const std::vector<Tensor>& hs) {
  if (alpha.shape().size() != 1 || alpha.size() != hs.size())
    throw DimensionError("attention weights and hidden list lengths differ");
  for (const Tensor& h : hs)
    if (h.shape() != hs.front().shape())
      throw DimensionError("hidden maps must share a shape");
  Tensor acc = mul(index1d(alpha, 0), hs[0]);
  for (std::size_t i = 1; i < hs.size(); ++i)
    acc = add(acc, mul(index1d(alpha, static_cast<int>(i)), hs[i]));
  return acc;
}

Dam::Dam(int channels, int attn_channels, std::uint64_t seed)
    : channels_(channels), attn_channels_(attn_channels) {
  if (channels < 1 || attn_channels < 1)
    throw ConfigError("dam channel counts must be >= 1");
  Rng rng(seed);
  const int zc = 2 * channels;  // concat([x, h]) channel count
  const std::size_t gate_fan = static_cast<std::size_t>(9) * zc;
  wi_ = he_tensor({3, 3, zc, channels}, gate_fan, rng);
  wf_ = he_tensor({3, 3, zc, channels}, gate_fan, rng);
  wg_ = he_tensor({3, 3, zc, channels}, gate_fan, rng);
  wo_ = he_tensor({3, 3, zc, channels}, gate_fan, rng);
  bi_ = Tensor::zeros({channels}, true);
  bf_ = Tensor::full({channels}, 1.0, true);
  bg_ = Tensor::zeros({channels}, true);
  bo_ = Tensor::zeros({channels}, true);
  w_attn_ = he_tensor({1, 1, zc, attn_channels}, static_cast<std::size_t>(zc), rng);
  v_attn_ = he_tensor({1, 1, attn_channels, 1}, static_cast<std::size_t>(attn_channels), rng);
}

ConvLstmState Dam::initial_state(int hf, int wf) const {
  return {Tensor::zeros({hf, wf, channels_}), Tensor::zeros({hf, wf, channels_})};
}

ConvLstmState Dam::step(const ConvLstmState& state, const Tensor& x) const {
  if (x.shape().size() != 3 || x.dim(2) != channels_)
    throw DimensionError("convlstm input channels do not match");
  if (state.h.shape() != x.shape() || state.c.shape() != x.shape())
    throw DimensionError("convlstm state shape does not match the input");
  Tensor z = concat_channels({x, state.h});
  Tensor i = sigmoid(add_channel_bias(conv2d(z, wi_, 1, 1, Pad::Same), bi_));
  Tensor f = sigmoid(add_channel_bias(conv2d(z, wf_, 1, 1, Pad::Same), bf_));
  Tensor g = tanh(add_channel_bias(conv2d(z, wg_, 1, 1, Pad::Same), bg_));
  Tensor o = sigmoid(add_channel_bias(conv2d(z, wo_, 1, 1, Pad::Same), bo_));
  Tensor c = add(mul(f, state.c), mul(i, g));
  return {mul(o, tanh(c)), c};
}

Tensor Dam::score(const Tensor& query, const Tensor& h) const {
  if (query.shape() != h.shape())
    throw DimensionError("attention query and hidden map are misaligned");
  Tensor z = concat_channels({query, h});
  Tensor a = tanh(conv2d(z, w_attn_, 1, 1, Pad::Same));
  return mean(conv2d(a, v_attn_, 1, 1, Pad::Same));
}

DamOutput Dam::run(const std::vector<Tensor>& frames) const {
  if (frames.empty()) throw ArgumentError("dam needs at least one frame");
  const ConvLstmState fresh = initial_state(frames[0].dim(0), frames[0].dim(1));

  // Carried pass; its final hidden map is the attention query.
  ConvLstmState state = fresh;
  Tensor first_h;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    state = step(state, frames[i]);
    if (i == 0) first_h = state.h;
  }
  const Tensor query = state.h;

  // Per-frame encodings, each one step from the fresh state (the carried
  // pass's first step doubles as frame 0's). Repeated frame nodes share one
  // encoding, keeping attention exactly symmetric under frame repetition.
  DamOutput out;
  out.hidden.reserve(frames.size());
  std::map<const detail::Node*, Tensor> encoded{{frames[0].handle().get(), first_h}};
  for (const Tensor& x : frames) {
    auto it = encoded.find(x.handle().get());
    if (it == encoded.end()) it = encoded.emplace(x.handle().get(), step(fresh, x).h).first;
    out.hidden.push_back(it->second);
  }

  std::map<const detail::Node*, Tensor> scored;
  std::vector<Tensor> scores;
  scores.reserve(out.hidden.size());
  for (const Tensor& h : out.hidden) {
    auto it = scored.find(h.handle().get());
    if (it == scored.end()) it = scored.emplace(h.handle().get(), score(query, h)).first;
    scores.push_back(it->second);
  }
  out.alpha = attn_weights(scores);
  out.context = attention_context(out.alpha, out.hidden);
  return out;
}

std::vector<std::pair<std::string, Tensor>> Dam::named_parameters() const {
  return {{"dam.wi", wi_},       {"dam.wf", wf_},     {"dam.wg", wg_},
          {"dam.wo", wo_},       {"dam.bi", bi_},     {"dam.bf", bf_},
          {"dam.bg", bg_},       {"dam.bo", bo_},     {"dam.w_attn", w_attn_},
          {"dam.v_attn", v_attn_}};
}

}  // namespace drivesal
