#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drivesal/tensor.hpp"

namespace drivesal {

struct ConvLstmState {
  Tensor h;
  Tensor c;
};

struct DamOutput {
  Tensor context;              // [Hf,Wf,Ch], attention-weighted sum of hiddens
  Tensor alpha;                // [n], simplex weights
  std::vector<Tensor> hidden;  // per-frame hidden encodings h_1 .. h_n
};

// Softmax over per-step scalar scores; n >= 1.
Tensor attn_weights(const std::vector<Tensor>& scores);

// c = sum_i alpha[i] * hs[i]; lengths must agree.
Tensor attention_context(const Tensor& alpha, const std::vector<Tensor>& hs);

// ConvLSTM over a feature-map sequence with additive attention across
// per-frame hidden encodings. The query is the final state of the carried
// (sequential) pass; the attended keys and values are one-step encodings of
// each frame from the fresh state, so identical frames score identically and
// a repeated still image yields the same output at any sequence length.
class Dam {
 public:
  Dam(int channels, int attn_channels, std::uint64_t seed);

  ConvLstmState initial_state(int hf, int wf) const;
  ConvLstmState step(const ConvLstmState& state, const Tensor& x) const;

  // score(q, h) = spatial mean of v_a . tanh(W_a [q; h]) via 1x1 convs.
  Tensor score(const Tensor& query, const Tensor& h) const;

  DamOutput run(const std::vector<Tensor>& frames) const;

  int channels() const { return channels_; }
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;

 private:
  int channels_ = 0;
  int attn_channels_ = 0;
  Tensor wi_, wf_, wg_, wo_;  // gate kernels [3,3,2C,C]
  Tensor bi_, bf_, bg_, bo_;  // gate biases [C]; forget bias starts at +1
  Tensor w_attn_;             // [1,1,2C,A]
  Tensor v_attn_;             // [1,1,A,1]
};

}  // namespace drivesal
