#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "drivesal/gradcheck.hpp"

using namespace drivesal;

namespace {

bool has_check(const std::vector<OpCheck>& checks, const std::string& name) {
  return std::any_of(checks.begin(), checks.end(),
                     [&](const OpCheck& c) { return c.name == name; });
}

}  // namespace

TEST_SUITE("gradcheck.suite") {
  TEST_CASE("every check passes on a fresh build") {
    const std::vector<OpCheck> checks = run_gradcheck_suite(2024);
    REQUIRE(!checks.empty());
    for (const OpCheck& c : checks) {
      INFO("op: ", c.name, " rel err ", c.max_rel_err, " tol ", c.tolerance);
      CHECK(c.pass);
      CHECK(std::isfinite(c.max_rel_err));
      CHECK(c.max_rel_err <= c.tolerance);
    }
  }

  TEST_CASE("the sweep covers the full operation set") {
    const std::vector<OpCheck> checks = run_gradcheck_suite(7);
    for (const char* name :
         {"add", "sub", "mul", "div", "tanh", "sigmoid", "softplus", "relu", "exp", "log",
          "sqrt", "clamp", "softmax", "sum", "mean", "reduce_max", "reshape", "index1d",
          "stack_scalars", "concat_channels", "conv2d same", "conv2d stride 2 valid",
          "conv2d dilation 2", "add_channel_bias", "maxpool 2x2", "maxpool stride 1 same",
          "avgpool 2x2", "upsample bilinear", "dense", "convlstm step", "attention score",
          "gaussian prior map", "rbf prior map", "kl_loss", "cc_loss", "nss_loss", "bce_loss",
          "combined_loss", "full dam"}) {
      INFO("missing op: ", name);
      CHECK(has_check(checks, name));
    }
  }

  TEST_CASE("results are deterministic per seed") {
    const auto a = run_gradcheck_suite(55);
    const auto b = run_gradcheck_suite(55);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      CHECK(a[i].max_rel_err == b[i].max_rel_err);
      CHECK(a[i].pass == b[i].pass);
    }
  }

  TEST_CASE("several seeds stay inside tolerance") {
    for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
      for (const OpCheck& c : run_gradcheck_suite(seed)) {
        INFO("seed ", seed, " op: ", c.name, " rel err ", c.max_rel_err);
        CHECK(c.pass);
      }
    }
  }
}
