#include <doctest.h>

#include <cmath>

#include "drivesal/gradcheck.hpp"
#include "drivesal/losses.hpp"
#include "drivesal/rng.hpp"

using namespace drivesal;

namespace {

Tensor normalized(std::vector<double> v, bool requires_grad = false) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
  const int n = static_cast<int>(v.size());
  return Tensor::from_data({n}, std::move(v), requires_grad);
}

}  // namespace

TEST_SUITE("losses.kl") {
  TEST_CASE("identical maps are epsilon-close to zero") {
    Tensor p = normalized({0.1, 0.5, 0.2, 0.2});
    CHECK(std::abs(kl_loss(p, p, 1e-7).scalar_value()) <= 1e-5);
  }

  TEST_CASE("half-mass case matches the hand value") {
    Tensor t = Tensor::from_data({4}, {0.5, 0.5, 0.0, 0.0});
    Tensor p = Tensor::from_data({4}, {0.25, 0.25, 0.25, 0.25});
    CHECK(kl_loss(t, p, 1e-7).scalar_value() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-4));
  }

  TEST_CASE("mass over a vanishing prediction diverges monotonically") {
    double prev = -1.0;
    for (double q : {0.25, 0.1, 0.01, 1e-4}) {
      Tensor t = Tensor::from_data({2}, {1.0, 0.0});
      Tensor p = Tensor::from_data({2}, {q, 1.0 - q});
      const double v = kl_loss(t, p, 1e-7).scalar_value();
      CHECK(v > prev);
      prev = v;
    }
    CHECK(prev > 5.0);
  }

  TEST_CASE("asymmetry is observable") {
    Tensor a = Tensor::from_data({2}, {0.7, 0.3});
    Tensor b = Tensor::from_data({2}, {0.5, 0.5});
    CHECK(kl_loss(a, b, 1e-7).scalar_value() !=
          doctest::Approx(kl_loss(b, a, 1e-7).scalar_value()).epsilon(1e-6));
  }

  TEST_CASE("contract violations are rejected") {
    Tensor p = normalized({1, 2, 3});
    CHECK_THROWS_AS(kl_loss(p, normalized({1, 1}), 1e-7), DimensionError);
    CHECK_THROWS_AS(kl_loss(p, Tensor::from_data({3}, {0.5, 0.4, 0.4}), 1e-7),
                    ArgumentError);
    CHECK_THROWS_AS(kl_loss(Tensor::from_data({3}, {2.0, 0.0, 0.0}), p, 1e-7),
                    ArgumentError);
    CHECK_THROWS_AS(kl_loss(p, p, 0.0), ConfigError);
  }

  TEST_CASE("gradient w.r.t. the prediction passes finite differences") {
    // point chosen so no coordinate gradient sits near zero, where the
    // relative-error criterion would amplify finite-difference noise
    Tensor t = Tensor::from_data({4}, {0.4, 0.1, 0.3, 0.2});
    Tensor raw = Tensor::from_data({4}, {0.2, 0.5, 0.2, 0.1}, true);
    // normalize inside the graph so perturbed rebuilds stay on the simplex
    auto build = [&] { return kl_loss(t, div(raw, sum(raw)), 1e-7); };
    CHECK(grad_check(build, {raw}, 1e-5) <= 1e-4);
  }
}

TEST_SUITE("losses.cc") {
  TEST_CASE("equal and affine-related maps give zero loss") {
    Tensor t = Tensor::from_data({4}, {1, 2, 3, 4});
    CHECK(cc_loss(t, t).scalar_value() == doctest::Approx(0.0).epsilon(1e-12));
    Tensor affine = Tensor::from_data({4}, {1.5, 4.0, 6.5, 9.0});  // 2.5 t - 1
    CHECK(cc_loss(t, affine).scalar_value() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cc_loss(t, neg(t)).scalar_value() == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("uncorrelated hand case gives loss one") {
    Tensor t = Tensor::from_data({4}, {1, 2, 3, 4});
    Tensor p = Tensor::from_data({4}, {1, 2, 2, 1});
    // brute-force r from covariance sums
    const double mt = 2.5, mp = 1.5;
    double cov = 0;
    for (int i = 0; i < 4; ++i) cov += (t.at(i) - mt) * (p.at(i) - mp);
    CHECK(cov == 0.0);
    CHECK(cc_loss(t, p).scalar_value() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("loss stays inside [0, 1] on random maps") {
    Rng rng(3);
    for (int it = 0; it < 25; ++it) {
      std::vector<double> a(12), b(12);
      for (double& v : a) v = rng.uniform(-2.0, 2.0);
      for (double& v : b) v = rng.uniform(-2.0, 2.0);
      const double v = cc_loss(Tensor::from_data({12}, a), Tensor::from_data({12}, b))
                           .scalar_value();
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("constant maps are degenerate") {
    Tensor t = Tensor::from_data({4}, {1, 2, 3, 4});
    CHECK_THROWS_AS(cc_loss(t, Tensor::full({4}, 0.7)), DegenerateInputError);
    CHECK_THROWS_AS(cc_loss(Tensor::full({4}, 0.7), t), DegenerateInputError);
    CHECK_THROWS_AS(cc_loss(t, Tensor::zeros({3})), DimensionError);
  }

  TEST_CASE("gradient passes finite differences") {
    Tensor t = Tensor::from_data({5}, {0.1, 0.9, 0.4, 0.2, 0.7});
    Tensor p = Tensor::from_data({5}, {0.3, 0.5, 0.8, 0.1, 0.6}, true);
    auto build = [&] { return cc_loss(t, p); };
    CHECK(grad_check(build, {p}, 1e-5) <= 1e-4);
  }
}

TEST_SUITE("losses.nss") {
  TEST_CASE("fixation one sigma above the mean scores one") {
    Tensor pred = Tensor::from_data({2}, {0.0, 2.0});  // mu 1, sigma 1
    Tensor fix = Tensor::from_data({2}, {0.0, 1.0});
    CHECK(nss(pred, fix).scalar_value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nss_loss(pred, fix).scalar_value() == doctest::Approx(-1.0).epsilon(1e-12));
  }

  TEST_CASE("fixating everywhere averages to zero") {
    Tensor pred = Tensor::from_data({4}, {0.4, 1.2, 0.9, 0.1});
    Tensor fix = Tensor::full({4}, 1.0);
    CHECK(std::abs(nss(pred, fix).scalar_value()) <= 1e-9);
  }

  TEST_CASE("fixating the maximum of a varying map is positive") {
    Tensor pred = Tensor::from_data({4}, {0.4, 1.2, 0.9, 0.1});
    Tensor fix = Tensor::from_data({4}, {0.0, 1.0, 0.0, 0.0});
    CHECK(nss(pred, fix).scalar_value() > 0.0);
  }

  TEST_CASE("invariant under positive affine transforms") {
    Tensor pred = Tensor::from_data({5}, {0.3, 0.5, 0.8, 0.1, 0.6});
    Tensor scaled = Tensor::from_data({5}, {1.6, 2.0, 2.6, 1.2, 2.2});  // 2 pred + 1
    Tensor fix = Tensor::from_data({5}, {1.0, 0.0, 1.0, 0.0, 0.0});
    CHECK(std::abs(nss(pred, fix).scalar_value() - nss(scaled, fix).scalar_value()) <=
          1e-9);
  }

  TEST_CASE("contract violations") {
    Tensor pred = Tensor::from_data({3}, {0.1, 0.2, 0.3});
    CHECK_THROWS_AS(nss(pred, Tensor::from_data({3}, {0.0, 0.5, 1.0})), ArgumentError);
    CHECK_THROWS_AS(nss(pred, Tensor::zeros({3})), ArgumentError);
    CHECK_THROWS_AS(nss(Tensor::full({3}, 0.2), Tensor::from_data({3}, {1, 0, 0})),
                    DegenerateInputError);
  }

  TEST_CASE("descending the loss raises the metric") {
    Tensor pred = Tensor::from_data({4}, {0.5, 0.1, 0.9, 0.3}, true);
    Tensor fix = Tensor::from_data({4}, {1.0, 0.0, 0.0, 0.0});
    const double before = nss(pred, fix).scalar_value();
    for (int step = 0; step < 100; ++step) {
      Tensor loss = nss_loss(pred, fix);
      pred.zero_grad();
      loss.backward();
      pred.sgd_step(0.05);
    }
    CHECK(nss(pred, fix).scalar_value() > before);
  }

  TEST_CASE("gradient passes finite differences") {
    Tensor p = Tensor::from_data({5}, {0.3, 0.5, 0.8, 0.1, 0.6}, true);
    Tensor fix = Tensor::from_data({5}, {1.0, 0.0, 0.0, 1.0, 0.0});
    auto build = [&] { return nss_loss(p, fix); };
    CHECK(grad_check(build, {p}, 1e-5) <= 1e-4);
  }
}

TEST_SUITE("losses.bce") {
  TEST_CASE("frozen reference values") {
    CHECK(bce_loss({1.0}, Tensor::from_data({1}, {0.5})).scalar_value() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss({1.0, 0.0}, Tensor::from_data({2}, {0.9, 0.1})).scalar_value() ==
          doctest::Approx(0.10536051565782628).epsilon(1e-12));
  }

  TEST_CASE("perfect predictions cost at most the clamp") {
    CHECK(bce_loss({1.0, 0.0}, Tensor::from_data({2}, {1.0, 0.0})).scalar_value() <= 1e-6);
  }

  TEST_CASE("contract violations") {
    CHECK_THROWS_AS(bce_loss({}, Tensor::zeros({1})), ArgumentError);
    CHECK_THROWS_AS(bce_loss({0.5}, Tensor::from_data({1}, {0.5})), ArgumentError);
    CHECK_THROWS_AS(bce_loss({1.0, 0.0}, Tensor::from_data({1}, {0.5})), DimensionError);
  }

  TEST_CASE("gradient passes finite differences") {
    Tensor p = Tensor::from_data({3}, {0.2, 0.7, 0.55}, true);
    auto build = [&] { return bce_loss({1.0, 0.0, 1.0}, p); };
    CHECK(grad_check(build, {p}, 1e-6) <= 1e-4);
  }
}

TEST_SUITE("losses.combined") {
  TEST_CASE("unit weights equal the sum of the three terms") {
    Tensor t = normalized({1, 2, 3, 4});
    Tensor p = normalized({4, 3, 2, 1});
    Tensor fix = Tensor::from_data({4}, {1.0, 0.0, 0.0, 1.0});
    LossConfig cfg;
    const double expect = kl_loss(t, p, cfg.epsilon).scalar_value() +
                          cc_loss(t, p).scalar_value() +
                          nss_loss(p, fix).scalar_value();
    CHECK(std::abs(combined_loss(t, p, &fix, cfg).scalar_value() - expect) <= 1e-12);
  }

  TEST_CASE("disabling terms removes exactly those terms") {
    Tensor t = normalized({1, 2, 3, 4});
    Tensor p = normalized({4, 3, 2, 1});
    Tensor fix = Tensor::from_data({4}, {1.0, 0.0, 0.0, 1.0});
    LossConfig only_kl;
    only_kl.w_cc = 0.0;
    only_kl.w_nss = 0.0;
    CHECK(combined_loss(t, p, &fix, only_kl).scalar_value() ==
          kl_loss(t, p, only_kl.epsilon).scalar_value());
    LossConfig no_nss;
    no_nss.nss_enabled = false;
    CHECK(std::abs(combined_loss(t, p, nullptr, no_nss).scalar_value() -
                   (kl_loss(t, p, no_nss.epsilon).scalar_value() +
                    cc_loss(t, p).scalar_value())) <= 1e-12);
  }

  TEST_CASE("identical maps and uniform fixations are near zero") {
    Tensor p = normalized({1, 2, 3, 4});
    Tensor fix = Tensor::full({4}, 1.0);
    CHECK(std::abs(combined_loss(p, p, &fix, LossConfig{}).scalar_value()) <= 1e-5);
  }

  TEST_CASE("configuration errors") {
    Tensor p = normalized({1, 2, 3, 4});
    LossConfig cfg;
    CHECK_THROWS_AS(combined_loss(p, p, nullptr, cfg), ArgumentError);
    LossConfig none;
    none.w_kl = none.w_cc = none.w_nss = 0.0;
    CHECK_THROWS_AS(combined_loss(p, p, nullptr, none), ConfigError);
    LossConfig bad;
    bad.w_cc = -1.0;
    CHECK_THROWS_AS(combined_loss(p, p, nullptr, bad), ConfigError);
    bad = LossConfig{};
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(combined_loss(p, p, nullptr, bad), ConfigError);
  }
}
