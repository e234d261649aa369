#include <doctest.h>

#include <cmath>
#include <limits>

#include "fingermi/adam.hpp"
#include "fingermi/error.hpp"
#include "helpers.hpp"

using namespace fingermi;

TEST_CASE("first Adam step moves by lr in the gradient's sign") {
  std::vector<Tensor> params{Tensor({1}, 1.0)};
  AdamOptions opt;
  opt.lr = 0.1;
  AdamState s = adam_init(params, opt);
  const std::vector<std::vector<double>> grads{{1.0}};
  adam_step(s, params, grads);
  CHECK(params[0][0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(s.step == 1);
}

TEST_CASE("Adam updates are invariant to gradient scale") {
  Pcg32 rng(1);
  const Tensor init = fingermi::testing::random_tensor({6}, rng);
  std::vector<std::vector<double>> g_steps;
  for (int t = 0; t < 5; ++t) {
    std::vector<double> g(6);
    for (auto& v : g) v = rng.uniform(-1.0, 1.0);
    g_steps.push_back(g);
  }
  auto run = [&](double scale) {
    std::vector<Tensor> p{init};
    AdamState s = adam_init(p);
    for (const auto& g : g_steps) {
      std::vector<std::vector<double>> scaled{g};
      for (auto& v : scaled[0]) v *= scale;
      adam_step(s, p, scaled);
    }
    return p[0];
  };
  const Tensor a = run(1.0);
  const Tensor b = run(1000.0);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("Adam minimises w^2") {
  std::vector<Tensor> params{Tensor({1}, 3.0)};
  AdamOptions opt;
  opt.lr = 0.05;
  AdamState s = adam_init(params, opt);
  for (int t = 0; t < 2000; ++t) {
    const std::vector<std::vector<double>> g{{2.0 * params[0][0]}};
    adam_step(s, params, g);
  }
  CHECK(std::abs(params[0][0]) < 1e-2);
}

TEST_CASE("zero gradients leave parameters unchanged and v stays non-negative") {
  Pcg32 rng(2);
  std::vector<Tensor> params{fingermi::testing::random_tensor({4}, rng), fingermi::testing::random_tensor({2, 2}, rng)};
  const std::vector<Tensor> before = params;
  AdamState s = adam_init(params);
  const std::vector<std::vector<double>> zeros{std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
  adam_step(s, params, zeros);
  CHECK(params[0] == before[0]);
  CHECK(params[1] == before[1]);

  for (int t = 0; t < 20; ++t) {
    std::vector<std::vector<double>> g{std::vector<double>(4), std::vector<double>(4)};
    for (auto& row : g)
      for (auto& v : row) v = rng.uniform(-5.0, 5.0);
    adam_step(s, params, g);
    for (const auto& row : s.v)
      for (double v : row) CHECK(v >= 0.0);
  }
}

TEST_CASE("Adam uses tensor gradient buffers, treating missing ones as zero") {
  std::vector<Tensor> params{Tensor({2}, 1.0), Tensor({1}, 5.0)};
  params[0].zero_grad();
  params[0].grad()[0] = 1.0;
  params[0].grad()[1] = -1.0;
  AdamOptions opt;
  opt.lr = 0.1;
  AdamState s = adam_init(params, opt);
  adam_step(s, params);
  CHECK(params[0][0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(params[0][1] == doctest::Approx(1.1).epsilon(1e-7));
  CHECK(params[1][0] == 5.0);
}

TEST_CASE("Adam rejects bad options and gradients without touching parameters") {
  std::vector<Tensor> params{Tensor({2}, 1.0)};
  AdamOptions neg;
  neg.lr = -1.0;
  CHECK_THROWS_AS(adam_init(params, neg), ValueError);
  AdamOptions beta;
  beta.beta1 = 1.0;
  CHECK_THROWS_AS(adam_init(params, beta), ValueError);

  AdamState s = adam_init(params);
  const std::vector<std::vector<double>> bad{{0.5, std::numeric_limits<double>::quiet_NaN()}};
  CHECK_THROWS_AS(adam_step(s, params, bad), NumericError);
  CHECK(params[0][0] == 1.0);
  CHECK(s.step == 0);
  const std::vector<std::vector<double>> wrong{{0.5}};
  CHECK_THROWS_AS(adam_step(s, params, wrong), ShapeError);
}

TEST_CASE("lr = 0 is a no-op") {
  std::vector<Tensor> params{Tensor({3}, 2.0)};
  AdamOptions opt;
  opt.lr = 0.0;
  AdamState s = adam_init(params, opt);
  const std::vector<std::vector<double>> g{{1.0, -2.0, 3.0}};
  adam_step(s, params, g);
  CHECK(params[0] == Tensor({3}, 2.0));
}
