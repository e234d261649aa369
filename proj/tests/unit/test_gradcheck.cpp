#include <doctest.h>

#include <cmath>

#include "fingermi/autograd.hpp"
#include "fingermi/error.hpp"
#include "fingermi/gradcheck.hpp"
#include "fingermi/ops.hpp"
#include "gradient_suite.hpp"
#include "helpers.hpp"

using namespace fingermi;

TEST_CASE("gradcheck: sum of squares is exact to rounding") {
  Pcg32 rng(1);
  const double err = gradcheck([](Tape&, std::span<const Var> in) { return sum(mul(in[0], in[0])); },
                               {fingermi::testing::random_tensor({3, 4}, rng)});
  CHECK(err <= 1e-7);
}

TEST_CASE("gradcheck: a wrong backward rule is detected") {
  // Square with a backward rule that forgets the factor 2.
  auto bad_square = [](Var x) {
    Tensor out = x.value();
    for (auto& v : out.data()) v *= v;
    return x.tape().record("bad_square", std::move(out), {x}, [x](Tape& tape, std::span<const double> g) {
      auto dx = tape.grad_of(x);
      const auto xv = x.value().data();
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * xv[i];
    });
  };
  Pcg32 rng(2);
  const double err = gradcheck([&](Tape&, std::span<const Var> in) { return sum(bad_square(in[0])); },
                               {fingermi::testing::random_tensor({5}, rng, 0.5, 1.0)});
  CHECK(err > 1e-2);
}

TEST_CASE("gradcheck: conv2d + elu + avg_pool composite") {
  Pcg32 rng(3);
  const double err = gradcheck(
      [](Tape&, std::span<const Var> in) {
        return sum(avg_pool2d(elu(conv2d(in[0], in[1], in[2])), {1, 2}, {1, 2}));
      },
      {fingermi::testing::random_tensor({2, 2, 3, 8}, rng), fingermi::testing::random_tensor({3, 2, 2, 3}, rng),
       fingermi::testing::random_tensor({3}, rng)});
  CHECK(err <= 1e-4);
}

TEST_CASE("gradcheck: non-finite function values are an error") {
  CHECK_THROWS_AS(gradcheck(
                      [](Tape& tape, std::span<const Var> in) {
                        return sum(mul(in[0], tape.constant(Tensor({1}, 1e300))));
                      },
                      {Tensor({1}, 1e10)}),
                  NumericError);
}

TEST_CASE("every primitive matches finite differences over 100 seeds") {
  for (const auto& c : fingermi::testing::gradient_cases()) {
    SUBCASE(c.name.c_str()) {
      double worst = 0.0;
      std::uint64_t worst_seed = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double err = c.run(seed);
        if (err > worst) {
          worst = err;
          worst_seed = seed;
        }
      }
      INFO(c.name << " worst seed " << worst_seed);
      CHECK(worst <= 1e-4);
    }
  }
}
