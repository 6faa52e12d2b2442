#include <cmath>
#include <vector>

#include "doctest.h"
#include "med/adadelta.hpp"
#include "med/tensor.hpp"

using namespace med::nn;

TEST_CASE("global norm and clip factor") {
  Tensor a = Tensor::vector(2);
  a[0] = 3.0;
  a[1] = 4.0;  // norm 5
  CHECK(global_norm({&a}) == doctest::Approx(5.0));
  Tensor b = Tensor::vector(1);
  b[0] = 12.0;  // combined norm 13
  CHECK(global_norm({&a, &b}) == doctest::Approx(13.0));
  CHECK(global_norm({&a, nullptr}) == doctest::Approx(5.0));
  CHECK(clip_global_norm({&a}, 10.0) == doctest::Approx(1.0));
  CHECK(clip_global_norm({&a}, 1.0) == doctest::Approx(0.2));
  CHECK(clip_global_norm({&a}, 0.0) == doctest::Approx(1.0));  // disabled
}

TEST_CASE("gradient with norm 10 against threshold 1 is rescaled by 0.1") {
  Tensor g = Tensor::vector(2);
  g[0] = 6.0;
  g[1] = 8.0;  // norm 10
  CHECK(clip_global_norm({&g}, 1.0) == doctest::Approx(0.1));
}

TEST_CASE("zero gradient leaves parameters, decays accumulators") {
  Tensor p = Tensor::vector(2);
  p[0] = 1.0;
  p[1] = -2.0;
  Adadelta opt({&p});
  Tensor g = Tensor::vector(2);
  g[0] = 1.0;
  g[1] = 1.0;
  opt.step({&g}, 0.0);
  double acc_after_one = opt.acc_grad()[0][0];
  CHECK(acc_after_one > 0.0);
  Tensor p_before = p;
  Tensor zg = Tensor::vector(2);
  opt.step({&zg}, 0.0);
  CHECK(p[0] == p_before[0]);
  CHECK(p[1] == p_before[1]);
  CHECK(opt.acc_grad()[0][0] == doctest::Approx(0.95 * acc_after_one));

  // a null gradient entry behaves the same way
  Tensor p2 = Tensor::vector(1);
  p2[0] = 5.0;
  Adadelta opt2({&p2});
  opt2.step({nullptr}, 1.0);
  CHECK(p2[0] == 5.0);
}

TEST_CASE("first step matches the closed form") {
  const double rho = 0.95, eps = 1e-6;
  Tensor p = Tensor::vector(2);
  p[0] = 0.3;
  p[1] = -0.7;
  Adadelta opt({&p}, {rho, eps});
  Tensor g = Tensor::vector(2);
  g[0] = 0.25;
  g[1] = -0.5;
  opt.step({&g}, 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    double delta = -std::sqrt(eps) /
                   std::sqrt((1 - rho) * g[i] * g[i] + eps) * g[i];
    double expected = (i == 0 ? 0.3 : -0.7) + delta;
    CHECK(p[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("clipping is applied before the update") {
  const double rho = 0.95, eps = 1e-6;
  Tensor p1 = Tensor::vector(1);
  Tensor p2 = Tensor::vector(1);
  Adadelta a({&p1}, {rho, eps});
  Adadelta b({&p2}, {rho, eps});
  Tensor big = Tensor::vector(1);
  big[0] = 10.0;
  a.step({&big}, 1.0);  // factor 0.1
  Tensor small = Tensor::vector(1);
  small[0] = 1.0;
  b.step({&small}, 0.0);  // same effective gradient
  CHECK(p1[0] == doctest::Approx(p2[0]).epsilon(1e-12));
}

TEST_CASE("constructor and step validate their inputs") {
  Tensor p = Tensor::vector(2);
  CHECK_THROWS(Adadelta({&p}, {1.0, 1e-6}));   // rho must be < 1
  CHECK_THROWS(Adadelta({&p}, {0.95, 0.0}));   // eps must be > 0
  CHECK_THROWS(Adadelta({nullptr}));
  Adadelta opt({&p});
  Tensor wrong = Tensor::vector(3);
  CHECK_THROWS(opt.step({&wrong}, 0.0));
  CHECK_THROWS(opt.step({}, 0.0));
}

TEST_CASE("repeated steps shrink a quadratic objective") {
  Tensor p = Tensor::vector(1);
  p[0] = 2.0;
  Adadelta opt({&p});
  for (int i = 0; i < 500; ++i) {
    Tensor g = Tensor::vector(1);
    g[0] = 2.0 * p[0];  // d/dp of p^2
    opt.step({&g}, 1.0);
  }
  CHECK(std::abs(p[0]) < 0.5);
}
