#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "unmix/rng.hpp"
#include "unmix/sparseness.hpp"

using namespace unmix;

namespace {

// Straight-line transcription of the S-measure definition, kept independent
// of the library implementation. Written against the published formula:
//   S = (f_max - (k4 - s1 k1^2 k2 + s2 k1 k3)) / (f_max - f_min)
double s_measure_oracle(const Vector& x, double s1) {
  const double s2 = (2.0 * s1 - 4.0) / 3.0;
  const double n = static_cast<double>(x.size());
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    k1 += std::abs(x[i]);
    k2 += std::pow(x[i], 2.0);
    k3 += std::pow(std::abs(x[i]), 3.0);
    k4 += std::pow(x[i], 4.0);
  }
  const double fmax = ((1.0 / std::pow(n, 3.0)) - (s1 / n) + (s2 / std::pow(n, 2.0))) * std::pow(k1, 4.0);
  const double fmin = (1.0 - s1 + s2) * std::pow(k1, 4.0);
  return (fmax - (k4 - s1 * k1 * k1 * k2 + s2 * k1 * k3)) / (fmax - fmin);
}

Vector random_positive(Rng& rng, int n) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(0.05, 2.0);
  return x;
}

}  // namespace

TEST_CASE("s_measure endpoints: one-hot scores 1, uniform scores 0") {
  for (double s1 : {1.0, 2.0, 4.0}) {
    const SMeasureParams p{s1};
    for (int n : {2, 3, 5, 17, 50}) {
      Vector onehot = Vector::Zero(n);
      onehot[0] = 1.0;
      CHECK(std::abs(s_measure(onehot, p) - 1.0) <= 1e-12);
      CHECK(std::abs(s_measure(Vector::Ones(n), p)) <= 1e-12);
    }
  }
}

TEST_CASE("s_measure frozen value for x = (3, 1), sigma1 = 2") {
  Vector x(2);
  x << 3.0, 1.0;
  // Value 0.4375 computed with the straight-line oracle before the library
  // existed; both routes must agree to 1e-12.
  CHECK(std::abs(s_measure(x, SMeasureParams{2.0}) - 0.4375) <= 1e-12);
  CHECK(std::abs(s_measure(x, SMeasureParams{2.0}) - s_measure_oracle(x, 2.0)) <= 1e-12);
}

TEST_CASE("s_measure matches the transcription oracle on random vectors") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(9));
    const double s1 = std::vector<double>{1.0, 2.0, 4.0}[rng.below(3)];
    const Vector x = random_positive(rng, n);
    const double got = s_measure(x, SMeasureParams{s1});
    CHECK(std::abs(got - s_measure_oracle(x, s1)) <= 1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("s_measure monotone spot-check for n = 2") {
  const SMeasureParams p{2.0};
  Vector a(2), b(2), c(2);
  a << 1.0, 0.0;
  b << 0.9, 0.1;
  c << 0.5, 0.5;
  CHECK(s_measure(a, p) > s_measure(b, p));
  CHECK(s_measure(b, p) > s_measure(c, p));
}

TEST_CASE("s_measure is scale invariant") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(9));
    const double s1 = std::vector<double>{1.0, 2.0, 4.0}[rng.below(3)];
    const Vector x = random_positive(rng, n);
    const double c = rng.uniform(1e-3, 1e3);
    const SMeasureParams p{s1};
    CHECK(std::abs(s_measure(Vector(c * x), p) - s_measure(x, p)) <= 1e-12);
  }
}

TEST_CASE("s_measure rejects degenerate and undersized input") {
  const SMeasureParams p{2.0};
  CHECK_THROWS_AS(s_measure(Vector::Zero(3), p), NumericalError);
  CHECK_THROWS_AS(s_measure(Vector::Ones(1), p), ConfigError);
  Vector neg(2);
  neg << 1.0, -0.1;
  CHECK_THROWS_AS(s_measure(neg, p), ConfigError);
}

TEST_CASE("s_measure_gradient matches central finite differences") {
  Rng rng(31);
  int done = 0;
  while (done < 100) {
    const int n = 2 + static_cast<int>(rng.below(9));  // n in 2..10
    const double s1 = std::vector<double>{1.0, 2.0, 4.0}[rng.below(3)];
    const SMeasureParams p{s1};
    const Vector x = random_positive(rng, n);
    const Vector grad = s_measure_gradient(x, p);

    const double h = 1e-6 * x.maxCoeff();
    for (int i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (s_measure_oracle(xp, s1) - s_measure_oracle(xm, s1)) / (2.0 * h);
      if (std::abs(fd) > 1e-8)
        CHECK(std::abs(grad[i] - fd) / std::abs(fd) <= 1e-5);
      else
        CHECK(std::abs(grad[i] - fd) <= 1e-7);
    }
    ++done;
  }
}

TEST_CASE("s_measure_gradient scales inversely with the vector (0-homogeneity)") {
  Rng rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(6));
    const Vector x = random_positive(rng, n);
    const double c = rng.uniform(0.1, 10.0);
    const SMeasureParams p{2.0};
    const Vector g1 = s_measure_gradient(x, p);
    const Vector g2 = s_measure_gradient(Vector(c * x), p);
    CHECK((g2 - g1 / c).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, g1.cwiseAbs().maxCoeff()));
    // Euler relation for a degree-0 homogeneous function.
    CHECK(std::abs(x.dot(g1)) <= 1e-10);
  }
}

TEST_CASE("sparseness_cost endpoint columns") {
  const SMeasureParams p{2.0};
  CHECK(sparseness_cost(Matrix(Matrix::Identity(4, 4)), p) == Catch::Approx(1.0).margin(1e-12));
  CHECK(sparseness_cost(Matrix(Matrix::Ones(4, 6)), p) == Catch::Approx(0.0).margin(1e-12));

  Matrix mixed(2, 2);
  mixed << 1.0, 0.5, 0.0, 0.5;  // one one-hot column, one uniform column
  CHECK(sparseness_cost(mixed, p) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("sparseness_cost ignores all-zero columns") {
  const SMeasureParams p{2.0};
  Matrix h(3, 2);
  h.col(0) << 1.0, 0.0, 0.0;
  h.col(1).setZero();
  CHECK(sparseness_cost(h, p) == Catch::Approx(0.5).margin(1e-12));
  const Matrix g = sparseness_cost_gradient(h, p);
  CHECK(g.col(1).isZero(0.0));
}

TEST_CASE("sparseness_cost_gradient per-column composition") {
  const SMeasureParams p{2.0};
  Rng rng(41);
  Vector x = random_positive(rng, 3);

  Matrix single(3, 1);
  single.col(0) = x;
  CHECK((sparseness_cost_gradient(single, p).col(0) - s_measure_gradient(x, p))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);

  Matrix twin(3, 2);
  twin.col(0) = x;
  twin.col(1) = x;
  const Matrix g = sparseness_cost_gradient(twin, p);
  CHECK((g.col(0) - g.col(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.col(0) - 0.5 * s_measure_gradient(x, p)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("sparseness_cost_gradient matches finite differences of the cost") {
  Rng rng(47);
  for (int trial = 0; trial < 40; ++trial) {
    const int P = 2 + static_cast<int>(rng.below(3));
    const int M = 1 + static_cast<int>(rng.below(5));
    Matrix H(P, M);
    for (int c = 0; c < M; ++c)
      for (int r = 0; r < P; ++r) H(r, c) = rng.uniform(0.1, 2.0);
    const SMeasureParams p{2.0};
    const Matrix grad = sparseness_cost_gradient(H, p);
    const double h = 1e-6 * H.maxCoeff();
    for (int c = 0; c < M; ++c) {
      for (int r = 0; r < P; ++r) {
        Matrix Hp = H, Hm = H;
        Hp(r, c) += h;
        Hm(r, c) -= h;
        const double fd = (sparseness_cost(Hp, p) - sparseness_cost(Hm, p)) / (2.0 * h);
        if (std::abs(fd) > 1e-8)
          CHECK(std::abs(grad(r, c) - fd) / std::abs(fd) <= 1e-5);
        else
          CHECK(std::abs(grad(r, c) - fd) <= 1e-7);
      }
    }
  }
}
