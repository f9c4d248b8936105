#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unmix/metrics.hpp"
#include "unmix/rng.hpp"

using namespace unmix;

namespace {

// Exhaustive P! assignment oracle.
std::vector<int> brute_force_matching(const Matrix& s_true, const Matrix& s_est) {
  const int P = static_cast<int>(s_true.cols());
  std::vector<int> perm(static_cast<std::size_t>(P));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = 1e300;
  do {
    double cost = 0.0;
    for (int i = 0; i < P; ++i)
      cost += sad(s_est.col(i), s_true.col(perm[static_cast<std::size_t>(i)]));
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double matching_cost(const Matrix& s_true, const Matrix& s_est, const std::vector<int>& m) {
  double cost = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    cost += sad(s_est.col(static_cast<Eigen::Index>(i)), s_true.col(m[i]));
  return cost;
}

Matrix random_signatures(Rng& rng, int L, int P) {
  Matrix m(L, P);
  for (int j = 0; j < P; ++j)
    for (int i = 0; i < L; ++i) m(i, j) = rng.uniform(0.01, 1.0);
  return m;
}

}  // namespace

TEST_CASE("sad hand values") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  CHECK(sad(a, a) == 0.0);

  Vector e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(sad(e1, e2) == Catch::Approx(M_PI / 2));

  Vector d(2);
  d << 1, 1;
  CHECK(sad(d, e1) == Catch::Approx(M_PI / 4));
}

TEST_CASE("aad hand values") {
  Vector a(3);
  a << 0.2, 0.5, 0.3;
  CHECK(aad(a, a) == 0.0);

  Vector e1(3), e2(3);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  CHECK(aad(e1, e2) == Catch::Approx(M_PI / 2));

  Vector p(2), q(2);
  p << 0.6, 0.4;
  q << 0.5, 0.5;
  // acos(0.5 / (sqrt(0.52) * sqrt(0.5))), evaluated by hand
  CHECK(aad(p, q) == Catch::Approx(0.197395559849881).epsilon(1e-12));
}

TEST_CASE("sad and aad reject zero vectors and length mismatches") {
  Vector z = Vector::Zero(3);
  Vector a = Vector::Ones(3);
  CHECK_THROWS_AS(sad(z, a), NumericalError);
  CHECK_THROWS_AS(aad(a, z), NumericalError);
  Vector b = Vector::Ones(4);
  CHECK_THROWS_AS(sad(a, b), DimensionError);
}

TEST_CASE("sad is symmetric and scale invariant") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int L = 2 + static_cast<int>(rng.below(8));
    Vector a(L), b(L);
    for (int i = 0; i < L; ++i) {
      a[i] = rng.uniform(0.01, 1.0);
      b[i] = rng.uniform(0.01, 1.0);
    }
    const double s = sad(a, b);
    CHECK(s == sad(b, a));
    CHECK(std::abs(sad(Vector(3.7 * a), b) - s) <= 1e-12);
    CHECK(s >= 0.0);
    CHECK(s <= M_PI);
  }
}

TEST_CASE("match_endmembers identity and swap cases") {
  Rng rng(7);
  EndmemberMatrix t;
  t.signatures = random_signatures(rng, 10, 3);

  EndmemberMatrix same = t;
  CHECK(match_endmembers(t, same) == std::vector<int>{0, 1, 2});

  EndmemberMatrix swapped;
  swapped.signatures.resize(10, 3);
  swapped.signatures.col(0) = t.signatures.col(2);
  swapped.signatures.col(1) = t.signatures.col(0);
  swapped.signatures.col(2) = t.signatures.col(1);
  CHECK(match_endmembers(t, swapped) == std::vector<int>{2, 0, 1});
}

TEST_CASE("match_endmembers equals brute force for P up to 8") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int P = 2 + static_cast<int>(rng.below(7));  // 2..8
    const int L = 6 + static_cast<int>(rng.below(10));
    EndmemberMatrix t, e;
    t.signatures = random_signatures(rng, L, P);
    e.signatures = random_signatures(rng, L, P);
    const auto got = match_endmembers(t, e);
    const auto expect = brute_force_matching(t.signatures, e.signatures);
    // Optimal assignments can tie; compare costs, not permutations.
    CHECK(matching_cost(t.signatures, e.signatures, got) ==
          Catch::Approx(matching_cost(t.signatures, e.signatures, expect)).margin(1e-12));
    // And the result must be a bijection.
    std::vector<int> seen(static_cast<std::size_t>(P), 0);
    for (int j : got) seen[static_cast<std::size_t>(j)]++;
    for (int c : seen) CHECK(c == 1);
  }
}

TEST_CASE("match_endmembers rejects mismatched shapes") {
  EndmemberMatrix a, b;
  a.signatures = Matrix::Ones(5, 3);
  b.signatures = Matrix::Ones(5, 4);
  CHECK_THROWS_AS(match_endmembers(a, b), DimensionError);
  b.signatures = Matrix::Ones(6, 3);
  CHECK_THROWS_AS(match_endmembers(a, b), DimensionError);
}

TEST_CASE("evaluate on perfect recovery returns a zero report") {
  Rng rng(13);
  EndmemberMatrix t;
  t.signatures = random_signatures(rng, 12, 3);
  AbundanceMatrix a;
  a.fractions.resize(3, 20);
  for (int j = 0; j < 20; ++j) {
    double x = rng.uniform(), y = rng.uniform(), z = rng.uniform();
    const double s = x + y + z;
    a.fractions.col(j) << x / s, y / s, z / s;
  }
  a.normalized = true;
  const auto rep = evaluate(t, a, t, a);
  CHECK(rep.rms_sad == 0.0);
  CHECK(rep.rms_aad == 0.0);
  CHECK(rep.matching == std::vector<int>{0, 1, 2});
}

TEST_CASE("evaluate with a single endmember reduces rms_sad to that angle") {
  EndmemberMatrix t, e;
  t.signatures.resize(2, 1);
  t.signatures << 1, 0;
  e.signatures.resize(2, 1);
  e.signatures << 1, 1;
  AbundanceMatrix a;
  a.fractions = Matrix::Ones(1, 4);
  a.normalized = true;
  const auto rep = evaluate(t, a, e, a);
  CHECK(rep.rms_sad == Catch::Approx(M_PI / 4));
}

TEST_CASE("evaluate is invariant under a permutation of the estimate") {
  Rng rng(17);
  const int P = 4, M = 30, L = 15;
  EndmemberMatrix t, e;
  t.signatures = random_signatures(rng, L, P);
  e.signatures = random_signatures(rng, L, P);
  // Make the estimate close to the truth so the matching is meaningful.
  e.signatures = 0.9 * t.signatures + 0.1 * e.signatures;

  AbundanceMatrix at, ae;
  at.fractions.resize(P, M);
  ae.fractions.resize(P, M);
  for (int j = 0; j < M; ++j) {
    Vector v(P), w(P);
    for (int k = 0; k < P; ++k) {
      v[k] = rng.uniform(0.01, 1.0);
      w[k] = rng.uniform(0.01, 1.0);
    }
    at.fractions.col(j) = v / v.sum();
    ae.fractions.col(j) = w / w.sum();
  }
  at.normalized = ae.normalized = true;

  const auto base = evaluate(t, at, e, ae);

  std::vector<int> perm{2, 0, 3, 1};
  EndmemberMatrix ep;
  AbundanceMatrix aep;
  ep.signatures.resize(L, P);
  aep.fractions.resize(P, M);
  for (int k = 0; k < P; ++k) {
    ep.signatures.col(perm[static_cast<std::size_t>(k)]) = e.signatures.col(k);
    aep.fractions.row(perm[static_cast<std::size_t>(k)]) = ae.fractions.row(k);
  }
  aep.normalized = true;

  const auto permuted = evaluate(t, at, ep, aep);
  CHECK(permuted.rms_sad == Catch::Approx(base.rms_sad).margin(1e-14));
  CHECK(permuted.rms_aad == Catch::Approx(base.rms_aad).margin(1e-14));
  CHECK((permuted.per_endmember_sad - base.per_endmember_sad).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("evaluate excludes all-zero true abundance pixels and reports the count") {
  Rng rng(19);
  EndmemberMatrix t;
  t.signatures = random_signatures(rng, 8, 2);
  AbundanceMatrix at, ae;
  at.fractions.resize(2, 5);
  ae.fractions.resize(2, 5);
  for (int j = 0; j < 5; ++j) {
    at.fractions.col(j) << 0.4, 0.6;
    ae.fractions.col(j) << 0.5, 0.5;
  }
  at.fractions.col(2).setZero();  // background pixel
  at.normalized = true;
  const auto rep = evaluate(t, at, t, ae);
  CHECK(rep.excluded_pixels == 1);
  CHECK(std::isnan(rep.per_pixel_aad[2]));
  const double expected = aad(Vector(at.fractions.col(0)), Vector(ae.fractions.col(0)));
  CHECK(rep.rms_aad == Catch::Approx(expected));
}

TEST_CASE("evaluate composes rms values exactly as the mean of squares") {
  Rng rng(23);
  const int P = 3, M = 12, L = 9;
  EndmemberMatrix t, e;
  t.signatures = random_signatures(rng, L, P);
  e.signatures = random_signatures(rng, L, P);
  AbundanceMatrix at, ae;
  at.fractions.resize(P, M);
  ae.fractions.resize(P, M);
  for (int j = 0; j < M; ++j) {
    Vector v(P), w(P);
    for (int k = 0; k < P; ++k) {
      v[k] = rng.uniform(0.01, 1.0);
      w[k] = rng.uniform(0.01, 1.0);
    }
    at.fractions.col(j) = v / v.sum();
    ae.fractions.col(j) = w / w.sum();
  }
  at.normalized = ae.normalized = true;
  const auto rep = evaluate(t, at, e, ae);
  CHECK(rep.rms_sad ==
        Catch::Approx(std::sqrt(rep.per_endmember_sad.squaredNorm() / P)).margin(1e-15));
  double acc = 0.0;
  for (int j = 0; j < M; ++j) acc += rep.per_pixel_aad[j] * rep.per_pixel_aad[j];
  CHECK(rep.rms_aad == Catch::Approx(std::sqrt(acc / M)).margin(1e-15));
  CHECK(rep.rms_sad >= 0.0);
  CHECK(rep.rms_aad >= 0.0);
}

TEST_CASE("degrees conversion") {
  CHECK(to_degrees(M_PI) == Catch::Approx(180.0));
  CHECK(to_degrees(M_PI / 4) == Catch::Approx(45.0));
}
