#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>

#include "deskew/consistency.hpp"
#include "deskew/errors.hpp"
#include "deskew/rng.hpp"
#include "deskew/stats.hpp"
#include "test_util.hpp"

using namespace deskew;
using deskew::testing::random_matrix;
using deskew::testing::random_spd;
using deskew::testing::random_vector;

TEST_SUITE_BEGIN("consistency");

TEST_CASE("nees: hand cases") {
  GaussianState g{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)};
  g.mean << 1.0, 1.0, 1.0;
  CHECK(nees(g, Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(3.0).epsilon(1e-12));

  GaussianState g2{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)};
  g2.mean << 2.0, 0.0;
  g2.cov << 4.0, 0.0, 0.0, 1.0;
  CHECK(nees(g2, Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  GaussianState g3{Eigen::VectorXd::Constant(4, 2.5),
                   Eigen::MatrixXd::Identity(4, 4)};
  CHECK(nees(g3, g3.mean) == 0.0);
}

TEST_CASE("nees: dimension mismatch and singularity") {
  GaussianState g{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)};
  CHECK_THROWS_AS(nees(g, Eigen::VectorXd::Zero(2)), std::invalid_argument);

  GaussianState indef{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)};
  indef.cov << 1.0, 2.0, 2.0, 1.0;  // eigenvalues -1 and 3
  CHECK_THROWS_AS(nees(indef, Eigen::VectorXd::Ones(2)), NumericError);
}

TEST_CASE("nees is invariant under affine re-parameterization") {
  SplitMix64 rng(61);
  for (int rep = 0; rep < 40; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 6);
    GaussianState g{random_vector(rng, d), random_spd(rng, d)};
    const Eigen::VectorXd truth = random_vector(rng, d);
    const double base = nees(g, truth);

    Eigen::MatrixXd a;
    do {
      a = random_matrix(rng, d, d, -2.0, 2.0);
    } while (std::abs(a.determinant()) < 1e-2);
    const Eigen::VectorXd b = random_vector(rng, d);
    const GaussianState mapped{a * g.mean + b, a * g.cov * a.transpose()};
    const double remapped = nees(mapped, a * truth + b);
    CHECK(std::abs(remapped - base) < 1e-9 * std::max(1.0, base));
  }
}

TEST_CASE("mean NEES of matched samples converges to the dof") {
  SplitMix64 rng(62);
  const int d = 3;
  const Eigen::MatrixXd cov = random_spd(rng, d);
  const Eigen::VectorXd truth = random_vector(rng, d);
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();

  const int n = 100000;
  double sum = 0.0;
  Eigen::VectorXd z(d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) z[k] = rng.normal();
    const GaussianState g{truth + chol * z, cov};
    sum += nees(g, truth);
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - d) < 3.0 * std::sqrt(2.0 * d / double(n)));
}

TEST_CASE("chi-square bounds match published tables") {
  struct Row {
    int dof;
    double lo, hi;
  };
  const Row table[] = {{1, 0.000982, 5.0239},
                       {2, 0.0506, 7.3778},
                       {3, 0.2158, 9.3484},
                       {4, 0.4844, 11.1433},
                       {5, 0.8312, 12.8325}};
  for (const Row& row : table) {
    const auto [lo, hi] = chi2_bounds(row.dof);
    CHECK(std::abs(lo - row.lo) < 1e-3);
    CHECK(std::abs(hi - row.hi) < 1e-3);
  }
  CHECK_THROWS_AS(chi2_bounds(0), std::invalid_argument);
  CHECK_THROWS_AS(chi2_bounds(11), std::invalid_argument);
}

TEST_CASE("chi2 d=2 quantile agrees with the exponential closed form") {
  // chi-square with 2 dof is Exp(1/2): quantile(p) = -2 ln(1 - p)
  for (double p : {0.025, 0.5, 0.95, 0.975}) {
    CHECK(std::abs(chi2_quantile(2, p) + 2.0 * std::log(1.0 - p)) < 1e-10);
  }
}

TEST_CASE("normal quantile: symmetry and reference values") {
  CHECK(std::abs(normal_quantile(0.5)) < 1e-15);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963985).epsilon(1e-8));
  SplitMix64 rng(63);
  for (int i = 0; i < 100; ++i) {
    const double p = rng.uniform01();
    CHECK(std::abs(normal_quantile(p) + normal_quantile(1.0 - p)) < 1e-9);
  }
}

TEST_CASE("in_bound_rate") {
  std::vector<NeesRecord> records;
  CHECK_THROWS_AS(in_bound_rate(records), std::invalid_argument);
  records.push_back({1.0, 3, true});
  records.push_back({0.01, 3, false});
  CHECK(in_bound_rate(records) == 0.5);
  records[1].in_bounds = true;
  CHECK(in_bound_rate(records) == 1.0);
}

TEST_CASE("summarize_nees pools counts, rate and histogram") {
  const auto [lo, hi] = chi2_bounds(3);
  std::vector<double> eps = {0.0, lo + 0.1, 3.0, hi - 0.1, hi + 5.0, 50.0};
  const NeesSummary s = summarize_nees(eps, 3, 20.0, 40);
  CHECK(s.count == 6);
  CHECK(s.in_bounds == 3);
  CHECK(s.rate == doctest::Approx(0.5));
  CHECK(s.overflow == 1);  // 50.0 beyond the histogram
  std::int64_t total = s.overflow;
  for (auto c : s.histogram) total += c;
  CHECK(total == 6);
  CHECK_THROWS_AS(summarize_nees({}, 3), std::invalid_argument);
}

TEST_SUITE_END();
