#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nia/info_metrics.hpp"
#include "nia/instance_lab.hpp"
#include "nia/protocol.hpp"

using namespace nia;

TEST(BernoulliKl, ReferenceValues) {
  EXPECT_EQ(bernoulli_kl(0.5, 0.5), 0.0);
  const double direct = 0.8 * std::log(0.8 / 0.5) + 0.2 * std::log(0.2 / 0.5);
  EXPECT_NEAR(bernoulli_kl(0.8, 0.5), direct, 1e-15);
  EXPECT_NEAR(direct, 0.19274, 1e-5);
  EXPECT_NEAR(bernoulli_kl(0.0, 0.5), std::numbers::ln2, 1e-15);
  EXPECT_TRUE(std::isinf(bernoulli_kl(0.5, 0.0)));
  EXPECT_EQ(bernoulli_kl(1.0, 1.0), 0.0);
  EXPECT_THROW(bernoulli_kl(1.5, 0.5), DomainError);
  EXPECT_THROW(bernoulli_kl(0.5, -0.1), DomainError);
}

TEST(BernoulliKl, LogitFormAgrees) {
  for (double a : {-3.0, -0.2, 0.0, 1.7}) {
    for (double b : {-2.0, 0.5, 4.0}) {
      EXPECT_NEAR(bernoulli_kl_logits(a, b), bernoulli_kl(sigmoid(a), sigmoid(b)), 1e-13);
    }
  }
}

TEST(ExpectedKl, ReferenceValues) {
  Vector p(2), q(2);
  p << 0.8, 0.2;
  q << 0.5, 0.5;
  EXPECT_EQ(expected_kl(p, p), 0.0);
  const double pointwise = 0.8 * std::log(1.6) + 0.2 * std::log(0.4);
  EXPECT_NEAR(expected_kl(p, q), pointwise, 1e-15);  // both rows have the same value by symmetry
  EXPECT_THROW(expected_kl(p, Vector::Zero(3)), LengthMismatch);
}

TEST(Pinsker, ReferenceAndRandomPairs) {
  Vector p(1), q(1);
  p << 0.8;
  q << 0.5;
  EXPECT_NEAR(pinsker_gap(p, q), 0.8 * std::log(1.6) + 0.2 * std::log(0.4) - 0.18, 1e-15);
  EXPECT_GT(pinsker_gap(p, q), 0.0);
  EXPECT_EQ(pinsker_gap(p, p), 0.0);
  const CounterStream s(3, stream_tag::kPairs);
  Vector a(1000), b(1000);
  for (int i = 0; i < 1000; ++i) {
    a[i] = s.uniform(2 * i);
    b[i] = s.uniform(2 * i + 1);
    EXPECT_GE(pinsker_gap(a.segment(i, 1), b.segment(i, 1)), -1e-12);
  }
  EXPECT_GE(pinsker_gap(a, b), -1e-12);
  EXPECT_GE(expected_kl(a, b), 2.0 * (a - b).squaredNorm() / 1000.0 - 1e-12);
}

class DecompositionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ds = generate_hard_instance({4, 100000, 21});
    FitOptions o;
    o.grad_tol = 1e-12;
    star = fit_global(ds, o);
    ASSERT_TRUE(star.converged);
    star_logits = predict_logits(star, ds.features);
  }
  Dataset ds;
  FitResult star;
  Vector star_logits;
};

TEST_F(DecompositionTest, IdenticalPredictorGivesZero) {
  EXPECT_EQ(verify_decomposition(ds, star_logits, star_logits), 0.0);
}

TEST_F(DecompositionTest, ZeroPredictor) {
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(ds.n()));
  EXPECT_LE(verify_decomposition(ds, star_logits, zero), 1e-8);
}

TEST_F(DecompositionTest, OneCoordinatePerturbed) {
  Vector theta = star.weights;
  theta[2] += 0.1;
  const Vector q = predict_logits(theta, ds.features);
  EXPECT_LE(verify_decomposition(ds, star_logits, q), 1e-8);
  EXPECT_GT(bce_loss(q, ds.labels) - bce_loss(star_logits, ds.labels), 0.0);
}

TEST_F(DecompositionTest, ResidualTracksSolverTolerance) {
  FitOptions loose;
  loose.grad_tol = 1e-2;
  loose.initial_step = 0.05;  // stop early, far from stationarity
  const FitResult rough = fit_global(ds, loose);
  const Vector rough_logits = predict_logits(rough, ds.features);
  const Vector q = Vector::Zero(static_cast<Eigen::Index>(ds.n()));
  const double tight = verify_decomposition(ds, star_logits, q);
  const double coarse = verify_decomposition(ds, rough_logits, q);
  EXPECT_GT(coarse, tight);
  // |residual| = |grad . (theta_q - theta)| <= grad_norm * |theta|_1
  EXPECT_LE(coarse, rough.grad_norm * rough.weights.lpNorm<1>() * (1 + 1e-9) + 1e-14);
}

TEST(Bounds, ResidualBoundRhs) {
  EXPECT_EQ(residual_bound_rhs(3.0, 2.0, 4.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(residual_bound_rhs(1.0, 1.0, 2.0, 1.0), 1.0);
  EXPECT_THROW(residual_bound_rhs(-1.0, 1.0, 1.0, 1.0), DomainError);
}

TEST(Bounds, ConvergenceBoundRhs) {
  EXPECT_DOUBLE_EQ(convergence_bound_rhs(2.0, 3.0, 4, 16), 6.0);
  const double a = convergence_bound_rhs(1.3, 2.1, 4, 32);
  const double b = convergence_bound_rhs(1.3, 2.1, 4, 64);
  EXPECT_NEAR(b / a, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(convergence_bound_rhs(1.0, 1.0, 5, 4), InvalidDimension);
  EXPECT_THROW(convergence_bound_rhs(1.0, 1.0, 0, 4), InvalidDimension);
}

TEST(StableBlock, Examples) {
  Vector constant = Vector::Constant(6, 0.5);
  const StableBlock c = stable_block(constant, 2);
  EXPECT_EQ(c.block, 1u);
  EXPECT_EQ(c.drop, 0.0);
  EXPECT_EQ(c.num_blocks, 3u);

  Vector l(4);
  l << 0.69, 0.5, 0.5, 0.5;
  const StableBlock s = stable_block(l, 2);
  EXPECT_EQ(s.block, 2u);
  EXPECT_EQ(s.first, 3u);
  EXPECT_EQ(s.last, 4u);
  EXPECT_EQ(s.drop, 0.0);
  EXPECT_THROW(stable_block(l, 5), InvalidDimension);
  EXPECT_THROW(stable_block(l, 0), InvalidDimension);
}

TEST(StableBlock, PigeonholeOnProtocolTraces) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Dataset ds = generate_hard_instance({4, 20000, seed});
    const ProtocolTrace t = run_protocol(ds, cyclic_path_assignment(4, 24));
    const Vector losses = t.losses_in_order();
    const StableBlock b = stable_block(losses, 4);
    EXPECT_LE(b.drop, losses[0] / static_cast<double>(b.num_blocks));
  }
}

TEST(FeatureScale, MaxRootMeanSquare) {
  Matrix x(2, 2);
  x << 1, 3, -1, 4;
  EXPECT_DOUBLE_EQ(feature_scale_bound(x), std::sqrt(12.5));
}
