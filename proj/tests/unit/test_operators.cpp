#include <gtest/gtest.h>

#include "pfld/operators.hpp"
#include "pfld/rng.hpp"

using namespace pfld;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Dense reflect-101 1D convolution built entry by entry.
Matrix blur_matrix_1d(int n, const std::vector<double>& k) {
  Matrix m = Matrix::Zero(n, n);
  const int r = static_cast<int>(k.size()) / 2;
  for (int i = 0; i < n; ++i)
    for (int j = -r; j <= r; ++j) {
      int idx = i + j;
      if (idx < 0) idx = -idx;
      if (idx >= n) idx = 2 * n - 2 - idx;
      m(i, idx) += k[static_cast<std::size_t>(j + r)];
    }
  return m;
}

}  // namespace

TEST(Operators, IdentityAndMask) {
  const Vector x = vec({1, 2, 3});
  EXPECT_EQ(LinearOperator::identity(3).apply(x), x);
  const auto mask = LinearOperator::inpaint({true, false, true});
  EXPECT_EQ(mask.apply(x), vec({1, 0, 3}));
  EXPECT_EQ(mask.adjoint(x), mask.apply(x));
  EXPECT_TRUE(mask.is_projector());
  EXPECT_EQ(LinearOperator::identity(3).adjoint(x), x);
}

TEST(Operators, BlurHandExample) {
  const auto op = LinearOperator::blur({1, 5}, {0.25, 0.5, 0.25});
  const Vector out = op.apply(vec({0, 0, 4, 0, 0}));
  EXPECT_TRUE(out.isApprox(vec({0, 1, 2, 1, 0}), 1e-15));
  const Matrix oracle = blur_matrix_1d(5, {0.25, 0.5, 0.25});
  EXPECT_LT((dense_forward(op) - oracle).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Operators, BlurMatchesDenseOracleWithAsymmetricBoundary) {
  const std::vector<double> k{0.1, 0.2, 0.4, 0.2, 0.1};
  const auto op = LinearOperator::blur({1, 7}, k);
  EXPECT_LT((dense_forward(op) - blur_matrix_1d(7, k)).cwiseAbs().maxCoeff(), 1e-15);
  const auto op2 = LinearOperator::blur({4, 5}, k);
  const Matrix a = blur_matrix_1d(5, k), b = blur_matrix_1d(4, k);
  // Separable 2D blur on a row-major image is kron(rows, cols).
  Matrix kron(20, 20);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) kron.block(i * 5, j * 5, 5, 5) = b(i, j) * a;
  EXPECT_LT((dense_forward(op2) - kron).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Operators, DownsampleAdjointExample) {
  const auto op = LinearOperator::downsample({1, 4}, 2);
  EXPECT_EQ(op.out_dim(), 2);
  EXPECT_TRUE(op.adjoint(vec({1, 1})).isApprox(vec({0.5, 0.5, 0.5, 0.5})));
  EXPECT_TRUE(op.apply(vec({1, 3, 5, 7})).isApprox(vec({2, 6})));
  const auto op2 = LinearOperator::downsample({4, 4}, 2);
  EXPECT_EQ(op2.out_dim(), 4);
  EXPECT_LT((dense_adjoint(op2) - dense_forward(op2).transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Operators, AdjointIdentityOnRandomProbes) {
  Rng rng(3);
  std::vector<LinearOperator> ops{
      LinearOperator::identity(16), LinearOperator::inpaint_box({4, 4}, 1, 1, 2, 2),
      LinearOperator::gaussian_blur({4, 4}, 1.0, 5), LinearOperator::downsample({4, 4}, 2),
      LinearOperator::gaussian_blur({1, 16}, 2.0, 7)};
  for (const auto& op : ops) {
    for (int i = 0; i < 100; ++i) {
      const Vector x = rng.normal_vector(op.in_dim());
      const Vector u = rng.normal_vector(op.out_dim());
      const double lhs = op.apply(x).dot(u), rhs = x.dot(op.adjoint(u));
      ASSERT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs))) << op.describe();
    }
    EXPECT_LT((dense_adjoint(op) - dense_forward(op).transpose()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Operators, InpaintBox) {
  const auto op = LinearOperator::inpaint_box({3, 3}, 1, 1, 1, 2);
  const Vector out = op.apply(Vector::Ones(9));
  EXPECT_EQ(out, vec({1, 1, 1, 1, 0, 0, 1, 1, 1}));
}

TEST(Operators, RejectsInvalid) {
  EXPECT_THROW(LinearOperator::blur({1, 5}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(LinearOperator::blur({1, 5}, {0.3, 0.3, 0.3}), InvalidArgument);
  EXPECT_THROW(LinearOperator::downsample({1, 5}, 2), InvalidArgument);
  EXPECT_THROW(LinearOperator::identity(3).apply(Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(LinearOperator::inpaint({}), InvalidArgument);
}

TEST(Codec, LeftInverse) {
  Rng rng(5);
  const auto orth = Codec::orthonormal(6, 9);
  Matrix w(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) w(i, j) = rng.normal();
  const auto tall = Codec::fixed_linear(w);
  for (int i = 0; i < 20; ++i) {
    const Vector z6 = rng.normal_vector(6), z3 = rng.normal_vector(3);
    EXPECT_LT((orth.encode(orth.decode(z6)) - z6).norm(), 1e-12);
    EXPECT_LT((tall.encode(tall.decode(z3)) - z3).norm(), 1e-10);
    const Vector x = rng.normal_vector(5), v = rng.normal_vector(3);
    EXPECT_NEAR(tall.decode(v).dot(x), v.dot(tall.decode_adjoint(x)), 1e-10);
    EXPECT_NEAR(tall.encode(x).dot(v), x.dot(tall.encode_adjoint(v)), 1e-10);
  }
  EXPECT_THROW(Codec::fixed_linear(Matrix::Zero(3, 2)), InvalidArgument);
}

TEST(Measurement, NoiselessIdentity) {
  const auto op = LinearOperator::identity(2);
  const auto m = make_measurement(op, vec({2, -1}), 0.0, 1);
  EXPECT_EQ(m.y, vec({2, -1}));
}

TEST(Measurement, NoiseVariance) {
  const auto op = LinearOperator::identity(1);
  const int n = 100000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double e = make_measurement(op, vec({0.3}), 0.01, static_cast<std::uint64_t>(i)).y[0] - 0.3;
    sum += e;
    sumsq += e * e;
  }
  const double var = (sumsq - sum * sum / n) / (n - 1);
  EXPECT_NEAR(var / 1e-4, 1.0, 0.05);
}

TEST(Measurement, Deterministic) {
  const auto op = LinearOperator::gaussian_blur({1, 8}, 1.0, 3);
  const Vector x = Vector::LinSpaced(8, 0, 1);
  EXPECT_EQ(make_measurement(op, x, 0.1, 42).y, make_measurement(op, x, 0.1, 42).y);
  EXPECT_NE(make_measurement(op, x, 0.1, 42).y, make_measurement(op, x, 0.1, 43).y);
}

TEST(Measurement, MaskedEntriesStayZero) {
  const auto op = LinearOperator::inpaint({true, false, true, false});
  const auto m = make_measurement(op, Vector::Ones(4), 0.5, 7);
  EXPECT_EQ(m.y[1], 0.0);
  EXPECT_EQ(m.y[3], 0.0);
}

TEST(Residual, Examples) {
  const auto op = LinearOperator::identity(2);
  const auto codec = Codec::identity(2);
  Measurement m{vec({1, 0}), 0.01, "identity"};
  EXPECT_DOUBLE_EQ(residual_norm_sq(m, op, codec, vec({0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(residual_norm_sq(m, op, codec, vec({1, 0})), 0.0);

  Rng rng(11);
  const auto blur = LinearOperator::gaussian_blur({1, 6}, 1.0, 3);
  const auto orth = Codec::orthonormal(6, 2);
  Measurement m2{rng.normal_vector(6), 0.01, "blur"};
  const Vector z = rng.normal_vector(6);
  Matrix decoder(6, 6);
  for (int j = 0; j < 6; ++j) decoder.col(j) = orth.decode(Vector::Unit(6, j));
  const double dense = (m2.y - dense_forward(blur) * decoder * z).squaredNorm();
  EXPECT_NEAR(residual_norm_sq(m2, blur, orth, z), dense, 1e-10);
}
