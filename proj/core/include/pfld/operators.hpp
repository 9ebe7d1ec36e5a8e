#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pfld/common.hpp"

namespace pfld {

// Row-major image geometry; 1D signals are 1 x n.
struct ImageShape {
  int height = 1;
  int width = 1;
  int size() const { return height * width; }
};

enum class OperatorKind { kIdentity, kInpaintMask, kGaussianBlur, kDownsample };

const char* to_string(OperatorKind kind);

/// Matrix-free linear forward map with an exact adjoint.
///
/// Inpainting is square (n -> n) and zeroes dropped pixels, so A^T A is the
/// keep-projector. Blur is separable with reflect (mirror, edge not
/// repeated) boundaries. Downsampling averages f x f blocks (f x 1 along the
/// width for 1 x n signals).
class LinearOperator {
 public:
  static LinearOperator identity(int n);
  static LinearOperator inpaint(std::vector<bool> keep);
  /// Keep everything except the rectangle [row, row + h) x [col, col + w).
  static LinearOperator inpaint_box(ImageShape shape, int row, int col, int h, int w);
  static LinearOperator blur(ImageShape shape, std::vector<double> kernel);
  static LinearOperator gaussian_blur(ImageShape shape, double sigma, int taps);
  static LinearOperator downsample(ImageShape shape, int factor);

  Vector apply(const Vector& x) const;
  Vector adjoint(const Vector& u) const;
  /// A^T A x.
  Vector normal(const Vector& x) const { return adjoint(apply(x)); }

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  OperatorKind kind() const;
  /// True when A^T A is an orthogonal projector (identity, inpainting).
  bool is_projector() const;
  std::string describe() const;

 private:
  struct Identity {};
  struct Mask {
    std::vector<bool> keep;
  };
  struct Blur {
    ImageShape shape;
    std::vector<double> kernel;
  };
  struct Downsample {
    ImageShape shape;
    int fy = 1;
    int fx = 1;
  };
  using Spec = std::variant<Identity, Mask, Blur, Downsample>;

  LinearOperator(int in, int out, Spec spec) : in_dim_(in), out_dim_(out), spec_(std::move(spec)) {}

  int in_dim_;
  int out_dim_;
  Spec spec_;
};

enum class CodecKind { kIdentity, kFixedLinear };

/// Encoder/decoder pair between pixel space (n) and latent space (k).
/// Decoding is z -> W z; encoding is the pseudo-inverse, so encode(decode(z)) == z.
class Codec {
 public:
  static Codec identity(int n);
  /// W must have full column rank (n >= k).
  static Codec fixed_linear(Matrix decoder);
  /// Square random orthonormal W drawn from a seeded QR.
  static Codec orthonormal(int n, std::uint64_t seed);

  Vector encode(const Vector& x) const;
  Vector decode(const Vector& z) const;
  Vector encode_adjoint(const Vector& v) const;
  Vector decode_adjoint(const Vector& v) const;

  int pixel_dim() const { return pixel_dim_; }
  int latent_dim() const { return latent_dim_; }
  CodecKind kind() const { return kind_; }

 private:
  Codec() = default;

  CodecKind kind_ = CodecKind::kIdentity;
  int pixel_dim_ = 0;
  int latent_dim_ = 0;
  Matrix decoder_;  // n x k, empty for identity
  Matrix encoder_;  // k x n
};

struct Measurement {
  Vector y;
  double sigma_nu = 0.0;
  std::string operator_id;
};

/// y = A x* + sigma_nu * eps with eps ~ N(0, I) drawn from `seed`. Dropped
/// pixels of an inpainting operator stay exactly zero.
Measurement make_measurement(const LinearOperator& op, const Vector& x_star, double sigma_nu,
                             std::uint64_t seed);

/// ||y - A(D(z_hat0))||^2.
double residual_norm_sq(const Measurement& m, const LinearOperator& op, const Codec& codec,
                        const Vector& z_hat0);

// Dense matrix of a linear map, built column by column. For oracles/tests only.
Matrix dense_forward(const LinearOperator& op);
Matrix dense_adjoint(const LinearOperator& op);

}  // namespace pfld
