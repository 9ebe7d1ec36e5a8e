#include "pfld/operators.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "pfld/rng.hpp"

namespace pfld {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Mirror without repeating the edge sample: -1 -> 1, n -> n - 2.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void check_dim(const Vector& v, int expected, const char* what) {
  if (v.size() != expected) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << v.size();
    throw InvalidArgument(os.str());
  }
}

// Correlate rows (axis = 1) or columns (axis = 0) with `kernel`.
Vector blur_axis(const Vector& x, const ImageShape& shape, const std::vector<double>& kernel, int axis) {
  const int radius = static_cast<int>(kernel.size()) / 2;
  Vector out = Vector::Zero(x.size());
  for (int r = 0; r < shape.height; ++r) {
    for (int c = 0; c < shape.width; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const double h = kernel[static_cast<std::size_t>(k + radius)];
        const int rr = axis == 0 ? reflect_index(r + k, shape.height) : r;
        const int cc = axis == 1 ? reflect_index(c + k, shape.width) : c;
        acc += h * x[rr * shape.width + cc];
      }
      out[r * shape.width + c] = acc;
    }
  }
  return out;
}

// Transpose of blur_axis: scatter instead of gather.
Vector blur_axis_adjoint(const Vector& u, const ImageShape& shape, const std::vector<double>& kernel,
                         int axis) {
  const int radius = static_cast<int>(kernel.size()) / 2;
  Vector out = Vector::Zero(u.size());
  for (int r = 0; r < shape.height; ++r) {
    for (int c = 0; c < shape.width; ++c) {
      const double v = u[r * shape.width + c];
      for (int k = -radius; k <= radius; ++k) {
        const double h = kernel[static_cast<std::size_t>(k + radius)];
        const int rr = axis == 0 ? reflect_index(r + k, shape.height) : r;
        const int cc = axis == 1 ? reflect_index(c + k, shape.width) : c;
        out[rr * shape.width + cc] += h * v;
      }
    }
  }
  return out;
}

}  // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::kIdentity:
      return "identity";
    case OperatorKind::kInpaintMask:
      return "inpaint";
    case OperatorKind::kGaussianBlur:
      return "blur";
    case OperatorKind::kDownsample:
      return "downsample";
  }
  return "unknown";
}

LinearOperator LinearOperator::identity(int n) {
  require(n >= 1, "identity: dimension must be >= 1");
  return {n, n, Identity{}};
}

LinearOperator LinearOperator::inpaint(std::vector<bool> keep) {
  require(!keep.empty(), "inpaint: empty mask");
  const int n = static_cast<int>(keep.size());
  return {n, n, Mask{std::move(keep)}};
}

LinearOperator LinearOperator::inpaint_box(ImageShape shape, int row, int col, int h, int w) {
  require(shape.height >= 1 && shape.width >= 1, "inpaint_box: invalid image shape");
  require(row >= 0 && col >= 0 && h >= 0 && w >= 0 && row + h <= shape.height && col + w <= shape.width,
          "inpaint_box: rectangle outside the image");
  std::vector<bool> keep(static_cast<std::size_t>(shape.size()), true);
  for (int r = row; r < row + h; ++r)
    for (int c = col; c < col + w; ++c) keep[static_cast<std::size_t>(r * shape.width + c)] = false;
  return inpaint(std::move(keep));
}

LinearOperator LinearOperator::blur(ImageShape shape, std::vector<double> kernel) {
  require(shape.height >= 1 && shape.width >= 1, "blur: invalid image shape");
  require(kernel.size() % 2 == 1, "blur: kernel width must be odd");
  const double sum = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  require(std::abs(sum - 1.0) < 1e-12, "blur: kernel must sum to 1");
  const int n = shape.size();
  return {n, n, Blur{shape, std::move(kernel)}};
}

LinearOperator LinearOperator::gaussian_blur(ImageShape shape, double sigma, int taps) {
  require(std::isfinite(sigma) && sigma > 0.0, "gaussian_blur: sigma must be positive");
  require(taps >= 1 && taps % 2 == 1, "gaussian_blur: taps must be odd and positive");
  std::vector<double> kernel(static_cast<std::size_t>(taps));
  const int radius = taps / 2;
  for (int k = -radius; k <= radius; ++k)
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
  const double sum = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& v : kernel) v /= sum;
  return blur(shape, std::move(kernel));
}

LinearOperator LinearOperator::downsample(ImageShape shape, int factor) {
  require(factor >= 1, "downsample: factor must be >= 1");
  const int fy = shape.height == 1 ? 1 : factor;
  const int fx = factor;
  require(shape.height % fy == 0 && shape.width % fx == 0,
          "downsample: image dimensions must be divisible by the factor");
  const int out = (shape.height / fy) * (shape.width / fx);
  return {shape.size(), out, Downsample{shape, fy, fx}};
}

Vector LinearOperator::apply(const Vector& x) const {
  check_dim(x, in_dim_, "LinearOperator::apply");
  return std::visit(
      Overloaded{
          [&](const Identity&) -> Vector { return x; },
          [&](const Mask& m) -> Vector {
            Vector out = x;
            for (int i = 0; i < in_dim_; ++i)
              if (!m.keep[static_cast<std::size_t>(i)]) out[i] = 0.0;
            return out;
          },
          [&](const Blur& b) -> Vector {
            Vector out = blur_axis(x, b.shape, b.kernel, 1);
            if (b.shape.height > 1) out = blur_axis(out, b.shape, b.kernel, 0);
            return out;
          },
          [&](const Downsample& d) -> Vector {
            const int ow = d.shape.width / d.fx;
            const double scale = 1.0 / (d.fx * d.fy);
            Vector out = Vector::Zero(out_dim_);
            for (int r = 0; r < d.shape.height; ++r)
              for (int c = 0; c < d.shape.width; ++c)
                out[(r / d.fy) * ow + c / d.fx] += scale * x[r * d.shape.width + c];
            return out;
          },
      },
      spec_);
}

Vector LinearOperator::adjoint(const Vector& u) const {
  check_dim(u, out_dim_, "LinearOperator::adjoint");
  return std::visit(
      Overloaded{
          [&](const Identity&) -> Vector { return u; },
          [&](const Mask&) -> Vector { return apply(u); },
          [&](const Blur& b) -> Vector {
            Vector out = u;
            if (b.shape.height > 1) out = blur_axis_adjoint(out, b.shape, b.kernel, 0);
            return blur_axis_adjoint(out, b.shape, b.kernel, 1);
          },
          [&](const Downsample& d) -> Vector {
            const int ow = d.shape.width / d.fx;
            const double scale = 1.0 / (d.fx * d.fy);
            Vector out(in_dim_);
            for (int r = 0; r < d.shape.height; ++r)
              for (int c = 0; c < d.shape.width; ++c)
                out[r * d.shape.width + c] = scale * u[(r / d.fy) * ow + c / d.fx];
            return out;
          },
      },
      spec_);
}

OperatorKind LinearOperator::kind() const {
  return std::visit(Overloaded{
                        [](const Identity&) { return OperatorKind::kIdentity; },
                        [](const Mask&) { return OperatorKind::kInpaintMask; },
                        [](const Blur&) { return OperatorKind::kGaussianBlur; },
                        [](const Downsample&) { return OperatorKind::kDownsample; },
                    },
                    spec_);
}

bool LinearOperator::is_projector() const {
  const auto k = kind();
  return k == OperatorKind::kIdentity || k == OperatorKind::kInpaintMask;
}

std::string LinearOperator::describe() const {
  std::ostringstream os;
  os << to_string(kind()) << '(' << in_dim_ << "->" << out_dim_ << ')';
  return os.str();
}

Codec Codec::identity(int n) {
  require(n >= 1, "codec: dimension must be >= 1");
  Codec c;
  c.kind_ = CodecKind::kIdentity;
  c.pixel_dim_ = n;
  c.latent_dim_ = n;
  return c;
}

Codec Codec::fixed_linear(Matrix decoder) {
  require(decoder.rows() >= 1 && decoder.cols() >= 1, "codec: empty decoder matrix");
  require(decoder.rows() >= decoder.cols(), "codec: decoder must map latent (k) into pixels (n >= k)");
  require(decoder.allFinite(), "codec: decoder has non-finite entries");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(decoder);
  require(cod.rank() == decoder.cols(), "codec: decoder must have full column rank");
  Codec c;
  c.kind_ = CodecKind::kFixedLinear;
  c.pixel_dim_ = static_cast<int>(decoder.rows());
  c.latent_dim_ = static_cast<int>(decoder.cols());
  c.encoder_ = cod.pseudoInverse();
  c.decoder_ = std::move(decoder);
  return c;
}

Codec Codec::orthonormal(int n, std::uint64_t seed) {
  require(n >= 1, "codec: dimension must be >= 1");
  Rng rng(seed);
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return fixed_linear(std::move(q));
}

Vector Codec::encode(const Vector& x) const {
  check_dim(x, pixel_dim_, "Codec::encode");
  return kind_ == CodecKind::kIdentity ? x : Vector(encoder_ * x);
}

Vector Codec::decode(const Vector& z) const {
  check_dim(z, latent_dim_, "Codec::decode");
  return kind_ == CodecKind::kIdentity ? z : Vector(decoder_ * z);
}

Vector Codec::encode_adjoint(const Vector& v) const {
  check_dim(v, latent_dim_, "Codec::encode_adjoint");
  return kind_ == CodecKind::kIdentity ? v : Vector(encoder_.transpose() * v);
}

Vector Codec::decode_adjoint(const Vector& v) const {
  check_dim(v, pixel_dim_, "Codec::decode_adjoint");
  return kind_ == CodecKind::kIdentity ? v : Vector(decoder_.transpose() * v);
}

Measurement make_measurement(const LinearOperator& op, const Vector& x_star, double sigma_nu,
                             std::uint64_t seed) {
  require(std::isfinite(sigma_nu) && sigma_nu >= 0.0, "make_measurement: sigma_nu must be finite and >= 0");
  require(x_star.allFinite(), "make_measurement: x* has non-finite entries");
  Measurement m;
  m.sigma_nu = sigma_nu;
  m.operator_id = op.describe();
  m.y = op.apply(x_star);
  if (sigma_nu > 0.0) {
    Rng rng(seed);
    Vector noise = sigma_nu * rng.normal_vector(op.out_dim());
    if (op.kind() == OperatorKind::kInpaintMask) noise = op.apply(noise);
    m.y += noise;
  }
  return m;
}

double residual_norm_sq(const Measurement& m, const LinearOperator& op, const Codec& codec,
                        const Vector& z_hat0) {
  const Vector predicted = op.apply(codec.decode(z_hat0));
  check_dim(m.y, op.out_dim(), "residual_norm_sq: measurement");
  const double r = (m.y - predicted).squaredNorm();
  if (!std::isfinite(r)) throw NumericalError("residual_norm_sq: non-finite residual");
  return r;
}

Matrix dense_forward(const LinearOperator& op) {
  Matrix a(op.out_dim(), op.in_dim());
  for (int j = 0; j < op.in_dim(); ++j) a.col(j) = op.apply(Vector::Unit(op.in_dim(), j));
  return a;
}

Matrix dense_adjoint(const LinearOperator& op) {
  Matrix a(op.in_dim(), op.out_dim());
  for (int j = 0; j < op.out_dim(); ++j) a.col(j) = op.adjoint(Vector::Unit(op.out_dim(), j));
  return a;
}

}  // namespace pfld
