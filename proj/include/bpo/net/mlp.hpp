#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "bpo/core/errors.hpp"
#include "bpo/core/rng.hpp"

namespace bpo::net {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstVectorMap = Eigen::Map<const Vector>;

enum class Activation { kTanh, kLinear };

/// Dense layer whose weights live inside a shared flat parameter vector:
/// W (out x in, column-major) at `offset`, then the bias (out).
struct DenseLayer {
  Index in = 0;
  Index out = 0;
  Index offset = 0;
  Activation activation = Activation::kTanh;

  Index num_params() const { return out * in + out; }
  ConstMatrixMap weights(const Vector& theta) const { return ConstMatrixMap(theta.data() + offset, out, in); }
  ConstVectorMap bias(const Vector& theta) const { return ConstVectorMap(theta.data() + offset + out * in, out); }
  Eigen::Map<Matrix> weights(Vector& theta) const { return Eigen::Map<Matrix>(theta.data() + offset, out, in); }
  Eigen::Map<Vector> bias(Vector& theta) const { return Eigen::Map<Vector>(theta.data() + offset + out * in, out); }
};

/// Orthogonal matrix of the given shape scaled by `gain` (rows orthonormal when
/// out < in, columns orthonormal otherwise).
inline Matrix orthogonal_matrix(Index rows, Index cols, double gain, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool tall = rows >= cols;
  Matrix a(tall ? rows : cols, tall ? cols : rows);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
  for (Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return gain * (tall ? q : Matrix(q.transpose()));
}

/// Multilayer perceptron over batches stored column-wise (features x samples).
/// tanh through the vectorized exp: 1 - 2 / (e^{2x} + 1).
inline Matrix tanh_fast(const Matrix& z) { return 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0); }

class Mlp {
 public:
  /// Per-layer post-activation outputs; acts[0] is the input.
  struct Cache {
    std::vector<Matrix> acts;
  };

  Mlp() = default;

  Mlp(Index input_dim, const std::vector<Index>& widths, Activation hidden, Activation output, Index offset)
      : input_dim_(input_dim) {
    if (input_dim <= 0 || widths.empty()) throw ConfigError("mlp needs a positive input width and >= 1 layer");
    Index in = input_dim;
    Index off = offset;
    for (std::size_t l = 0; l < widths.size(); ++l) {
      if (widths[l] <= 0) throw ConfigError("mlp layer widths must be positive");
      DenseLayer layer{in, widths[l], off, l + 1 == widths.size() ? output : hidden};
      off += layer.num_params();
      layers_.push_back(layer);
      in = widths[l];
    }
    num_params_ = off - offset;
  }

  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return layers_.back().out; }
  Index num_params() const { return num_params_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  void forward(const Vector& theta, const Matrix& x, Cache& cache) const {
    cache.acts.resize(layers_.size() + 1);
    cache.acts[0] = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const DenseLayer& layer = layers_[l];
      Matrix z = layer.weights(theta) * cache.acts[l];
      z.colwise() += layer.bias(theta);
      if (layer.activation == Activation::kTanh) z = tanh_fast(z);
      cache.acts[l + 1] = std::move(z);
    }
  }

  Matrix forward(const Vector& theta, const Matrix& x) const {
    Cache cache;
    forward(theta, x, cache);
    return std::move(cache.acts.back());
  }

  /// Reverse pass. Adds dL/dtheta into `grad` (same layout as theta) and
  /// returns dL/dx when `want_input_grad` is set.
  Matrix backward(const Vector& theta, const Cache& cache, Matrix d_out, Vector& grad, bool want_input_grad) const {
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const DenseLayer& layer = layers_[l];
      if (layer.activation == Activation::kTanh)
        d_out.array() *= 1.0 - cache.acts[l + 1].array().square();
      layer.weights(grad).noalias() += d_out * cache.acts[l].transpose();
      layer.bias(grad) += d_out.rowwise().sum();
      if (l > 0 || want_input_grad) d_out = layer.weights(theta).transpose() * d_out;
    }
    if (!want_input_grad) return {};
    return d_out;
  }

  /// Forward-mode pass at the cached point: directional derivative of the
  /// output along parameter tangent `v` and (optional) input tangent `dx`.
  Matrix jvp(const Vector& theta, const Vector& v, const Cache& cache, const Matrix* dx) const {
    Matrix da;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const DenseLayer& layer = layers_[l];
      Matrix dz = layer.weights(v) * cache.acts[l];
      dz.colwise() += layer.bias(v);
      if (l > 0) {
        dz.noalias() += layer.weights(theta) * da;
      } else if (dx != nullptr) {
        dz.noalias() += layer.weights(theta) * (*dx);
      }
      if (layer.activation == Activation::kTanh) dz.array() *= 1.0 - cache.acts[l + 1].array().square();
      da = std::move(dz);
    }
    return da;
  }

  /// Orthogonal weights (gain 1 on hidden layers, `output_gain` on the last),
  /// zero biases.
  void init(Vector& theta, double output_gain, Rng& rng) const {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const DenseLayer& layer = layers_[l];
      const double gain = l + 1 == layers_.size() ? output_gain : 1.0;
      layer.weights(theta) = orthogonal_matrix(layer.out, layer.in, gain, rng);
      layer.bias(theta).setZero();
    }
  }

 private:
  Index input_dim_ = 0;
  Index num_params_ = 0;
  std::vector<DenseLayer> layers_;
};

}  // namespace bpo::net
