#ifndef TMEST_GAN_HPP
#define TMEST_GAN_HPP

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tmest/error.hpp"
#include "tmest/projd.hpp"
#include "tmest/tm.hpp"

namespace tmest {

enum class Activation { Relu, Linear };

const char* to_string(Activation a);
Activation parse_activation(const std::string& tag);

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weights;  // out x in
  VectorX<Scalar> bias;     // out
};

/// Fully connected generator: latent -> [affine, activation]* -> scale * out.
/// Hidden layers use `hidden`, the last layer uses `output`.
template <typename Scalar>
class BasicGeneratorNet {
 public:
  BasicGeneratorNet(Eigen::Index latent_dim, std::vector<DenseLayer<Scalar>> layers,
                    Activation hidden, Activation output, Scalar scale = Scalar(1))
      : latent_dim_(latent_dim),
        layers_(std::move(layers)),
        hidden_(hidden),
        output_(output),
        scale_(scale) {
    if (latent_dim_ < 1 || layers_.empty()) {
      throw Error(ErrorCode::MalformedWeights,
                  "generator needs latent_dim >= 1 and at least one layer");
    }
    Eigen::Index in = latent_dim_;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto& l = layers_[k];
      if (l.weights.cols() != in || l.bias.size() != l.weights.rows() ||
          l.weights.rows() < 1) {
        throw Error(ErrorCode::MalformedWeights,
                    "layer " + std::to_string(k) + " does not chain: expects " +
                        std::to_string(in) + " inputs, has " +
                        std::to_string(l.weights.rows()) + "x" +
                        std::to_string(l.weights.cols()) + " weights and " +
                        std::to_string(l.bias.size()) + " biases");
      }
      if (!l.weights.allFinite() || !l.bias.allFinite()) {
        throw Error(ErrorCode::MalformedWeights,
                    "layer " + std::to_string(k) + " has non-finite parameters");
      }
      in = l.weights.rows();
    }
    if (!(scale_ > Scalar(0)) || !std::isfinite(static_cast<double>(scale_))) {
      throw Error(ErrorCode::MalformedWeights, "scale must be positive and finite");
    }
  }

  Eigen::Index latent_dim() const { return latent_dim_; }
  Eigen::Index output_dim() const { return layers_.back().weights.rows(); }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  Scalar scale() const { return scale_; }

  Activation activation_of(std::size_t layer) const {
    return layer + 1 == layers_.size() ? output_ : hidden_;
  }

  /// Unclipped output T(latent), in Mbps.
  VectorX<Scalar> forward(const VectorX<Scalar>& latent) const {
    if (latent.size() != latent_dim_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "latent has " + std::to_string(latent.size()) +
                      " entries, generator expects " + std::to_string(latent_dim_));
    }
    VectorX<Scalar> a = latent;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      VectorX<Scalar> z = layers_[k].weights * a + layers_[k].bias;
      a = activation_of(k) == Activation::Relu ? z.cwiseMax(Scalar(0)) : z;
    }
    return scale_ * a;
  }

 private:
  Eigen::Index latent_dim_;
  std::vector<DenseLayer<Scalar>> layers_;
  Activation hidden_;
  Activation output_;
  Scalar scale_;
};

using GeneratorNet = BasicGeneratorNet<double>;

/// T(latent) as a demand vector. Negative outputs (possible only with a
/// linear output layer) are clipped to zero.
TrafficVector generator_forward(const GeneratorNet& net, const Eigen::VectorXd& latent);

template <typename Scalar>
struct LossGradient {
  Scalar loss;
  VectorX<Scalar> gradient;
};

/// L = ||b - A T(latent)||^2 and dL/dlatent by reverse-mode through the
/// layer chain; the ReLU derivative at 0 is taken as 0.
template <typename Scalar>
LossGradient<Scalar> loss_and_latent_gradient(const BasicGeneratorNet<Scalar>& net,
                                              const SparseRows<Scalar>& a,
                                              const VectorX<Scalar>& b,
                                              const VectorX<Scalar>& latent) {
  if (a.cols() != net.output_dim() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "generator outputs " + std::to_string(net.output_dim()) +
                    " demands but A is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()));
  }
  if (latent.size() != net.latent_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "latent dimension mismatch");
  }
  const auto& layers = net.layers();
  std::vector<VectorX<Scalar>> inputs;
  std::vector<VectorX<Scalar>> pre;
  inputs.reserve(layers.size());
  pre.reserve(layers.size());
  VectorX<Scalar> act = latent;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    inputs.push_back(act);
    pre.push_back(layers[k].weights * act + layers[k].bias);
    act = net.activation_of(k) == Activation::Relu ? pre.back().cwiseMax(Scalar(0))
                                                   : pre.back();
  }
  const VectorX<Scalar> out = net.scale() * act;
  const VectorX<Scalar> r = a * out - b;

  LossGradient<Scalar> lg{r.squaredNorm(), {}};
  VectorX<Scalar> upstream = Scalar(2) * net.scale() * (a.transpose() * r);
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (net.activation_of(k) == Activation::Relu) {
      upstream = (pre[k].array() > Scalar(0)).select(upstream, Scalar(0));
    }
    upstream = layers[k].weights.transpose() * upstream;
  }
  lg.gradient = std::move(upstream);
  return lg;
}

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction; one instance per optimized vector.
template <typename Scalar>
class Adam {
 public:
  Adam(Eigen::Index dim, const AdamOptions& options)
      : options_(options),
        m_(VectorX<Scalar>::Zero(dim)),
        v_(VectorX<Scalar>::Zero(dim)) {}

  void step(VectorX<Scalar>& params, const VectorX<Scalar>& grad) {
    ++t_;
    const Scalar b1(options_.beta1), b2(options_.beta2);
    m_ = b1 * m_ + (Scalar(1) - b1) * grad;
    v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(b1, Scalar(t_));
    const Scalar c2 = Scalar(1) - std::pow(b2, Scalar(t_));
    params.array() -= Scalar(options_.learning_rate) * (m_.array() / c1) /
                      ((v_.array() / c2).sqrt() + Scalar(options_.epsilon));
  }

 private:
  AdamOptions options_;
  VectorX<Scalar> m_;
  VectorX<Scalar> v_;
  long t_ = 0;
};

struct GanEstimateConfig {
  int init_candidates = 100;  // N_i
  int steps = 10000;          // N_2
  AdamOptions adam;
  std::uint64_t seed = 0;
};

struct GanDiagnostics {
  /// Loss of each initial candidate, in draw order.
  std::vector<double> candidate_losses;
  std::size_t chosen_candidate = 0;
  /// Loss at the iterate before each Adam step, plus the final iterate.
  std::vector<double> loss_trace;
  double best_loss = 0.0;
  /// Index into loss_trace of the returned iterate.
  std::size_t best_step = 0;
  Eigen::VectorXd best_latent;
};

struct GanResult {
  TrafficVector estimate;
  GanDiagnostics diagnostics;
};

/// Best-of-N_i Gaussian latent initialization followed by N_2 Adam descent
/// steps on ||b - A T(latent)||^2. Returns the lowest-loss iterate seen.
GanResult gan_estimate(const GeneratorNet& net, const SparseRowMatrix& a,
                       const Eigen::VectorXd& b, const GanEstimateConfig& config);
GanResult gan_estimate(const GeneratorNet& net, const RoutingMatrix& a,
                       const LinkLoadVector& b, const GanEstimateConfig& config);

/// Weight interchange file (JSON, format_version 1).
GeneratorNet load_generator(const std::filesystem::path& path);
GeneratorNet parse_generator(const std::string& text);
std::string serialize_generator(const GeneratorNet& net);
void save_generator(const GeneratorNet& net, const std::filesystem::path& path);

}  // namespace tmest

#endif  // TMEST_GAN_HPP
