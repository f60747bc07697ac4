#include "tmest/gan.hpp"

#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

namespace tmest {

using nlohmann::json;

const char* to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "linear";
}

Activation parse_activation(const std::string& tag) {
  if (tag == "relu") return Activation::Relu;
  if (tag == "linear" || tag == "identity") return Activation::Linear;
  throw Error(ErrorCode::MalformedWeights, "unknown activation tag '" + tag + "'");
}

TrafficVector generator_forward(const GeneratorNet& net,
                                const Eigen::VectorXd& latent) {
  return TrafficVector(net.forward(latent).cwiseMax(0.0));
}

GanResult gan_estimate(const GeneratorNet& net, const SparseRowMatrix& a,
                       const Eigen::VectorXd& b, const GanEstimateConfig& config) {
  if (config.init_candidates < 1 || config.steps < 0 ||
      !(config.adam.learning_rate > 0.0)) {
    throw Error(ErrorCode::InvalidInput,
                "GAN-D needs init candidates >= 1, steps >= 0, learning rate > 0");
  }
  if (a.cols() != net.output_dim() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "generator outputs " + std::to_string(net.output_dim()) +
                    " demands but A is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()));
  }

  Rng rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GanResult result{TrafficVector::zero(0), {}};
  auto& diag = result.diagnostics;

  const auto dim = net.latent_dim();
  Eigen::VectorXd latent(dim);
  Eigen::VectorXd candidate(dim);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < config.init_candidates; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) candidate[k] = gauss(rng);
    const double loss = (a * net.forward(candidate) - b).squaredNorm();
    diag.candidate_losses.push_back(loss);
    if (loss < best || i == 0) {
      best = loss;
      latent = candidate;
      diag.chosen_candidate = static_cast<std::size_t>(i);
    }
  }

  Adam<double> adam(dim, config.adam);
  diag.best_loss = std::numeric_limits<double>::infinity();
  for (int step = 0;; ++step) {
    const auto lg = loss_and_latent_gradient(net, a, b, latent);
    diag.loss_trace.push_back(lg.loss);
    if (lg.loss < diag.best_loss) {
      diag.best_loss = lg.loss;
      diag.best_step = static_cast<std::size_t>(step);
      diag.best_latent = latent;
    }
    if (step == config.steps || !std::isfinite(lg.loss)) break;
    adam.step(latent, lg.gradient);
  }
  result.estimate = generator_forward(net, diag.best_latent);
  return result;
}

GanResult gan_estimate(const GeneratorNet& net, const RoutingMatrix& a,
                       const LinkLoadVector& b, const GanEstimateConfig& config) {
  return gan_estimate(net, a.matrix(), b.values(), config);
}

GeneratorNet parse_generator(const std::string& text) {
  try {
    const auto doc = json::parse(text);
    if (doc.at("format_version").get<int>() != 1) {
      throw Error(ErrorCode::MalformedWeights, "unsupported format_version");
    }
    const auto latent_dim = doc.at("latent_dim").get<long long>();
    const auto output_dim = doc.at("output_dim").get<long long>();
    const auto scale = doc.at("scale_mbps").get<double>();
    const auto hidden = parse_activation(doc.at("hidden_activation").get<std::string>());
    const auto output = parse_activation(doc.at("output_activation").get<std::string>());

    std::vector<DenseLayer<double>> layers;
    for (const auto& jl : doc.at("layers")) {
      const auto rows = jl.at("rows").get<long long>();
      const auto cols = jl.at("cols").get<long long>();
      const auto weights = jl.at("weights").get<std::vector<double>>();
      const auto bias = jl.at("bias").get<std::vector<double>>();
      if (rows < 1 || cols < 1 ||
          weights.size() != static_cast<std::size_t>(rows * cols) ||
          bias.size() != static_cast<std::size_t>(rows)) {
        throw Error(ErrorCode::MalformedWeights,
                    "layer " + std::to_string(layers.size()) +
                        ": rows/cols disagree with weights/bias lengths");
      }
      DenseLayer<double> layer;
      layer.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>>(weights.data(), rows, cols);
      layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), rows);
      layers.push_back(std::move(layer));
    }
    GeneratorNet net(latent_dim, std::move(layers), hidden, output, scale);
    if (net.output_dim() != output_dim) {
      throw Error(ErrorCode::MalformedWeights,
                  "declared output_dim " + std::to_string(output_dim) +
                      " but last layer has " + std::to_string(net.output_dim()) +
                      " rows");
    }
    return net;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedWeights, std::string("weight file: ") + e.what());
  }
}

GeneratorNet load_generator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_generator(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string serialize_generator(const GeneratorNet& net) {
  json doc;
  doc["format_version"] = 1;
  doc["latent_dim"] = net.latent_dim();
  doc["output_dim"] = net.output_dim();
  doc["scale_mbps"] = net.scale();
  doc["hidden_activation"] = to_string(net.hidden_activation());
  doc["output_activation"] = to_string(net.output_activation());
  json layers = json::array();
  for (const auto& l : net.layers()) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = l.weights;
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", std::vector<double>(w.data(), w.data() + w.size())},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump();
}

void save_generator(const GeneratorNet& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << serialize_generator(net) << '\n';
}

}  // namespace tmest
