#include "wslab/weasel/model.hpp"

#include "wslab/nn/functional.hpp"

namespace wslab::weasel {

Matrix WeaselModel::predict(const Matrix& features) { return nn::softmax(downstream.predict(features)); }

Matrix WeaselModel::encoder_posterior(const Matrix& votes, const Matrix& features) {
  return encoder.posterior(votes, features, prior);
}

nn::Mlp make_downstream(const DownstreamConfig& config, Index feature_dims, int num_classes, double dropout,
                        std::uint64_t seed) {
  Rng rng(derive_seed(seed, 2));
  nn::MlpSpec spec;
  spec.input_dim = feature_dims;
  spec.hidden = config.hidden;
  spec.output_dim = num_classes;
  spec.batchnorm = config.batchnorm;
  spec.dropout = dropout;
  return nn::Mlp(spec, rng);
}

WeaselModel make_weasel_model(const WeaselConfig& config, Index num_lfs, int num_classes, Index feature_dims,
                              std::uint64_t seed) {
  WeaselModel model;
  Rng enc_rng(derive_seed(seed, 1));
  model.encoder = EncoderHead(num_lfs, num_classes, feature_dims, config.encoder, config.dropout, enc_rng);
  model.downstream = make_downstream(config.downstream, feature_dims, num_classes, config.dropout, seed);
  model.prior = config.prior.empty() ? std::vector<double>(static_cast<std::size_t>(num_classes), 1.0 / num_classes)
                                     : config.prior;
  if (static_cast<int>(model.prior.size()) != num_classes) throw InvalidInput("weasel: prior must have C entries");
  double total = 0.0;
  for (const double p : model.prior) {
    if (!(p > 0.0)) throw InvalidInput("weasel: prior entries must be positive");
    total += p;
  }
  for (double& p : model.prior) p /= total;
  model.loss = config.loss;
  return model;
}

nlohmann::json checkpoint_json(const WeaselModel& model) {
  return {{"encoder", nn::to_json(model.encoder.body())},
          {"downstream", nn::to_json(model.downstream)},
          {"prior", model.prior},
          {"loss", to_string(model.loss)},
          {"tau1", model.encoder.inverse_temperature()},
          {"tau2", model.encoder.scale()},
          {"accuracy_activation", to_string(model.encoder.config().activation)},
          {"class_conditional", model.encoder.config().class_conditional},
          {"use_features", model.encoder.config().use_features}};
}

}  // namespace wslab::weasel
