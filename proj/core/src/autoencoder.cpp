#include "internal/net_util.hpp"
#include "ssbench/models.hpp"

namespace ssbench {

using internal::dense_linear;
using internal::dense_relu;
using internal::he_init;

void AutoencoderSpec::validate() const {
  if (latent_dim < 1) throw Error("autoencoder spec: latent_dim < 1");
  if (decoder_points < 1) throw Error("autoencoder spec: decoder_points < 1");
  if (encoder_hidden < 1 || decoder_hidden < 1)
    throw Error("autoencoder spec: non-positive hidden width");
}

struct Autoencoder::Trace {
  Eigen::MatrixXd enc1, enc2;   // per-point activations
  Eigen::RowVectorXd latent;    // pooled code
  Eigen::VectorXi argmax_row;   // pooling winners
  Eigen::RowVectorXd dec1;      // decoder hidden
  Eigen::RowVectorXd flat;      // 1 x 3N output
};

Autoencoder::Autoencoder(const AutoencoderSpec& spec, std::uint64_t init_seed)
    : spec_(spec) {
  spec.validate();
  Rng rng(init_seed);
  const int out = 3 * spec.decoder_points;
  const auto add = [&](const std::string& name, Eigen::MatrixXd value) {
    param_names_.push_back(name);
    params_.push_back(std::move(value));
  };
  add("enc1.W", he_init(3, spec.encoder_hidden, rng));
  add("enc1.b", Eigen::MatrixXd::Zero(1, spec.encoder_hidden));
  add("enc2.W", he_init(spec.encoder_hidden, spec.latent_dim, rng));
  add("enc2.b", Eigen::MatrixXd::Zero(1, spec.latent_dim));
  add("dec1.W", he_init(spec.latent_dim, spec.decoder_hidden, rng));
  add("dec1.b", Eigen::MatrixXd::Zero(1, spec.decoder_hidden));
  add("dec2.W", he_init(spec.decoder_hidden, out, rng));
  add("dec2.b", Eigen::MatrixXd::Zero(1, out));
}

void Autoencoder::validate_input(const Points& pts) const {
  check_finite(pts, "autoencoder");
  if (pts.rows() != spec_.decoder_points)
    throw Error("autoencoder: N mismatch (got " + std::to_string(pts.rows()) +
                ", expected " + std::to_string(spec_.decoder_points) + ")");
}

Points Autoencoder::forward(const Points& pts, Trace* trace) const {
  Trace local;
  Trace& t = trace ? *trace : local;
  t.enc1 = dense_relu(pts, params_[0], params_[1]);
  t.enc2 = dense_relu(t.enc1, params_[2], params_[3]);

  const Eigen::Index d = t.enc2.cols();
  t.latent.resize(d);
  t.argmax_row.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index row = 0;
    t.latent(c) = t.enc2.col(c).maxCoeff(&row);
    t.argmax_row(c) = static_cast<int>(row);
  }
  t.dec1 = dense_relu(t.latent, params_[4], params_[5]);
  t.flat = dense_linear(t.dec1, params_[6], params_[7]);

  Points recon(spec_.decoder_points, 3);
  for (int i = 0; i < spec_.decoder_points; ++i)
    for (int c = 0; c < 3; ++c) recon(i, c) = t.flat(3 * i + c);
  return recon;
}

Points Autoencoder::reconstruct(const Points& pts) const {
  validate_input(pts);
  return forward(pts, nullptr);
}

Points Autoencoder::input_backward(const Points& pts, const Points& grad_recon) const {
  validate_input(pts);
  Trace t;
  forward(pts, &t);

  Eigen::RowVectorXd gflat(3 * spec_.decoder_points);
  for (int i = 0; i < spec_.decoder_points; ++i)
    for (int c = 0; c < 3; ++c) gflat(3 * i + c) = grad_recon(i, c);

  Eigen::RowVectorXd gdec1 = gflat * params_[6].transpose();
  gdec1 = gdec1.cwiseProduct((t.dec1.array() > 0.0).cast<double>().matrix());
  const Eigen::RowVectorXd glatent = gdec1 * params_[4].transpose();

  Eigen::MatrixXd genc2 = Eigen::MatrixXd::Zero(t.enc2.rows(), t.enc2.cols());
  for (Eigen::Index c = 0; c < t.enc2.cols(); ++c)
    genc2(t.argmax_row(c), c) += glatent(c);
  genc2 = genc2.cwiseProduct((t.enc2.array() > 0.0).cast<double>().matrix());

  Eigen::MatrixXd genc1 = genc2 * params_[2].transpose();
  genc1 = genc1.cwiseProduct((t.enc1.array() > 0.0).cast<double>().matrix());
  return genc1 * params_[0].transpose();
}

double Autoencoder::chamfer_param_grad(const Points& pts, TensorList& grads) const {
  validate_input(pts);
  Trace t;
  const Points recon = forward(pts, &t);
  Points grad_recon;
  const double loss = chamfer_with_grad(recon, pts, grad_recon);

  Eigen::RowVectorXd gflat(3 * spec_.decoder_points);
  for (int i = 0; i < spec_.decoder_points; ++i)
    for (int c = 0; c < 3; ++c) gflat(3 * i + c) = grad_recon(i, c);

  grads[6] += t.dec1.transpose() * gflat;
  grads[7] += gflat;
  Eigen::RowVectorXd gdec1 = gflat * params_[6].transpose();
  gdec1 = gdec1.cwiseProduct((t.dec1.array() > 0.0).cast<double>().matrix());
  grads[4] += t.latent.transpose() * gdec1;
  grads[5] += gdec1;

  const Eigen::RowVectorXd glatent = gdec1 * params_[4].transpose();
  Eigen::MatrixXd genc2 = Eigen::MatrixXd::Zero(t.enc2.rows(), t.enc2.cols());
  for (Eigen::Index c = 0; c < t.enc2.cols(); ++c)
    genc2(t.argmax_row(c), c) += glatent(c);
  genc2 = genc2.cwiseProduct((t.enc2.array() > 0.0).cast<double>().matrix());
  grads[2] += t.enc1.transpose() * genc2;
  grads[3] += genc2.colwise().sum();

  Eigen::MatrixXd genc1 = genc2 * params_[2].transpose();
  genc1 = genc1.cwiseProduct((t.enc1.array() > 0.0).cast<double>().matrix());
  grads[0] += pts.transpose() * genc1;
  grads[1] += genc1.colwise().sum();
  return loss;
}

}  // namespace ssbench
