#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ssbench/dataset.hpp"
#include "ssbench/geometry.hpp"

namespace ssbench {

using TensorList = std::vector<Eigen::MatrixXd>;

enum class Architecture { pointwise_maxpool, edge_conv };

std::string architecture_name(Architecture arch);
Architecture architecture_from_name(const std::string& name);

struct ClassifierSpec {
  Architecture architecture = Architecture::pointwise_maxpool;
  std::vector<int> widths = {64, 128, 256};
  int head_width = 128;
  int num_classes = 8;
  int knn_k = 10;  // edge-conv only

  void validate() const;
};

// Scalar loss of the logits vector; fills d(loss)/d(logits) when the pointer
// is non-null.
using LogitsLoss = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

// Deterministic, permutation-invariant point-cloud classifier with exact
// input gradients (backprop; kNN graphs and max-pool selections are held
// fixed at the evaluation point, the a.e.-correct subgradient).
class Classifier {
 public:
  virtual ~Classifier() = default;

  const ClassifierSpec& spec() const { return spec_; }

  Eigen::VectorXd logits(const Points& pts) const;
  Eigen::VectorXd logits(const PointCloud& cloud) const { return logits(cloud.points); }
  int predict(const Points& pts) const;

  // Returns loss(logits(pts)) and writes its gradient with respect to every
  // coordinate into grad (N x 3). logits_out, when non-null, receives the
  // logits of the same forward pass.
  double input_gradient(const Points& pts, const LogitsLoss& loss, Points& grad,
                        Eigen::VectorXd* logits_out = nullptr) const;

  // Accumulates d(cross-entropy)/d(params) for one sample into grads (same
  // shapes as params()); returns the sample loss and whether argmax == label.
  virtual double ce_param_grad(const Points& pts, int label, TensorList& grads,
                               bool& correct) const = 0;

  TensorList& params() { return params_; }
  const TensorList& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return param_names_; }

 protected:
  virtual Eigen::VectorXd forward_impl(const Points& pts) const = 0;
  virtual double input_gradient_impl(const Points& pts, const LogitsLoss& loss,
                                     Points& grad, Eigen::VectorXd* logits_out) const = 0;
  void validate_input(const Points& pts) const;

  ClassifierSpec spec_;
  TensorList params_;
  std::vector<std::string> param_names_;
};

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec,
                                            std::uint64_t init_seed);

struct AutoencoderSpec {
  int latent_dim = 128;
  int decoder_points = 256;  // must equal the N it reconstructs
  int encoder_hidden = 64;
  int decoder_hidden = 256;

  void validate() const;
};

// Pointwise encoder + max-pool to the latent code, MLP decoder back to N x 3.
class Autoencoder {
 public:
  Autoencoder(const AutoencoderSpec& spec, std::uint64_t init_seed);

  const AutoencoderSpec& spec() const { return spec_; }

  Points reconstruct(const Points& pts) const;

  // d(scalar)/d(input) given d(scalar)/d(reconstruction); differentiable
  // pass-through used by losses that attack the reconstruction.
  Points input_backward(const Points& pts, const Points& grad_recon) const;

  // chamfer(reconstruct(pts), pts) parameter gradient, accumulated into grads.
  double chamfer_param_grad(const Points& pts, TensorList& grads) const;

  TensorList& params() { return params_; }
  const TensorList& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return param_names_; }

 private:
  struct Trace;
  Points forward(const Points& pts, Trace* trace) const;
  void validate_input(const Points& pts) const;

  AutoencoderSpec spec_;
  TensorList params_;
  std::vector<std::string> param_names_;
};

// Symmetric mean of squared nearest-neighbor distances, a->b plus b->a.
double chamfer(const Points& a, const Points& b);
// Same value; also writes d(chamfer)/d(a).
double chamfer_with_grad(const Points& a, const Points& b, Points& grad_a);

struct TrainOptions {
  int epochs = 50;
  double lr = 1e-3;
  int batch_size = 32;
  std::uint64_t rng_seed = 0;
  int workers = 0;  // 0 -> hardware concurrency
  std::filesystem::path checkpoint_path;  // empty -> no checkpoint written
};

struct TrainReport {
  double test_accuracy = 0.0;  // classifier runs
  double test_chamfer = 0.0;   // autoencoder runs
  std::vector<double> epoch_mean_loss;
};

// Adam on mini-batch cross-entropy. After the last epoch the weights are
// rounded to float32 (the checkpoint precision), so a written checkpoint
// reloads to bit-identical parameters and logits.
TrainReport train_classifier(Classifier& model, const Dataset& data,
                             const TrainOptions& opt);
TrainReport train_autoencoder(Autoencoder& ae, const Dataset& data,
                              const TrainOptions& opt);

// "ckpt-v1" container: JSON header (version, architecture spec, tensor
// shapes) followed by little-endian float32 blobs.
void save_classifier(const std::filesystem::path& path, const Classifier& model);
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path);
void save_autoencoder(const std::filesystem::path& path, const Autoencoder& ae);
std::unique_ptr<Autoencoder> load_autoencoder(const std::filesystem::path& path);

// Rounds every parameter through float32.
void quantize_params(TensorList& params);

// Softmax cross-entropy of a label; standard training/evaluation loss.
double cross_entropy(const Eigen::VectorXd& logits, int label,
                     Eigen::VectorXd* dlogits = nullptr);

}  // namespace ssbench
