#include "internal/net_util.hpp"
#include "internal/nets.hpp"

namespace ssbench::internal {

void head_forward(const Eigen::MatrixXd& features, const Eigen::MatrixXd& Wh,
                  const Eigen::MatrixXd& bh, const Eigen::MatrixXd& Wo,
                  const Eigen::MatrixXd& bo, HeadTrace& trace) {
  const Eigen::Index d = features.cols();
  trace.pooled.resize(d);
  trace.argmax_row.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index row = 0;
    trace.pooled(c) = features.col(c).maxCoeff(&row);
    trace.argmax_row(c) = static_cast<int>(row);
  }
  trace.hidden = dense_relu(trace.pooled, Wh, bh);
  trace.logits = dense_linear(trace.hidden, Wo, bo).transpose();
}

Eigen::MatrixXd head_backward(const Eigen::MatrixXd& features, const Eigen::MatrixXd& Wh,
                              const Eigen::MatrixXd& Wo, const HeadTrace& trace,
                              const Eigen::VectorXd& dlogits, Eigen::MatrixXd* gWh,
                              Eigen::MatrixXd* gbh, Eigen::MatrixXd* gWo,
                              Eigen::MatrixXd* gbo) {
  if (gWo) *gWo += trace.hidden.transpose() * dlogits.transpose();
  if (gbo) *gbo += dlogits.transpose();

  Eigen::RowVectorXd ghidden = (Wo * dlogits).transpose();
  ghidden = ghidden.cwiseProduct((trace.hidden.array() > 0.0).cast<double>().matrix());
  if (gWh) *gWh += trace.pooled.transpose() * ghidden;
  if (gbh) *gbh += ghidden;

  const Eigen::RowVectorXd gpooled = ghidden * Wh.transpose();
  Eigen::MatrixXd gfeat = Eigen::MatrixXd::Zero(features.rows(), features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c)
    gfeat(trace.argmax_row(c), c) += gpooled(c);
  return gfeat;
}

namespace {

// Shared per-point MLP, column-wise max pool, dense head.
class PointwiseMaxpoolNet final : public Classifier {
 public:
  PointwiseMaxpoolNet(const ClassifierSpec& spec, std::uint64_t init_seed) {
    spec.validate();
    spec_ = spec;
    Rng rng(init_seed);
    int in = 3;
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
      add_param("mlp" + std::to_string(i) + ".W", he_init(in, spec.widths[i], rng));
      add_param("mlp" + std::to_string(i) + ".b",
                Eigen::MatrixXd::Zero(1, spec.widths[i]));
      in = spec.widths[i];
    }
    add_param("head.W", he_init(in, spec.head_width, rng));
    add_param("head.b", Eigen::MatrixXd::Zero(1, spec.head_width));
    add_param("out.W", he_init(spec.head_width, spec.num_classes, rng));
    add_param("out.b", Eigen::MatrixXd::Zero(1, spec.num_classes));
  }

  double ce_param_grad(const Points& pts, int label, TensorList& grads,
                       bool& correct) const override {
    validate_input(pts);
    Trace trace;
    forward_trace(pts, trace);
    Eigen::VectorXd dz;
    const double loss = cross_entropy(trace.head.logits, label, &dz);
    Eigen::Index pred = 0;
    trace.head.logits.maxCoeff(&pred);
    correct = (static_cast<int>(pred) == label);
    backward(trace, dz, &grads, nullptr);
    return loss;
  }

 protected:
  Eigen::VectorXd forward_impl(const Points& pts) const override {
    Trace trace;
    forward_trace(pts, trace);
    return trace.head.logits;
  }

  double input_gradient_impl(const Points& pts, const LogitsLoss& loss, Points& grad,
                             Eigen::VectorXd* logits_out) const override {
    Trace trace;
    forward_trace(pts, trace);
    if (logits_out) *logits_out = trace.head.logits;
    Eigen::VectorXd dz;
    const double value = loss(trace.head.logits, &dz);
    backward(trace, dz, nullptr, &grad);
    return value;
  }

 private:
  struct Trace {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[i] = layer i output
    HeadTrace head;
  };

  void add_param(const std::string& name, Eigen::MatrixXd value) {
    param_names_.push_back(name);
    params_.push_back(std::move(value));
  }

  void forward_trace(const Points& pts, Trace& trace) const {
    const std::size_t layers = spec_.widths.size();
    trace.acts.resize(layers + 1);
    trace.acts[0] = pts;
    for (std::size_t i = 0; i < layers; ++i)
      trace.acts[i + 1] = dense_relu(trace.acts[i], params_[2 * i], params_[2 * i + 1]);
    const std::size_t h = 2 * layers;
    head_forward(trace.acts[layers], params_[h], params_[h + 1], params_[h + 2],
                 params_[h + 3], trace.head);
  }

  void backward(const Trace& trace, const Eigen::VectorXd& dlogits, TensorList* grads,
                Points* xgrad) const {
    const std::size_t layers = spec_.widths.size();
    const std::size_t h = 2 * layers;
    Eigen::MatrixXd gact = head_backward(
        trace.acts[layers], params_[h], params_[h + 2], trace.head, dlogits,
        grads ? &(*grads)[h] : nullptr, grads ? &(*grads)[h + 1] : nullptr,
        grads ? &(*grads)[h + 2] : nullptr, grads ? &(*grads)[h + 3] : nullptr);

    for (std::size_t i = layers; i-- > 0;) {
      const Eigen::MatrixXd gpre =
          gact.cwiseProduct((trace.acts[i + 1].array() > 0.0).cast<double>().matrix());
      if (grads) {
        (*grads)[2 * i] += trace.acts[i].transpose() * gpre;
        (*grads)[2 * i + 1] += gpre.colwise().sum();
      }
      if (i > 0 || xgrad) gact = gpre * params_[2 * i].transpose();
    }
    if (xgrad) *xgrad = gact;
  }
};

}  // namespace

std::unique_ptr<Classifier> make_pointwise_net(const ClassifierSpec& spec,
                                               std::uint64_t init_seed) {
  return std::make_unique<PointwiseMaxpoolNet>(spec, init_seed);
}

}  // namespace ssbench::internal
