#include "internal/net_util.hpp"
#include "internal/nets.hpp"

namespace ssbench::internal {

namespace {

// Graph features recomputed per layer in feature space; per-edge MLP on
// [h_i, h_j - h_i], max aggregation over the k neighbors.
class EdgeConvNet final : public Classifier {
 public:
  EdgeConvNet(const ClassifierSpec& spec, std::uint64_t init_seed) {
    spec.validate();
    spec_ = spec;
    Rng rng(init_seed);
    int in = 3;
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
      add_param("edge" + std::to_string(i) + ".W", he_init(2 * in, spec.widths[i], rng));
      add_param("edge" + std::to_string(i) + ".b",
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
  struct LayerTrace {
    Eigen::MatrixXi nbrs;      // N x k neighbor indices
    Eigen::MatrixXd edges;     // N*k x 2d edge features
    Eigen::MatrixXd edge_act;  // N*k x w activated edge outputs
    Eigen::MatrixXi argmax_j;  // N x w winning neighbor slot per channel
  };
  struct Trace {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input
    std::vector<LayerTrace> layers;
    HeadTrace head;
  };

  void add_param(const std::string& name, Eigen::MatrixXd value) {
    param_names_.push_back(name);
    params_.push_back(std::move(value));
  }

  void forward_trace(const Points& pts, Trace& trace) const {
    const int k = spec_.knn_k;
    const Eigen::Index n = pts.rows();
    const std::size_t layers = spec_.widths.size();
    trace.acts.resize(layers + 1);
    trace.layers.resize(layers);
    trace.acts[0] = pts;

    for (std::size_t l = 0; l < layers; ++l) {
      const Eigen::MatrixXd& h = trace.acts[l];
      const Eigen::Index d = h.cols();
      LayerTrace& lt = trace.layers[l];
      lt.nbrs = knn_indices(h, k);

      lt.edges.resize(n * k, 2 * d);
      for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
          const Eigen::Index row = i * k + j;
          lt.edges.block(row, 0, 1, d) = h.row(i);
          lt.edges.block(row, d, 1, d) = h.row(lt.nbrs(i, j)) - h.row(i);
        }

      lt.edge_act = dense_relu(lt.edges, params_[2 * l], params_[2 * l + 1]);

      const Eigen::Index w = lt.edge_act.cols();
      Eigen::MatrixXd& out = trace.acts[l + 1];
      out.resize(n, w);
      lt.argmax_j.resize(n, w);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < w; ++c) {
          int best = 0;
          double best_v = lt.edge_act(i * k, c);
          for (int j = 1; j < k; ++j) {
            const double v = lt.edge_act(i * k + j, c);
            if (v > best_v) {
              best_v = v;
              best = j;
            }
          }
          out(i, c) = best_v;
          lt.argmax_j(i, c) = best;
        }
    }
    const std::size_t h = 2 * layers;
    head_forward(trace.acts[layers], params_[h], params_[h + 1], params_[h + 2],
                 params_[h + 3], trace.head);
  }

  void backward(const Trace& trace, const Eigen::VectorXd& dlogits, TensorList* grads,
                Points* xgrad) const {
    const int k = spec_.knn_k;
    const std::size_t layers = spec_.widths.size();
    const std::size_t h = 2 * layers;
    Eigen::MatrixXd gact = head_backward(
        trace.acts[layers], params_[h], params_[h + 2], trace.head, dlogits,
        grads ? &(*grads)[h] : nullptr, grads ? &(*grads)[h + 1] : nullptr,
        grads ? &(*grads)[h + 2] : nullptr, grads ? &(*grads)[h + 3] : nullptr);

    for (std::size_t l = layers; l-- > 0;) {
      const LayerTrace& lt = trace.layers[l];
      const Eigen::Index n = trace.acts[l].rows();
      const Eigen::Index d = trace.acts[l].cols();
      const Eigen::Index w = lt.edge_act.cols();

      Eigen::MatrixXd gedge_act = Eigen::MatrixXd::Zero(n * k, w);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < w; ++c)
          gedge_act(i * k + lt.argmax_j(i, c), c) += gact(i, c);

      const Eigen::MatrixXd gpre =
          gedge_act.cwiseProduct((lt.edge_act.array() > 0.0).cast<double>().matrix());
      if (grads) {
        (*grads)[2 * l] += lt.edges.transpose() * gpre;
        (*grads)[2 * l + 1] += gpre.colwise().sum();
      }
      if (l == 0 && !xgrad) break;

      const Eigen::MatrixXd gedges = gpre * params_[2 * l].transpose();
      Eigen::MatrixXd gh = Eigen::MatrixXd::Zero(n, d);
      for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
          const Eigen::Index row = i * k + j;
          gh.row(i) += gedges.block(row, 0, 1, d) - gedges.block(row, d, 1, d);
          gh.row(lt.nbrs(i, j)) += gedges.block(row, d, 1, d);
        }
      gact = std::move(gh);
    }
    if (xgrad) *xgrad = gact;
  }
};

}  // namespace

std::unique_ptr<Classifier> make_edgeconv_net(const ClassifierSpec& spec,
                                              std::uint64_t init_seed) {
  return std::make_unique<EdgeConvNet>(spec, init_seed);
}

}  // namespace ssbench::internal
