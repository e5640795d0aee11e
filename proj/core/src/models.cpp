#include "ssbench/models.hpp"

#include <cmath>

#include "internal/net_util.hpp"
#include "internal/nets.hpp"

namespace ssbench {

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec,
                                            std::uint64_t init_seed) {
  switch (spec.architecture) {
    case Architecture::pointwise_maxpool:
      return internal::make_pointwise_net(spec, init_seed);
    case Architecture::edge_conv:
      return internal::make_edgeconv_net(spec, init_seed);
  }
  throw Error("unknown architecture");
}

std::string architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::pointwise_maxpool: return "pointwise-maxpool";
    case Architecture::edge_conv: return "edge-conv";
  }
  throw Error("unknown architecture");
}

Architecture architecture_from_name(const std::string& name) {
  if (name == "pointwise-maxpool") return Architecture::pointwise_maxpool;
  if (name == "edge-conv") return Architecture::edge_conv;
  throw Error("unknown architecture \"" + name + "\"");
}

void ClassifierSpec::validate() const {
  if (num_classes < 2) throw Error("classifier spec: num_classes < 2");
  if (widths.empty()) throw Error("classifier spec: widths empty");
  for (int w : widths)
    if (w < 1) throw Error("classifier spec: non-positive width");
  if (head_width < 1) throw Error("classifier spec: non-positive head width");
  if (architecture == Architecture::edge_conv && knn_k < 1)
    throw Error("classifier spec: knn_k < 1");
}

void Classifier::validate_input(const Points& pts) const {
  if (pts.rows() < 1) throw Error("classifier: empty cloud");
  if (!pts.allFinite()) throw Error("classifier: non-finite input");
  if (spec_.architecture == Architecture::edge_conv && pts.rows() <= spec_.knn_k)
    throw Error("edge-conv requires N > knn_k (N=" + std::to_string(pts.rows()) +
                ", k=" + std::to_string(spec_.knn_k) + ")");
}

Eigen::VectorXd Classifier::logits(const Points& pts) const {
  validate_input(pts);
  return forward_impl(pts);
}

int Classifier::predict(const Points& pts) const {
  int best = 0;
  logits(pts).maxCoeff(&best);
  return best;
}

double Classifier::input_gradient(const Points& pts, const LogitsLoss& loss,
                                  Points& grad, Eigen::VectorXd* logits_out) const {
  validate_input(pts);
  return input_gradient_impl(pts, loss, grad, logits_out);
}

double cross_entropy(const Eigen::VectorXd& logits, int label, Eigen::VectorXd* dlogits) {
  if (label < 0 || label >= logits.size()) throw Error("cross_entropy: label out of range");
  const double zmax = logits.maxCoeff();
  const Eigen::ArrayXd shifted = logits.array() - zmax;
  const Eigen::ArrayXd expz = shifted.exp();
  const double denom = expz.sum();
  const double loss = std::log(denom) - shifted(label);
  if (dlogits) {
    *dlogits = (expz / denom).matrix();
    (*dlogits)(label) -= 1.0;
  }
  return loss;
}

namespace {

// For each row of a, the squared distance to (and index of) its nearest row
// in b. Plain differences, ascending scan: bit-identical to any brute-force
// reimplementation with the same structure.
void nearest_sq(const Points& a, const Points& b, Eigen::VectorXd& dist,
                Eigen::VectorXi& idx) {
  const Eigen::Index na = a.rows(), nb = b.rows();
  dist.resize(na);
  idx.resize(na);
  for (Eigen::Index i = 0; i < na; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = 0;
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double d = (a.row(i) - b.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    dist(i) = best;
    idx(i) = static_cast<int>(best_j);
  }
}

double index_order_mean(const Eigen::VectorXd& v) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += v(i);
  return acc / static_cast<double>(v.size());
}

}  // namespace

double chamfer(const Points& a, const Points& b) {
  if (a.rows() < 1 || b.rows() < 1) throw Error("chamfer: empty cloud");
  Eigen::VectorXd dab, dba;
  Eigen::VectorXi iab, iba;
  nearest_sq(a, b, dab, iab);
  nearest_sq(b, a, dba, iba);
  return index_order_mean(dab) + index_order_mean(dba);
}

double chamfer_with_grad(const Points& a, const Points& b, Points& grad_a) {
  if (a.rows() < 1 || b.rows() < 1) throw Error("chamfer: empty cloud");
  Eigen::VectorXd dab, dba;
  Eigen::VectorXi iab, iba;
  nearest_sq(a, b, dab, iab);
  nearest_sq(b, a, dba, iba);
  grad_a = Points::Zero(a.rows(), 3);
  const double wa = 2.0 / static_cast<double>(a.rows());
  const double wb = 2.0 / static_cast<double>(b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    grad_a.row(i) += wa * (a.row(i) - b.row(iab(i)));
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    grad_a.row(iba(j)) += wb * (a.row(iba(j)) - b.row(j));
  return dab.mean() + dba.mean();
}

void quantize_params(TensorList& params) {
  for (auto& t : params)
    t = t.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

}  // namespace ssbench
