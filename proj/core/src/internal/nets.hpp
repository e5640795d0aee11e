#pragma once

#include <memory>

#include "ssbench/models.hpp"

namespace ssbench::internal {

std::unique_ptr<Classifier> make_pointwise_net(const ClassifierSpec& spec,
                                               std::uint64_t init_seed);
std::unique_ptr<Classifier> make_edgeconv_net(const ClassifierSpec& spec,
                                              std::uint64_t init_seed);

// Shared classifier head: column-wise max pool, one hidden dense layer, one
// linear output layer.
struct HeadTrace {
  Eigen::RowVectorXd pooled;
  Eigen::VectorXi argmax_row;
  Eigen::RowVectorXd hidden;
  Eigen::VectorXd logits;
};

void head_forward(const Eigen::MatrixXd& features, const Eigen::MatrixXd& Wh,
                  const Eigen::MatrixXd& bh, const Eigen::MatrixXd& Wo,
                  const Eigen::MatrixXd& bo, HeadTrace& trace);

// Propagates dlogits back to the per-point features; parameter gradients are
// accumulated when the pointers are non-null.
Eigen::MatrixXd head_backward(const Eigen::MatrixXd& features, const Eigen::MatrixXd& Wh,
                              const Eigen::MatrixXd& Wo, const HeadTrace& trace,
                              const Eigen::VectorXd& dlogits, Eigen::MatrixXd* gWh,
                              Eigen::MatrixXd* gbh, Eigen::MatrixXd* gWo,
                              Eigen::MatrixXd* gbo);

}  // namespace ssbench::internal
