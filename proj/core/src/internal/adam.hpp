#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

namespace ssbench::internal {

// Adaptive-moment estimation on one matrix of parameters.
template <typename Mat>
class Adam {
 public:
  explicit Adam(const Mat& like)
      : m_(Mat::Zero(like.rows(), like.cols())), v_(Mat::Zero(like.rows(), like.cols())) {}

  void step(Mat& x, const Mat& grad, double lr, double beta1 = 0.9,
            double beta2 = 0.999, double eps = 1e-8) {
    ++t_;
    m_ = beta1 * m_ + (1.0 - beta1) * grad;
    v_ = beta2 * v_ + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    x.array() -= lr * (m_.array() / bc1) /
                 ((v_.array() / bc2).sqrt() + eps);
  }

 private:
  Mat m_, v_;
  long t_ = 0;
};

template <typename Mat>
class AdamList {
 public:
  explicit AdamList(const std::vector<Mat>& like) {
    states_.reserve(like.size());
    for (const auto& t : like) states_.emplace_back(t);
  }

  void step(std::vector<Mat>& params, const std::vector<Mat>& grads, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i)
      states_[i].step(params[i], grads[i], lr);
  }

 private:
  std::vector<Adam<Mat>> states_;
};

}  // namespace ssbench::internal
