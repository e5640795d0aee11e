#include <numeric>

#include "internal/adam.hpp"
#include "ssbench/models.hpp"

namespace ssbench {

namespace {

TensorList zeros_like(const TensorList& params) {
  TensorList out;
  out.reserve(params.size());
  for (const auto& t : params) out.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
  return out;
}

void check_splits(const Dataset& data) {
  if (data.train.empty()) throw Error("train: empty train split");
  if (data.test.empty()) throw Error("train: empty test split");
}

int resolve_workers(int workers) { return workers > 0 ? workers : default_workers(); }

// Per-sample gradients land in per-index slots and are reduced in index
// order, so results do not depend on the worker count.
template <typename PerSample>
double batched_grad(std::size_t count, int workers, const TensorList& params,
                    TensorList& grad_out, const PerSample& per_sample) {
  std::vector<TensorList> slots(count);
  std::vector<double> losses(count, 0.0);
  parallel_for(count, workers, [&](std::size_t i) {
    slots[i] = zeros_like(params);
    losses[i] = per_sample(i, slots[i]);
  });
  grad_out = zeros_like(params);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t t = 0; t < grad_out.size(); ++t) grad_out[t] += slots[i][t];
  const double inv = 1.0 / static_cast<double>(count);
  for (auto& t : grad_out) t *= inv;
  return std::accumulate(losses.begin(), losses.end(), 0.0) * inv;
}

}  // namespace

TrainReport train_classifier(Classifier& model, const Dataset& data,
                             const TrainOptions& opt) {
  check_splits(data);
  const int workers = resolve_workers(opt.workers);
  Rng order_rng(mix_seed(opt.rng_seed, 0x7141));

  internal::AdamList<Eigen::MatrixXd> adam(model.params());
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t count = std::min<std::size_t>(opt.batch_size, order.size() - start);
      TensorList grad;
      epoch_loss += batched_grad(count, workers, model.params(), grad,
                                 [&](std::size_t i, TensorList& slot) {
                                   const PointCloud& s = data.train[order[start + i]];
                                   bool correct = false;
                                   return model.ce_param_grad(s.points, s.label.value(),
                                                              slot, correct);
                                 });
      adam.step(model.params(), grad, opt.lr);
      ++batches;
    }
    report.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(batches));
  }

  // Checkpoint precision is float32; adopting it here makes a written
  // checkpoint reload to bit-identical parameters.
  quantize_params(model.params());

  std::vector<int> correct(data.test.size(), 0);
  parallel_for(data.test.size(), workers, [&](std::size_t i) {
    correct[i] = model.predict(data.test[i].points) == data.test[i].label.value() ? 1 : 0;
  });
  report.test_accuracy =
      std::accumulate(correct.begin(), correct.end(), 0) /
      static_cast<double>(data.test.size());

  if (!opt.checkpoint_path.empty()) save_classifier(opt.checkpoint_path, model);
  return report;
}

TrainReport train_autoencoder(Autoencoder& ae, const Dataset& data,
                              const TrainOptions& opt) {
  check_splits(data);
  const int workers = resolve_workers(opt.workers);
  Rng order_rng(mix_seed(opt.rng_seed, 0xAE00));

  internal::AdamList<Eigen::MatrixXd> adam(ae.params());
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t count = std::min<std::size_t>(opt.batch_size, order.size() - start);
      TensorList grad;
      epoch_loss += batched_grad(count, workers, ae.params(), grad,
                                 [&](std::size_t i, TensorList& slot) {
                                   const PointCloud& s = data.train[order[start + i]];
                                   return ae.chamfer_param_grad(s.points, slot);
                                 });
      adam.step(ae.params(), grad, opt.lr);
      ++batches;
    }
    report.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(batches));
  }

  quantize_params(ae.params());

  std::vector<double> errs(data.test.size(), 0.0);
  parallel_for(data.test.size(), workers, [&](std::size_t i) {
    errs[i] = chamfer(ae.reconstruct(data.test[i].points), data.test[i].points);
  });
  report.test_chamfer = std::accumulate(errs.begin(), errs.end(), 0.0) /
                        static_cast<double>(data.test.size());

  if (!opt.checkpoint_path.empty()) save_autoencoder(opt.checkpoint_path, ae);
  return report;
}

}  // namespace ssbench
