#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "ssbench/models.hpp"

using namespace ssbench;
using test_helpers::fd_gradient;
using test_helpers::max_rel_error;
using test_helpers::random_cloud;
using test_helpers::TempDir;

namespace {

// O(N^2) reference, written independently of the library path
double chamfer_oracle(const Points& a, const Points& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      best = std::min(best, (a.row(i) - b.row(j)).squaredNorm());
    total += best / static_cast<double>(a.rows());
  }
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      best = std::min(best, (a.row(i) - b.row(j)).squaredNorm());
    total += best / static_cast<double>(b.rows());
  }
  return total;
}

LogitsLoss sum_of_logits() {
  return [](const Eigen::VectorXd& z, Eigen::VectorXd* dz) {
    if (dz) *dz = Eigen::VectorXd::Ones(z.size());
    return z.sum();
  };
}

LogitsLoss ce_of(int label) {
  return [label](const Eigen::VectorXd& z, Eigen::VectorXd* dz) {
    return cross_entropy(z, label, dz);
  };
}

std::unique_ptr<Classifier> small_model(Architecture arch, std::uint64_t seed,
                                        int classes = 5) {
  ClassifierSpec spec;
  spec.architecture = arch;
  spec.widths = arch == Architecture::edge_conv ? std::vector<int>{8, 16}
                                                : std::vector<int>{16, 32};
  spec.head_width = 24;
  spec.num_classes = classes;
  spec.knn_k = 5;
  return make_classifier(spec, seed);
}

}  // namespace

TEST_SUITE_BEGIN("models");

TEST_CASE("forward is permutation invariant") {
  for (Architecture arch : {Architecture::pointwise_maxpool, Architecture::edge_conv}) {
    const auto model = small_model(arch, 3);
    const PointCloud c = random_cloud(48, 17);
    const Eigen::VectorXd base = model->logits(c.points);

    Rng rng(5);
    std::vector<int> perm(48);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Points shuffled(48, 3);
    for (int i = 0; i < 48; ++i) shuffled.row(i) = c.points.row(perm[i]);

    const Eigen::VectorXd out = model->logits(shuffled);
    CHECK((out - base).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("forward rejects invalid input") {
  const auto model = small_model(Architecture::pointwise_maxpool, 1);
  Points bad(2, 3);
  bad << 1, 2, std::numeric_limits<double>::quiet_NaN(), 0, 0, 0;
  CHECK_THROWS_WITH_AS(model->logits(bad), doctest::Contains("non-finite"), Error);

  const auto ec = small_model(Architecture::edge_conv, 1);
  const PointCloud tiny = random_cloud(4, 3);  // N=4 <= k=5
  CHECK_THROWS_WITH_AS(ec->logits(tiny.points), doctest::Contains("knn_k"), Error);
}

TEST_CASE("constant loss gives zero gradient") {
  const auto model = small_model(Architecture::pointwise_maxpool, 2);
  const PointCloud c = random_cloud(32, 4);
  const LogitsLoss constant = [](const Eigen::VectorXd&, Eigen::VectorXd* dz) {
    if (dz) *dz = Eigen::VectorXd::Zero(5);
    return 3.5;
  };
  Points grad;
  const double value = model->input_gradient(c.points, constant, grad);
  CHECK(value == 3.5);
  CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("input gradient matches finite differences") {
  int checked = 0;
  for (int t = 0; t < 10; ++t) {
    const Architecture arch =
        t % 2 == 0 ? Architecture::pointwise_maxpool : Architecture::edge_conv;
    const auto model = small_model(arch, 100 + t);
    const PointCloud c = random_cloud(24, 200 + t);
    const LogitsLoss loss = t % 3 == 0 ? sum_of_logits() : ce_of(t % 5);

    Points analytic;
    model->input_gradient(c.points, loss, analytic);
    const Points fd = fd_gradient(c.points, [&](const Points& p) {
      return loss(model->logits(p), nullptr);
    });
    CHECK(max_rel_error(analytic, fd) < 1e-3);
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("gradient of an all-active linear configuration is exact") {
  // weights >= 0 and large positive biases keep every relu active and the
  // max-pool selection fixed, making the network affine in the input
  ClassifierSpec spec;
  spec.widths = {4};
  spec.head_width = 3;
  spec.num_classes = 2;
  auto model = make_classifier(spec, 1);
  TensorList& p = model->params();
  Rng rng(9);
  for (std::size_t t = 0; t < p.size(); t += 2)
    for (Eigen::Index i = 0; i < p[t].rows(); ++i)
      for (Eigen::Index j = 0; j < p[t].cols(); ++j) p[t](i, j) = rng.uniform(0.1, 1.0);
  p[1].setConstant(50.0);  // mlp bias
  p[3].setConstant(50.0);  // head bias
  p[5].setConstant(0.0);   // output bias

  Points x(1, 3);  // single point: the pool picks it with weight 1
  x << 0.3, -0.2, 0.5;
  Points grad;
  model->input_gradient(x, sum_of_logits(), grad);

  // d(sum logits)/dx = W1 Wh Wo 1
  const Eigen::Vector3d expected = p[0] * (p[2] * (p[4] * Eigen::VectorXd::Ones(2)));
  CHECK((grad.row(0).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("chamfer basics and brute-force oracle") {
  const PointCloud a = random_cloud(40, 31);
  CHECK(chamfer(a.points, a.points) == 0.0);

  Points p1(1, 3), p2(1, 3);
  p1 << 0, 0, 0;
  p2 << 1, 0, 0;
  CHECK(chamfer(p1, p2) == doctest::Approx(2.0));

  for (int t = 0; t < 5; ++t) {
    const PointCloud u = random_cloud(33, 50 + t);
    const PointCloud v = random_cloud(47, 60 + t);
    CHECK(chamfer(u.points, v.points) == chamfer_oracle(u.points, v.points));
    CHECK(chamfer(u.points, v.points) == chamfer(v.points, u.points));
    CHECK(chamfer(u.points, v.points) > 0.0);
  }
}

TEST_CASE("chamfer gradient matches finite differences") {
  const PointCloud a = random_cloud(20, 71);
  const PointCloud b = random_cloud(25, 72);
  Points analytic;
  chamfer_with_grad(a.points, b.points, analytic);
  const Points fd =
      fd_gradient(a.points, [&](const Points& p) { return chamfer(p, b.points); }, 1e-5);
  CHECK(max_rel_error(analytic, fd) < 1e-3);
}

TEST_CASE("autoencoder shape contract and gradients") {
  AutoencoderSpec spec;
  spec.latent_dim = 16;
  spec.decoder_points = 24;
  spec.encoder_hidden = 12;
  spec.decoder_hidden = 20;
  Autoencoder ae(spec, 5);

  const PointCloud c = random_cloud(24, 80);
  const Points recon = ae.reconstruct(c.points);
  CHECK(recon.rows() == 24);
  CHECK(recon.allFinite());

  const PointCloud wrong = random_cloud(23, 81);
  CHECK_THROWS_WITH_AS(ae.reconstruct(wrong.points), doctest::Contains("N mismatch"),
                       Error);

  // d chamfer(recon(x), target) / dx via the input-backward path
  const PointCloud target = random_cloud(24, 82);
  const auto loss_of = [&](const Points& p) {
    return chamfer(ae.reconstruct(p), target.points);
  };
  Points grad_recon;
  chamfer_with_grad(ae.reconstruct(c.points), target.points, grad_recon);
  const Points analytic = ae.input_backward(c.points, grad_recon);
  const Points fd = fd_gradient(c.points, loss_of);
  CHECK(max_rel_error(analytic, fd) < 1e-3);
}

TEST_CASE("training reaches high accuracy on the synthetic shapes") {
  const Dataset data = generate_synthetic(test_helpers::tiny_dataset_spec());
  ClassifierSpec spec;
  spec.widths = {16, 32, 64};
  spec.head_width = 32;
  spec.num_classes = data.num_classes;
  auto model = make_classifier(spec, 7);

  TrainOptions opt;
  opt.epochs = 0;
  opt.rng_seed = 7;
  const TrainReport untrained = train_classifier(*model, data, opt);
  // untrained 4-class model sits near chance
  CHECK(untrained.test_accuracy <= 0.60);

  opt.epochs = 30;
  const TrainReport report = train_classifier(*model, data, opt);
  CHECK(report.test_accuracy >= 0.9);

  // >= 95% of the training split classified correctly
  int correct = 0;
  for (const auto& s : data.train)
    if (model->predict(s.points) == *s.label) ++correct;
  CHECK(correct >= static_cast<int>(0.95 * data.train.size()));
}

TEST_CASE("checkpoint round trip reproduces logits exactly") {
  TempDir dir("ckpt");
  const Dataset data = generate_synthetic(test_helpers::tiny_dataset_spec(6, 48));

  ClassifierSpec spec;
  spec.architecture = Architecture::edge_conv;
  spec.widths = {8, 16};
  spec.head_width = 16;
  spec.num_classes = data.num_classes;
  spec.knn_k = 5;
  auto model = make_classifier(spec, 11);

  TrainOptions opt;
  opt.epochs = 2;
  opt.rng_seed = 11;
  opt.checkpoint_path = dir.path / "model.ckpt";
  train_classifier(*model, data, opt);

  const auto loaded = load_classifier(dir.path / "model.ckpt");
  CHECK(loaded->spec().architecture == Architecture::edge_conv);
  CHECK(loaded->spec().widths == spec.widths);
  for (int t = 0; t < 10; ++t) {
    const PointCloud probe = random_cloud(32, 900 + t);
    const Eigen::VectorXd a = model->logits(probe.points);
    const Eigen::VectorXd b = loaded->logits(probe.points);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("autoencoder checkpoint round trip") {
  TempDir dir("ae_ckpt");
  AutoencoderSpec spec;
  spec.latent_dim = 8;
  spec.decoder_points = 16;
  spec.encoder_hidden = 8;
  spec.decoder_hidden = 12;
  Autoencoder ae(spec, 3);
  quantize_params(ae.params());
  save_autoencoder(dir.path / "ae.ckpt", ae);
  const auto loaded = load_autoencoder(dir.path / "ae.ckpt");
  const PointCloud probe = random_cloud(16, 45);
  CHECK((ae.reconstruct(probe.points) - loaded->reconstruct(probe.points))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("training rejects an empty split") {
  Dataset data = generate_synthetic(test_helpers::tiny_dataset_spec(4, 32));
  data.test.clear();
  ClassifierSpec spec;
  spec.num_classes = 4;
  spec.widths = {8};
  auto model = make_classifier(spec, 1);
  TrainOptions opt;
  opt.epochs = 1;
  CHECK_THROWS_WITH_AS(train_classifier(*model, data, opt), doctest::Contains("empty"),
                       Error);
}

TEST_SUITE_END();
