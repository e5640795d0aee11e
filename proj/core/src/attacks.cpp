#include "ssbench/attacks.hpp"

#include <cmath>
#include <sstream>

#include "internal/adam.hpp"
#include "internal/net_util.hpp"

namespace ssbench {

std::string attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::adv3d: return "3d-adv";
    case AttackKind::knn: return "knn";
    case AttackKind::advpc: return "advpc";
    case AttackKind::aof: return "aof";
  }
  throw Error("unknown attack kind");
}

std::string AttackConfig::name() const {
  return (ss_enabled ? "ss-" : "") + attack_kind_name(attack);
}

AttackConfig AttackConfig::defaults_for(AttackKind kind, bool ss) {
  AttackConfig cfg;
  cfg.attack = kind;
  cfg.ss_enabled = ss;
  switch (kind) {
    case AttackKind::adv3d:
      cfg.iterations = 500;
      cfg.binary_search_steps = 10;
      cfg.lr = 0.01;
      cfg.kappa = 0.0;
      break;
    case AttackKind::knn:
      cfg.iterations = 2500;
      cfg.binary_search_steps = 0;
      cfg.lr = 0.001;
      cfg.kappa = 15.0;
      break;
    case AttackKind::advpc:
    case AttackKind::aof:
      cfg.iterations = 200;
      cfg.binary_search_steps = 2;
      cfg.lr = 0.01;
      cfg.kappa = 0.0;
      break;
  }
  if (ss) {
    cfg.binary_search_steps = 0;
    const double p = (kind == AttackKind::adv3d) ? 0.5 : 0.7;
    cfg.policy.p_a = p;
    cfg.policy.p_s = p;
  }
  return cfg;
}

AttackConfig attack_config_from_name(const std::string& name) {
  std::string base = name;
  bool ss = false;
  if (base.rfind("ss-", 0) == 0) {
    ss = true;
    base = base.substr(3);
  }
  for (AttackKind kind :
       {AttackKind::adv3d, AttackKind::knn, AttackKind::advpc, AttackKind::aof})
    if (attack_kind_name(kind) == base) return AttackConfig::defaults_for(kind, ss);
  throw Error("unknown attack \"" + name +
              "\"; expected one of 3d-adv, knn, advpc, aof or their ss- variants");
}

void AttackConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("attack config: gamma outside [0,1]");
  if (!(epsilon > 0.0)) throw Error("attack config: epsilon must be positive");
  if (iterations < 1) throw Error("attack config: iterations < 1");
  if (!(lr >= 0.0)) throw Error("attack config: negative learning rate");
  if (binary_search_steps < 0) throw Error("attack config: negative binary_search_steps");
  if (ss_enabled && binary_search_steps != 0)
    throw Error("attack config: ss variants do not use binary search");
  if (knn_k < 1) throw Error("attack config: knn_k < 1");
  if (knn_threshold_alpha < 0.0) throw Error("attack config: negative threshold alpha");
  if (spectral_graph_k < 1) throw Error("attack config: spectral_graph_k < 1");
  if (targeted && !target_class) throw Error("attack config: targeted without target_class");
  if (ss_enabled) policy.validate();
}

double margin_loss(const Eigen::VectorXd& logits, int y_gt, double kappa, bool targeted,
                   int y_target, Eigen::VectorXd* dlogits) {
  const Eigen::Index c = logits.size();
  if (c < 2) throw Error("margin_loss: single-class logits");
  if (y_gt < 0 || y_gt >= c) throw Error("margin_loss: ground-truth class out of range");
  const int anchor = targeted ? y_target : y_gt;
  if (targeted) {
    if (y_target < 0 || y_target >= c) throw Error("margin_loss: target class out of range");
    if (y_target == y_gt) throw Error("margin_loss: target equals ground truth");
  }

  // best scoring class other than the anchor, smallest index on ties
  int best_other = anchor == 0 ? 1 : 0;
  for (int i = 0; i < c; ++i)
    if (i != anchor && logits(i) > logits(best_other)) best_other = i;

  // untargeted drives the gt logit below the best other; targeted drives the
  // target logit above the best other
  const double gap = targeted ? logits(best_other) - logits(y_target)
                              : logits(y_gt) - logits(best_other);
  const double value = gap + kappa;
  if (dlogits) {
    *dlogits = Eigen::VectorXd::Zero(c);
    if (value > 0.0) {
      if (targeted) {
        (*dlogits)(best_other) = 1.0;
        (*dlogits)(y_target) = -1.0;
      } else {
        (*dlogits)(y_gt) = 1.0;
        (*dlogits)(best_other) = -1.0;
      }
    }
  }
  return std::max(value, 0.0);
}

Eigen::VectorXd knn_mean_sq_dists(const Points& pts, int k) {
  const Eigen::Index n = pts.rows();
  if (n <= k) throw Error("knn_mean_sq_dists: need N > k");
  const Eigen::MatrixXd d = internal::pairwise_sq_dists(pts);
  const Eigen::MatrixXi nbrs = internal::knn_indices(pts, k);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += d(i, nbrs(i, j));
    out(i) = acc / static_cast<double>(k);
  }
  return out;
}

namespace {

LogitsLoss margin_fn(const AttackConfig& cfg, int y_gt) {
  return [&cfg, y_gt](const Eigen::VectorXd& z, Eigen::VectorXd* dz) {
    return margin_loss(z, y_gt, cfg.kappa, cfg.targeted, cfg.target_class.value_or(-1),
                       dz);
  };
}

// margin(F(transform(xp))) and its gradient with respect to xp. The chain
// through the linear map Y = X M pulls the gradient back by M^T.
double transformed_margin(const Points& xp, const Classifier& model,
                          const AttackConfig& cfg, int y_gt,
                          const TransformParams& transform, Points* grad,
                          Eigen::VectorXd* direct_logits) {
  const LogitsLoss loss = margin_fn(cfg, y_gt);
  if (transform.is_identity()) {
    if (!grad) {
      Eigen::VectorXd z = model.logits(xp);
      if (direct_logits) *direct_logits = z;
      return loss(z, nullptr);
    }
    return model.input_gradient(xp, loss, *grad, direct_logits);
  }
  const Points transformed = apply_transform(transform, xp);
  if (!grad) return loss(model.logits(transformed), nullptr);
  Points gy;
  const double value = model.input_gradient(transformed, loss, gy);
  *grad = gy * transform.matrix().transpose();
  return value;
}

}  // namespace

double loss_3d_adv(const Points& xp, const Points& x, const Classifier& model,
                   const AttackConfig& cfg, int y_gt, const TransformParams& transform,
                   double c, Points* grad, Eigen::VectorXd* direct_logits) {
  if (xp.rows() != x.rows()) throw Error("loss_3d_adv: shape mismatch");
  Points gmargin;
  const double margin = transformed_margin(xp, model, cfg, y_gt, transform,
                                           grad ? &gmargin : nullptr, direct_logits);
  const Points diff = xp - x;
  const double dist = diff.squaredNorm();
  if (grad) *grad = c * gmargin + 2.0 * diff;
  return c * margin + dist;
}

double loss_knn(const Points& xp, const Classifier& model, const AttackConfig& cfg,
                int y_gt, const TransformParams& transform, double c, Points* grad,
                Eigen::VectorXd* direct_logits) {
  const Eigen::Index n = xp.rows();
  if (n <= cfg.knn_k) throw Error("loss_knn: need N > knn_k");
  const Points y = transform.is_identity() ? xp : apply_transform(transform, xp);

  // margin branch on the (possibly transformed) cloud
  const LogitsLoss loss = margin_fn(cfg, y_gt);
  Points gy_margin;
  double margin;
  if (grad) {
    margin = model.input_gradient(y, loss, gy_margin,
                                  transform.is_identity() ? direct_logits : nullptr);
  } else {
    Eigen::VectorXd z = model.logits(y);
    if (transform.is_identity() && direct_logits) *direct_logits = z;
    margin = loss(z, nullptr);
  }

  // smoothness branch: penalize points whose mean squared kNN distance
  // exceeds mean + alpha * std over the cloud
  const Eigen::MatrixXi nbrs = internal::knn_indices(y, cfg.knn_k);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < cfg.knn_k; ++j) acc += (y.row(i) - y.row(nbrs(i, j))).squaredNorm();
    d(i) = acc / static_cast<double>(cfg.knn_k);
  }
  const double mean = d.mean();
  const double var = (d.array() - mean).square().mean();
  const double threshold = mean + cfg.knn_threshold_alpha * std::sqrt(std::max(var, 0.0));

  double smooth = 0.0;
  Points gy_smooth;
  if (grad) gy_smooth = Points::Zero(n, 3);
  const double scale = 2.0 / (static_cast<double>(n) * cfg.knn_k);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) <= threshold) continue;
    smooth += d(i);
    if (grad)
      for (int j = 0; j < cfg.knn_k; ++j) {
        const Eigen::RowVector3d diff = y.row(i) - y.row(nbrs(i, j));
        gy_smooth.row(i) += scale * diff;
        gy_smooth.row(nbrs(i, j)) -= scale * diff;
      }
  }
  smooth /= static_cast<double>(n);

  if (grad) {
    const Points gy = c * gy_margin + gy_smooth;
    *grad = transform.is_identity() ? gy : Points(gy * transform.matrix().transpose());
  }
  return c * margin + smooth;
}

double loss_advpc(const Points& xp, const Classifier& model, const Autoencoder& ae,
                  const AttackConfig& cfg, int y_gt, const TransformParams& transform,
                  double c, Points* grad, Eigen::VectorXd* direct_logits) {
  // direct branch sees the transformed cloud; the encoder branch always gets
  // the untransformed one
  Points gdirect;
  const double margin_direct = transformed_margin(
      xp, model, cfg, y_gt, transform, grad ? &gdirect : nullptr, direct_logits);

  const Points recon = ae.reconstruct(xp);
  const LogitsLoss loss = margin_fn(cfg, y_gt);
  double margin_enc;
  Points genc;
  if (grad) {
    Points grecon;
    margin_enc = model.input_gradient(recon, loss, grecon);
    genc = ae.input_backward(xp, grecon);
  } else {
    margin_enc = loss(model.logits(recon), nullptr);
  }

  if (grad) *grad = c * ((1.0 - cfg.gamma) * gdirect + cfg.gamma * genc);
  return c * ((1.0 - cfg.gamma) * margin_direct + cfg.gamma * margin_enc);
}

double loss_aof(const Points& xp, const Classifier& model, const SpectralBasis& basis,
                const AttackConfig& cfg, int y_gt, const TransformParams& transform,
                double c, Points* grad, Eigen::VectorXd* direct_logits) {
  Points gdirect;
  const double margin_direct = transformed_margin(
      xp, model, cfg, y_gt, transform, grad ? &gdirect : nullptr, direct_logits);

  const int K = cfg.K_lf > 0 ? cfg.K_lf : default_low_freq_count(xp.rows());
  const auto [lfc, hfc] = low_freq_project(xp, basis, K);
  const LogitsLoss loss = margin_fn(cfg, y_gt);
  double margin_lfc;
  Points glfc_branch;
  if (grad) {
    Points glfc;
    margin_lfc = model.input_gradient(lfc, loss, glfc);
    glfc_branch = low_freq_project_backward(glfc, basis, K);
  } else {
    margin_lfc = loss(model.logits(lfc), nullptr);
  }

  if (grad) *grad = c * ((1.0 - cfg.gamma) * gdirect + cfg.gamma * glfc_branch);
  return c * ((1.0 - cfg.gamma) * margin_direct + cfg.gamma * margin_lfc);
}

namespace {

struct InnerResult {
  Points delta;
  bool success = false;
  double loss = 0.0;
  double dist_sq = 0.0;
  std::vector<double> trace;
};

class LossDispatcher {
 public:
  LossDispatcher(const AttackContext& ctx, const Points& x, const AttackConfig& cfg,
                 int y_gt)
      : ctx_(ctx), x_(x), cfg_(cfg), y_gt_(y_gt) {}

  double operator()(const Points& xp, const TransformParams& tp, double c, Points* grad,
                    Eigen::VectorXd* direct_logits) const {
    switch (cfg_.attack) {
      case AttackKind::adv3d:
        return loss_3d_adv(xp, x_, *ctx_.model, cfg_, y_gt_, tp, c, grad, direct_logits);
      case AttackKind::knn:
        return loss_knn(xp, *ctx_.model, cfg_, y_gt_, tp, c, grad, direct_logits);
      case AttackKind::advpc:
        return loss_advpc(xp, *ctx_.model, *ctx_.ae, cfg_, y_gt_, tp, c, grad,
                          direct_logits);
      case AttackKind::aof:
        return loss_aof(xp, *ctx_.model, *ctx_.basis, cfg_, y_gt_, tp, c, grad,
                        direct_logits);
    }
    throw Error("unknown attack kind");
  }

  std::map<std::string, double> terms(const Points& xp, double c) const {
    const TransformParams id = TransformParams::identity();
    std::map<std::string, double> out;
    switch (cfg_.attack) {
      case AttackKind::adv3d: {
        const double margin = transformed_margin(xp, *ctx_.model, cfg_, y_gt_, id,
                                                 nullptr, nullptr);
        out["margin"] = margin;
        out["distance"] = (xp - x_).squaredNorm();
        out["total"] = c * margin + out["distance"];
        break;
      }
      case AttackKind::knn: {
        const double total = loss_knn(xp, *ctx_.model, cfg_, y_gt_, id, c);
        const double margin = transformed_margin(xp, *ctx_.model, cfg_, y_gt_, id,
                                                 nullptr, nullptr);
        out["margin"] = margin;
        out["smoothness"] = total - c * margin;
        out["total"] = total;
        break;
      }
      case AttackKind::advpc: {
        const double margin = transformed_margin(xp, *ctx_.model, cfg_, y_gt_, id,
                                                 nullptr, nullptr);
        const LogitsLoss loss = margin_fn(cfg_, y_gt_);
        const double enc = loss(ctx_.model->logits(ctx_.ae->reconstruct(xp)), nullptr);
        out["margin_direct"] = margin;
        out["margin_encoder"] = enc;
        out["total"] = c * ((1.0 - cfg_.gamma) * margin + cfg_.gamma * enc);
        break;
      }
      case AttackKind::aof: {
        const double margin = transformed_margin(xp, *ctx_.model, cfg_, y_gt_, id,
                                                 nullptr, nullptr);
        const int K = cfg_.K_lf > 0 ? cfg_.K_lf : default_low_freq_count(xp.rows());
        const auto [lfc, hfc] = low_freq_project(xp, *ctx_.basis, K);
        const LogitsLoss loss = margin_fn(cfg_, y_gt_);
        const double lfc_margin = loss(ctx_.model->logits(lfc), nullptr);
        out["margin_direct"] = margin;
        out["margin_lfc"] = lfc_margin;
        out["total"] = c * ((1.0 - cfg_.gamma) * margin + cfg_.gamma * lfc_margin);
        break;
      }
    }
    return out;
  }

 private:
  const AttackContext& ctx_;
  const Points& x_;
  const AttackConfig& cfg_;
  int y_gt_;
};

}  // namespace

AttackResult run_attack(const AttackContext& ctx, const PointCloud& cloud,
                        const AttackConfig& cfg) {
  cfg.validate();
  if (!ctx.model) throw Error("run_attack: no model");
  if (!cloud.label) throw Error("run_attack: cloud has no label");
  check_finite(cloud.points, "run_attack");
  const int y_gt = *cloud.label;
  if (y_gt < 0 || y_gt >= ctx.model->spec().num_classes)
    throw Error("run_attack: label out of range for model");
  if (cfg.targeted && *cfg.target_class == y_gt)
    throw Error("run_attack: target equals ground truth");
  if (cfg.attack == AttackKind::advpc) {
    if (!ctx.ae) throw Error("run_attack: advpc requires an autoencoder");
    if (ctx.ae->spec().decoder_points != cloud.points.rows())
      throw Error("run_attack: autoencoder N mismatch");
  }

  // The aof basis is built once from the clean cloud and reused across
  // iterations (fixed projector).
  AttackContext local = ctx;
  SpectralBasis built;
  if (cfg.attack == AttackKind::aof && !ctx.basis) {
    built = build_spectral_basis(cloud.points, cfg.spectral_graph_k, cloud.id);
    local.basis = &built;
  }
  if (cfg.attack == AttackKind::aof && local.basis->size() != cloud.points.rows())
    throw Error("run_attack: spectral basis N mismatch");

  const Points& x = cloud.points;
  const LossDispatcher loss(local, x, cfg, y_gt);
  Rng rng(cfg.rng_seed);

  const auto is_success = [&](const Eigen::VectorXd& z) {
    Eigen::Index pred = 0;
    z.maxCoeff(&pred);
    return cfg.targeted ? static_cast<int>(pred) == *cfg.target_class
                        : static_cast<int>(pred) != y_gt;
  };

  const auto run_inner = [&](double c) {
    InnerResult res;
    Points delta = Points::Zero(x.rows(), 3);
    internal::Adam<Points> adam(delta);
    bool have_best = false;
    Points best_delta;
    double best_loss = 0.0;

    for (int it = 0; it < cfg.iterations; ++it) {
      const TransformParams tp = cfg.ss_enabled ? sample_transform(cfg.policy, rng)
                                                : TransformParams::identity();
      const Points xp = x + delta;
      Points grad;
      Eigen::VectorXd direct_logits;
      const double value = loss(xp, tp, c, &grad, &direct_logits);
      if (!std::isfinite(value) || !grad.allFinite()) {
        std::ostringstream msg;
        msg << "run_attack: non-finite loss at iteration " << it << " (c=" << c
            << "); trace tail:";
        for (std::size_t i = res.trace.size() > 5 ? res.trace.size() - 5 : 0;
             i < res.trace.size(); ++i)
          msg << " " << res.trace[i];
        throw Error(msg.str());
      }
      res.trace.push_back(value);

      const Eigen::VectorXd z =
          direct_logits.size() ? direct_logits : ctx.model->logits(xp);
      if (is_success(z) && (!have_best || value < best_loss)) {
        have_best = true;
        best_delta = delta;
        best_loss = value;
      }

      adam.step(delta, grad, cfg.lr);
      delta = delta.cwiseMax(-cfg.epsilon).cwiseMin(cfg.epsilon);
    }

    if (have_best) {
      res.delta = best_delta;
      res.success = true;
      res.loss = best_loss;
    } else {
      res.delta = delta;
      res.success = is_success(ctx.model->logits(Points(x + delta)));
      res.loss = res.trace.empty() ? 0.0 : res.trace.back();
    }
    res.dist_sq = res.delta.squaredNorm();
    return res;
  };

  InnerResult chosen;
  double chosen_c = 1.0;
  int iterations_used = 0;
  if (cfg.binary_search_steps == 0) {
    chosen = run_inner(1.0);
    iterations_used = cfg.iterations;
  } else {
    double lo = 0.1, hi = 100.0, c = 10.0;
    bool have = false;
    for (int step = 0; step < cfg.binary_search_steps; ++step) {
      InnerResult res = run_inner(c);
      iterations_used += cfg.iterations;
      if (res.success) {
        if (!have || res.dist_sq < chosen.dist_sq) {
          chosen = std::move(res);
          chosen_c = c;
          have = true;
        }
        hi = c;
      } else {
        if (!have && (step + 1 == cfg.binary_search_steps)) {
          chosen = std::move(res);
          chosen_c = c;
        }
        lo = c;
      }
      c = 0.5 * (lo + hi);
    }
  }

  AttackResult out;
  out.perturbation = chosen.delta;
  out.adversarial = cloud;
  out.adversarial.points = x + chosen.delta;
  out.adversarial.id = cloud.id.empty() ? "adv" : cloud.id + "_adv";
  out.success = chosen.success;
  out.iterations_used = iterations_used;
  out.linf_norm = chosen.delta.cwiseAbs().maxCoeff();
  out.l2_norm = chosen.delta.norm();
  out.loss_trace = std::move(chosen.trace);
  out.final_loss_terms = loss.terms(out.adversarial.points, chosen_c);
  return out;
}

}  // namespace ssbench
