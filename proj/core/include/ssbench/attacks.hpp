#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssbench/geometry.hpp"
#include "ssbench/models.hpp"
#include "ssbench/spectral.hpp"

namespace ssbench {

enum class AttackKind { adv3d, knn, advpc, aof };

std::string attack_kind_name(AttackKind kind);

struct AttackConfig {
  AttackKind attack = AttackKind::adv3d;
  bool ss_enabled = false;
  TransformPolicy policy;  // used only when ss_enabled

  double kappa = 0.0;
  double gamma = 0.25;   // advpc / aof trade-off
  double epsilon = 0.18;  // l_inf budget
  int iterations = 500;
  double lr = 0.01;
  int binary_search_steps = 10;
  int knn_k = 5;
  double knn_threshold_alpha = 1.1;
  int K_lf = 0;            // aof; 0 -> N/10
  int spectral_graph_k = 10;
  bool targeted = false;
  std::optional<int> target_class;
  std::uint64_t rng_seed = 0;

  void validate() const;
  std::string name() const;  // e.g. "ss-knn"

  // Hyperparameter presets per attack family; ss variants drop binary search
  // and set the transform probabilities.
  static AttackConfig defaults_for(AttackKind kind, bool ss);
};

// Parses "3d-adv", "knn", "advpc", "aof" and their "ss-" prefixed variants.
AttackConfig attack_config_from_name(const std::string& name);

struct AttackResult {
  PointCloud adversarial;
  Points perturbation;
  bool success = false;
  std::map<std::string, double> final_loss_terms;
  int iterations_used = 0;
  double linf_norm = 0.0;
  double l2_norm = 0.0;
  std::vector<double> loss_trace;  // loss at each evaluated iterate
};

// Hinge on the logit gap, margin kappa. Untargeted:
// max(Z_gt - max_{y != gt} Z_y + kappa, 0); targeted flips the roles of the
// target class and the best other class. Subgradient defined everywhere.
double margin_loss(const Eigen::VectorXd& logits, int y_gt, double kappa,
                   bool targeted = false, int y_target = -1,
                   Eigen::VectorXd* dlogits = nullptr);

// Mean squared distance from each point to its k nearest neighbors within
// the same cloud (the smoothness statistic of the kNN loss).
Eigen::VectorXd knn_mean_sq_dists(const Points& pts, int k);

// Shared inputs of the per-attack losses. `transform` is the frozen draw for
// this evaluation (identity when the wrapper is off); `c` multiplies the
// adversarial terms. grad (when non-null) receives d(loss)/d(xp);
// direct_logits (when non-null and the transform is the identity) receives
// the logits of xp itself.
double loss_3d_adv(const Points& xp, const Points& x, const Classifier& model,
                   const AttackConfig& cfg, int y_gt, const TransformParams& transform,
                   double c, Points* grad = nullptr,
                   Eigen::VectorXd* direct_logits = nullptr);
double loss_knn(const Points& xp, const Classifier& model, const AttackConfig& cfg,
                int y_gt, const TransformParams& transform, double c,
                Points* grad = nullptr, Eigen::VectorXd* direct_logits = nullptr);
double loss_advpc(const Points& xp, const Classifier& model, const Autoencoder& ae,
                  const AttackConfig& cfg, int y_gt, const TransformParams& transform,
                  double c, Points* grad = nullptr,
                  Eigen::VectorXd* direct_logits = nullptr);
double loss_aof(const Points& xp, const Classifier& model, const SpectralBasis& basis,
                const AttackConfig& cfg, int y_gt, const TransformParams& transform,
                double c, Points* grad = nullptr,
                Eigen::VectorXd* direct_logits = nullptr);

struct AttackContext {
  const Classifier* model = nullptr;
  const Autoencoder* ae = nullptr;       // required for advpc
  const SpectralBasis* basis = nullptr;  // aof; built from the clean cloud if null
};

// Adam on the perturbation, elementwise clamp to [-epsilon, epsilon] after
// every step; fresh transform draw per iteration when the wrapper is on;
// optional outer binary search over c (start 10, range [0.1, 100]).
AttackResult run_attack(const AttackContext& ctx, const PointCloud& cloud,
                        const AttackConfig& cfg);

}  // namespace ssbench
