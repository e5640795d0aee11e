#include "ssbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace ssbench {

double trans_metric(const std::vector<SamplePair>& pairs, const Classifier& transfer) {
  if (pairs.empty()) throw Error("trans_metric: empty sample set");
  int clean_correct = 0;
  int flipped = 0;
  for (const auto& p : pairs) {
    if (transfer.predict(p.clean.points) != p.y_gt) continue;
    ++clean_correct;
    if (transfer.predict(p.adversarial.points) != p.y_gt) ++flipped;
  }
  if (clean_correct == 0)
    throw Error("trans_metric: transfer model classifies no clean sample correctly");
  return 100.0 * static_cast<double>(flipped) / static_cast<double>(clean_correct);
}

double targeted_success_rate(const std::vector<SamplePair>& pairs,
                             const Classifier& transfer) {
  if (pairs.empty()) throw Error("targeted_success_rate: empty sample set");
  int hits = 0;
  for (const auto& p : pairs) {
    if (!p.target) throw Error("targeted_success_rate: sample without recorded target");
    if (transfer.predict(p.adversarial.points) == *p.target) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pairs.size());
}

const std::vector<std::pair<double, double>>& scale_sweep_ranges() {
  static const std::vector<std::pair<double, double>> ranges = {
      {1.0, 1.0},   {0.9, 1.1}, {0.8, 1.25}, {0.6, 1.428},
      {0.5, 1.5},   {0.4, 2.5}, {0.3, 3.33}, {0.2, 5.0}};
  return ranges;
}

const std::vector<std::pair<double, double>>& shear_sweep_ranges() {
  static const std::vector<std::pair<double, double>> ranges = {
      {0.0, 0.0},   {0.0, 0.1},  {0.05, 0.15}, {0.1, 0.2},  {0.2, 0.3},
      {0.25, 0.35}, {0.3, 0.4},  {0.35, 0.45}, {0.4, 0.5},  {0.45, 0.55}};
  return ranges;
}

std::vector<TransformSweepRow> accuracy_under_transform(
    const Classifier& model, const std::vector<PointCloud>& samples, TransformKind kind,
    const std::vector<std::pair<double, double>>& ranges, std::uint64_t seed,
    int workers) {
  if (samples.empty()) throw Error("accuracy_under_transform: no samples");
  if (kind == TransformKind::identity)
    throw Error("accuracy_under_transform: kind must be scale or shear");
  const int w = workers > 0 ? workers : default_workers();

  std::vector<TransformSweepRow> rows;
  rows.reserve(ranges.size());
  for (std::size_t r = 0; r < ranges.size(); ++r) {
    TransformPolicy policy;
    policy.p_a = 1.0;
    policy.p_s = kind == TransformKind::scale ? 1.0 : 0.0;
    policy.scale_range = ranges[r];
    policy.shear_range = ranges[r];

    std::vector<int> correct(samples.size(), 0);
    std::vector<double> ce(samples.size(), 0.0);
    parallel_for(samples.size(), w, [&](std::size_t i) {
      Rng rng(mix_seed(mix_seed(seed, r), i));
      const TransformParams params = sample_transform(policy, rng);
      const Points transformed = apply_transform(params, samples[i].points);
      const Eigen::VectorXd z = model.logits(transformed);
      Eigen::Index pred = 0;
      z.maxCoeff(&pred);
      correct[i] = static_cast<int>(pred) == samples[i].label.value() ? 1 : 0;
      ce[i] = cross_entropy(z, samples[i].label.value());
    });

    TransformSweepRow row;
    row.lo = ranges[r].first;
    row.hi = ranges[r].second;
    row.accuracy = std::accumulate(correct.begin(), correct.end(), 0) /
                   static_cast<double>(samples.size());
    row.mean_ce = std::accumulate(ce.begin(), ce.end(), 0.0) /
                  static_cast<double>(samples.size());
    rows.push_back(row);
  }
  return rows;
}

namespace {

constexpr std::uint64_t kSubsetTag = 0x5B5E7;
constexpr std::uint64_t kAttackTag = 0xA77AC;
constexpr std::uint64_t kTargetTag = 0x7A6E7;
constexpr std::uint64_t kDefenseTag = 0xDEF01;

struct CellKey {
  std::size_t victim, attack, transfer, defense;
  bool operator<(const CellKey& o) const {
    return std::tie(victim, attack, transfer, defense) <
           std::tie(o.victim, o.attack, o.transfer, o.defense);
  }
};

struct CellValue {
  double t_rans = 0.0;
  double accuracy = 0.0;
  std::optional<double> targeted_success;
  bool ok = false;
  std::string error;
};

MetricStat aggregate(const std::vector<double>& values) {
  MetricStat s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace

TransferReport run_matrix(const std::vector<ModelRef>& models,
                          const std::vector<AttackSpec>& attacks,
                          const std::vector<DefenseSpec>& defenses,
                          const std::vector<PointCloud>& test_set,
                          const MatrixOptions& opt) {
  if (models.empty()) throw Error("run_matrix: no models");
  if (attacks.empty()) throw Error("run_matrix: no attacks");
  if (defenses.empty()) throw Error("run_matrix: no defenses");
  if (test_set.empty()) throw Error("run_matrix: empty test set");
  if (opt.seeds.empty()) throw Error("run_matrix: no seeds");
  const int workers = opt.workers > 0 ? opt.workers : default_workers();

  std::vector<std::size_t> victim_ids;
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (opt.victims.empty() ||
        std::find(opt.victims.begin(), opt.victims.end(), models[m].name) !=
            opt.victims.end())
      victim_ids.push_back(m);
  }
  if (victim_ids.empty()) throw Error("run_matrix: victim filter matches no model");

  const int n_subset = std::min<int>(opt.samples, static_cast<int>(test_set.size()));
  std::map<CellKey, std::vector<CellValue>> cells;

  // Per-sample randomness keys off the cloud id when ids are unique, so every
  // cell is invariant under permutations of the test set.
  const bool ids_ok = [&] {
    std::set<std::string> seen;
    for (const auto& c : test_set)
      if (c.id.empty() || !seen.insert(c.id).second) return false;
    return true;
  }();
  std::vector<std::size_t> base_order(test_set.size());
  std::iota(base_order.begin(), base_order.end(), 0);
  if (ids_ok)
    std::sort(base_order.begin(), base_order.end(), [&](std::size_t a, std::size_t b) {
      return test_set[a].id < test_set[b].id;
    });
  const auto sample_key = [&](std::size_t dataset_idx) {
    return ids_ok ? fnv1a64(test_set[dataset_idx].id)
                  : static_cast<std::uint64_t>(dataset_idx);
  };

  for (const std::uint64_t seed : opt.seeds) {
    std::vector<std::size_t> subset = base_order;
    Rng subset_rng(mix_seed(seed, kSubsetTag));
    subset_rng.shuffle(subset);
    subset.resize(n_subset);

    // clean predictions per model, reused by every cell of this seed
    std::vector<std::vector<int>> clean_pred(models.size(),
                                             std::vector<int>(n_subset, -1));
    for (std::size_t m = 0; m < models.size(); ++m)
      parallel_for(subset.size(), workers, [&, m](std::size_t i) {
        clean_pred[m][i] = models[m].model->predict(test_set[subset[i]].points);
      });

    for (const std::size_t v : victim_ids) {
      for (std::size_t a = 0; a < attacks.size(); ++a) {
        // craft adversarials on the victim
        std::vector<PointCloud> advs(subset.size());
        std::vector<std::optional<int>> targets(subset.size());
        std::string craft_error;
        try {
          if (!attacks[a].cfg) {
            for (std::size_t i = 0; i < subset.size(); ++i)
              advs[i] = test_set[subset[i]];
          } else {
            if (attacks[a].cfg->attack == AttackKind::advpc && !opt.ae)
              throw Error("advpc requires an autoencoder");
            parallel_for(subset.size(), workers, [&](std::size_t i) {
              const std::size_t di = subset[i];
              const PointCloud& clean = test_set[di];
              AttackConfig cfg = *attacks[a].cfg;
              cfg.rng_seed = mix_seed(mix_seed(seed, kAttackTag), sample_key(di));
              if (cfg.targeted) {
                Rng trng(mix_seed(mix_seed(seed, kTargetTag), sample_key(di)));
                const int c = models[v].model->spec().num_classes;
                int t = static_cast<int>(trng.uniform_int(c - 1));
                if (t >= clean.label.value()) ++t;
                cfg.target_class = t;
                targets[i] = t;
              }
              AttackContext ctx;
              ctx.model = models[v].model;
              ctx.ae = opt.ae;
              AttackResult res = run_attack(ctx, clean, cfg);
              if (res.linf_norm > cfg.epsilon + 1e-6)
                throw Error("budget invariant violated");
              advs[i] = std::move(res.adversarial);
            });
          }
        } catch (const std::exception& e) {
          craft_error = e.what();
        }

        for (std::size_t dfs = 0; dfs < defenses.size(); ++dfs) {
          // defense applied to the adversarial clouds only, once per sample
          std::vector<PointCloud> defended;
          std::string cell_error = craft_error;
          if (cell_error.empty()) {
            defended.resize(subset.size());
            try {
              parallel_for(subset.size(), workers, [&](std::size_t i) {
                Rng drng(mix_seed(mix_seed(seed, kDefenseTag), sample_key(subset[i])));
                defended[i] = apply_defense(advs[i], defenses[dfs].cfg, drng);
              });
            } catch (const std::exception& e) {
              cell_error = e.what();
            }
          }

          for (std::size_t t = 0; t < models.size(); ++t) {
            CellValue value;
            if (cell_error.empty()) {
              try {
                std::vector<int> adv_pred(subset.size(), -1);
                parallel_for(subset.size(), workers, [&](std::size_t i) {
                  adv_pred[i] = models[t].model->predict(defended[i].points);
                });
                int clean_correct = 0, flipped = 0, adv_correct = 0, target_hits = 0;
                for (std::size_t i = 0; i < subset.size(); ++i) {
                  const int y = test_set[subset[i]].label.value();
                  if (adv_pred[i] == y) ++adv_correct;
                  if (targets[i] && adv_pred[i] == *targets[i]) ++target_hits;
                  if (clean_pred[t][i] == y) {
                    ++clean_correct;
                    if (adv_pred[i] != y) ++flipped;
                  }
                }
                if (clean_correct == 0)
                  throw Error("transfer model classifies no clean sample correctly");
                value.t_rans = 100.0 * flipped / static_cast<double>(clean_correct);
                value.accuracy = 100.0 * adv_correct / static_cast<double>(subset.size());
                if (attacks[a].cfg && attacks[a].cfg->targeted)
                  value.targeted_success =
                      100.0 * target_hits / static_cast<double>(subset.size());
                value.ok = true;
              } catch (const std::exception& e) {
                value.error = e.what();
              }
            } else {
              value.error = cell_error;
            }
            cells[CellKey{v, a, t, dfs}].push_back(value);
          }
        }
      }
    }
  }

  TransferReport report;
  report.config_digest = opt.config_digest;
  report.seeds = opt.seeds;
  for (const std::size_t v : victim_ids)
    for (std::size_t a = 0; a < attacks.size(); ++a)
      for (std::size_t t = 0; t < models.size(); ++t)
        for (std::size_t dfs = 0; dfs < defenses.size(); ++dfs) {
          const auto& values = cells[CellKey{v, a, t, dfs}];
          ReportEntry entry;
          entry.victim = models[v].name;
          entry.attack = attacks[a].name;
          entry.transfer = models[t].name;
          entry.defense = defenses[dfs].name;
          entry.n_samples = n_subset;
          std::vector<double> tr, acc, ts;
          for (const auto& val : values) {
            if (!val.ok) {
              entry.error = val.error;
              continue;
            }
            tr.push_back(val.t_rans);
            acc.push_back(val.accuracy);
            if (val.targeted_success) ts.push_back(*val.targeted_success);
          }
          if (!tr.empty()) entry.error.clear();
          entry.t_rans = aggregate(tr);
          entry.accuracy = aggregate(acc);
          if (!ts.empty()) entry.targeted_success = aggregate(ts);
          if (tr.empty() && entry.error.empty()) entry.error = "no successful seed";
          report.entries.push_back(std::move(entry));
        }
  return report;
}

}  // namespace ssbench
