#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssbench/attacks.hpp"
#include "ssbench/dataset.hpp"
#include "ssbench/defenses.hpp"
#include "ssbench/models.hpp"

namespace ssbench {

struct SamplePair {
  PointCloud clean;
  PointCloud adversarial;
  int y_gt = 0;
  std::optional<int> target;
};

// T_rans: among clean samples the transfer model classifies correctly, the
// percentage whose adversarial counterpart it misclassifies.
double trans_metric(const std::vector<SamplePair>& pairs, const Classifier& transfer);

// Percentage of adversarials the transfer model classifies as their target.
double targeted_success_rate(const std::vector<SamplePair>& pairs,
                             const Classifier& transfer);

struct TransformSweepRow {
  double lo = 0.0;
  double hi = 0.0;
  double accuracy = 0.0;  // fraction in [0,1]
  double mean_ce = 0.0;
};

// One random transform of the given kind per sample per intensity range;
// degenerate ranges ((1,1) scale, (0,0) shear) are exact identities.
std::vector<TransformSweepRow> accuracy_under_transform(
    const Classifier& model, const std::vector<PointCloud>& samples, TransformKind kind,
    const std::vector<std::pair<double, double>>& ranges, std::uint64_t seed,
    int workers = 0);

// Intensity ladders used by the robustness sweeps (identity entry first).
const std::vector<std::pair<double, double>>& scale_sweep_ranges();
const std::vector<std::pair<double, double>>& shear_sweep_ranges();

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ReportEntry {
  std::string victim;
  std::string transfer;
  std::string attack;
  std::string defense;
  MetricStat t_rans;
  MetricStat accuracy;  // transfer-model accuracy on (defended) adversarials
  std::optional<MetricStat> targeted_success;
  int n_samples = 0;
  std::string error;  // non-empty when every seed failed for this cell
};

struct TransferReport {
  std::vector<ReportEntry> entries;
  std::string config_digest;
  std::vector<std::uint64_t> seeds;
};

struct ModelRef {
  std::string name;
  const Classifier* model = nullptr;
};

struct AttackSpec {
  std::string name;
  std::optional<AttackConfig> cfg;  // nullopt -> identity "none" attack
};

struct DefenseSpec {
  std::string name;
  DefenseConfig cfg;
};

struct MatrixOptions {
  int samples = 200;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int workers = 0;
  const Autoencoder* ae = nullptr;       // required when advpc attacks present
  std::vector<std::string> victims;      // empty -> every model is a victim
  std::string config_digest;
};

// Full experiment matrix: craft per (victim, attack, seed) over a seeded test
// subset, evaluate per (transfer, defense), aggregate mean/std across seeds.
// Deterministic given seeds; per-sample randomness is keyed to the sample's
// dataset index, so results do not depend on evaluation order or workers.
TransferReport run_matrix(const std::vector<ModelRef>& models,
                          const std::vector<AttackSpec>& attacks,
                          const std::vector<DefenseSpec>& defenses,
                          const std::vector<PointCloud>& test_set,
                          const MatrixOptions& opt);

struct SweepReport {
  std::string param;
  std::vector<double> values;
  std::vector<TransferReport> reports;  // one per value
};

// report.csv (long format: victim,transfer,attack,defense,metric,value,std,n)
// and report.json ("report-v1").
void emit_report(const TransferReport& report, const std::filesystem::path& dir);
TransferReport load_report(const std::filesystem::path& json_path);

// sweep.csv / sweep.json ("sweep-v1") plus an SVG line chart of black-box
// T_rans against the swept value.
void emit_sweep(const SweepReport& sweep, const std::filesystem::path& dir);
SweepReport load_sweep(const std::filesystem::path& json_path);

}  // namespace ssbench
