#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "internal/svg.hpp"
#include "ssbench/evaluation.hpp"

namespace ssbench {

using nlohmann::json;

namespace {

json stat_to_json(const MetricStat& s) { return {{"mean", s.mean}, {"std", s.stddev}}; }

MetricStat stat_from_json(const json& j) {
  MetricStat s;
  s.mean = j.at("mean").get<double>();
  s.stddev = j.at("std").get<double>();
  return s;
}

json entry_to_json(const ReportEntry& e) {
  json j = {{"victim", e.victim},       {"transfer", e.transfer},
            {"attack", e.attack},       {"defense", e.defense},
            {"t_rans", stat_to_json(e.t_rans)}, {"accuracy", stat_to_json(e.accuracy)},
            {"n_samples", e.n_samples}};
  j["targeted_success"] =
      e.targeted_success ? stat_to_json(*e.targeted_success) : json(nullptr);
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

ReportEntry entry_from_json(const json& j) {
  ReportEntry e;
  e.victim = j.at("victim").get<std::string>();
  e.transfer = j.at("transfer").get<std::string>();
  e.attack = j.at("attack").get<std::string>();
  e.defense = j.at("defense").get<std::string>();
  e.t_rans = stat_from_json(j.at("t_rans"));
  e.accuracy = stat_from_json(j.at("accuracy"));
  if (!j.at("targeted_success").is_null())
    e.targeted_success = stat_from_json(j.at("targeted_success"));
  e.n_samples = j.at("n_samples").get<int>();
  e.error = j.value("error", "");
  return e;
}

json report_to_json(const TransferReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) entries.push_back(entry_to_json(e));
  return {{"version", "report-v1"},
          {"config_digest", report.config_digest},
          {"seeds", report.seeds},
          {"entries", entries}};
}

TransferReport report_from_json(const json& j) {
  if (j.value("version", "") != "report-v1") throw Error("not a report-v1 document");
  TransferReport report;
  report.config_digest = j.at("config_digest").get<std::string>();
  report.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& e : j.at("entries")) report.entries.push_back(entry_from_json(e));
  return report;
}

void write_csv_rows(std::ostream& os, const TransferReport& report) {
  os.precision(10);
  for (const auto& e : report.entries) {
    if (!e.error.empty()) continue;
    const auto row = [&](const char* metric, const MetricStat& s) {
      os << e.victim << "," << e.transfer << "," << e.attack << "," << e.defense << ","
         << metric << "," << s.mean << "," << s.stddev << "," << e.n_samples << "\n";
    };
    row("t_rans", e.t_rans);
    row("accuracy", e.accuracy);
    if (e.targeted_success) row("targeted_success", *e.targeted_success);
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path.string());
  json j = json::parse(is, nullptr, false);
  if (j.is_discarded()) throw Error("malformed JSON: " + path.string());
  return j;
}

}  // namespace

void emit_report(const TransferReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "report.json");
    if (!os) throw Error("cannot open for writing: " + (dir / "report.json").string());
    os << report_to_json(report).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "report.csv");
    if (!os) throw Error("cannot open for writing: " + (dir / "report.csv").string());
    os << "victim,transfer,attack,defense,metric,value,std,n\n";
    write_csv_rows(os, report);
  }
}

TransferReport load_report(const std::filesystem::path& json_path) {
  return report_from_json(load_json_file(json_path));
}

void emit_sweep(const SweepReport& sweep, const std::filesystem::path& dir) {
  if (sweep.values.size() != sweep.reports.size())
    throw Error("emit_sweep: values/reports size mismatch");
  std::filesystem::create_directories(dir);
  {
    json reports = json::array();
    for (const auto& r : sweep.reports) reports.push_back(report_to_json(r));
    const json j = {{"version", "sweep-v1"},
                    {"param", sweep.param},
                    {"values", sweep.values},
                    {"reports", reports}};
    std::ofstream os(dir / "sweep.json");
    if (!os) throw Error("cannot open for writing: " + (dir / "sweep.json").string());
    os << j.dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "sweep.csv");
    if (!os) throw Error("cannot open for writing: " + (dir / "sweep.csv").string());
    os << "param,param_value,victim,transfer,attack,defense,metric,value,std,n\n";
    os.precision(10);
    for (std::size_t i = 0; i < sweep.values.size(); ++i)
      for (const auto& e : sweep.reports[i].entries) {
        if (!e.error.empty()) continue;
        const auto row = [&](const char* metric, const MetricStat& s) {
          os << sweep.param << "," << sweep.values[i] << "," << e.victim << ","
             << e.transfer << "," << e.attack << "," << e.defense << "," << metric << ","
             << s.mean << "," << s.stddev << "," << e.n_samples << "\n";
        };
        row("t_rans", e.t_rans);
        row("accuracy", e.accuracy);
        if (e.targeted_success) row("targeted_success", *e.targeted_success);
      }
  }

  // black-box T_rans against the swept value, one series per
  // (victim->transfer, attack, defense)
  std::set<std::string> keys;
  std::map<std::string, internal::LineSeries> series;
  for (std::size_t i = 0; i < sweep.values.size(); ++i)
    for (const auto& e : sweep.reports[i].entries) {
      if (!e.error.empty() || e.victim == e.transfer) continue;
      std::string key = e.victim + "->" + e.transfer + " " + e.attack;
      if (e.defense != "none") key += " +" + e.defense;
      auto& s = series[key];
      s.label = key;
      s.x.push_back(sweep.values[i]);
      s.y.push_back(e.t_rans.mean);
    }
  std::vector<internal::LineSeries> ordered;
  for (auto& [key, s] : series) ordered.push_back(std::move(s));
  if (!ordered.empty())
    internal::write_svg_line_chart(dir / "sweep_trans.svg",
                                   "T_rans vs " + sweep.param, sweep.param,
                                   "T_rans (%)", ordered, sweep.values);
}

SweepReport load_sweep(const std::filesystem::path& json_path) {
  const json j = load_json_file(json_path);
  if (j.value("version", "") != "sweep-v1") throw Error("not a sweep-v1 document");
  SweepReport sweep;
  sweep.param = j.at("param").get<std::string>();
  sweep.values = j.at("values").get<std::vector<double>>();
  for (const auto& r : j.at("reports")) sweep.reports.push_back(report_from_json(r));
  return sweep;
}

}  // namespace ssbench
