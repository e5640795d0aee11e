#include "ssbench/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssbench/attacks.hpp"
#include "ssbench/dataset.hpp"
#include "ssbench/defenses.hpp"
#include "ssbench/evaluation.hpp"
#include "ssbench/io.hpp"
#include "ssbench/models.hpp"

namespace ssbench {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> parse_values(const std::string& s) {
  if (s.find(':') != std::string::npos) {
    const auto parts = split_list([&] {
      std::string t = s;
      std::replace(t.begin(), t.end(), ':', ',');
      return t;
    }());
    if (parts.size() != 3) throw UsageError("values range must be lo:hi:step");
    const double lo = std::stod(parts[0]), hi = std::stod(parts[1]),
                 step = std::stod(parts[2]);
    if (step <= 0.0 || hi < lo) throw UsageError("bad values range");
    std::vector<double> out;
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split_list(s)) out.push_back(std::stod(p));
  if (out.empty()) throw UsageError("empty values list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& p : split_list(s)) out.push_back(std::stoi(p));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& p : split_list(s)) out.push_back(std::stoull(p));
  if (out.empty()) throw UsageError("empty seeds list");
  return out;
}

// Flat key-value configuration per sub-command. Precedence: built-in default
// < config file < SSBENCH_SEED (key "seed") < explicit flag.
class OptionSet {
 public:
  explicit OptionSet(CLI::App& app) : app_(&app) {
    app_->add_option("--config", config_path_,
                     "flat JSON config or a manifest.json from a previous run");
  }

  template <typename T>
  CLI::Option* add(const std::string& key, T& var, const std::string& desc) {
    defaults_[key] = var;
    CLI::Option* opt = app_->add_option("--" + key, var, desc);
    readers_[key] = [&var] { return json(var); };
    options_[key] = opt;
    return opt;
  }

  CLI::Option* add_flag(const std::string& key, bool& var, const std::string& desc) {
    defaults_[key] = var;
    CLI::Option* opt = app_->add_flag("--" + key, var, desc);
    readers_[key] = [&var] { return json(var); };
    options_[key] = opt;
    return opt;
  }

  // required keys can arrive from the config file, so they are enforced
  // after resolution rather than by the parser
  void require(const std::string& key) { required_.push_back(key); }

  json resolve(const std::string& command) const {
    json resolved = defaults_;
    if (!config_path_.empty()) {
      std::ifstream is(config_path_);
      if (!is) throw UsageError("cannot open config: " + config_path_);
      json file = json::parse(is, nullptr, false);
      if (file.is_discarded()) throw UsageError("malformed config JSON: " + config_path_);
      if (file.contains("config") && file.contains("command")) {
        if (file.at("command").get<std::string>() != command)
          throw UsageError("manifest records command \"" +
                           file.at("command").get<std::string>() +
                           "\", not \"" + command + "\"");
        file = file.at("config");
      }
      for (const auto& [key, value] : file.items()) {
        if (!defaults_.contains(key))
          throw UsageError("unknown config key \"" + key + "\" for " + command);
        resolved[key] = value;
      }
    }
    if (defaults_.contains("seed")) {
      if (const char* env = std::getenv("SSBENCH_SEED")) {
        try {
          resolved["seed"] = std::stoull(env);
        } catch (const std::exception&) {
          throw UsageError("SSBENCH_SEED is not an integer");
        }
      }
    }
    for (const auto& [key, opt] : options_)
      if (opt->count() > 0) resolved[key] = readers_.at(key)();
    for (const auto& key : required_) {
      if (resolved.at(key).is_string() && resolved.at(key).get<std::string>().empty())
        throw UsageError("--" + key + " is required for " + command);
    }
    return resolved;
  }

 private:
  CLI::App* app_;
  json defaults_ = json::object();
  std::map<std::string, std::function<json()>> readers_;
  std::map<std::string, CLI::Option*> options_;
  std::vector<std::string> required_;
  std::string config_path_;
};

std::string config_digest(json config) {
  config.erase("out");
  config.erase("workers");
  return fnv1a64_hex(config.dump());
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& resolved, const json& extra = json::object()) {
  fs::create_directories(out_dir);
  json manifest = {{"version", "manifest-v1"},
                   {"command", command},
                   {"config", resolved},
                   {"config_digest", config_digest(resolved)}};
  for (const auto& [k, v] : extra.items()) manifest[k] = v;
  std::ofstream os(out_dir / "manifest.json");
  if (!os) throw Error("cannot write manifest in " + out_dir.string());
  os << manifest.dump(2) << "\n";
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const json& cfg) {
  DatasetSpec spec;
  const int n_classes = cfg.at("classes").get<int>();
  const std::string shapes = cfg.at("shapes").get<std::string>();
  if (!shapes.empty()) {
    spec.classes = split_list(shapes);
  } else {
    if (n_classes < 1 || n_classes > static_cast<int>(supported_shapes().size()))
      throw UsageError("classes must be in [1, " +
                       std::to_string(supported_shapes().size()) + "]");
    spec.classes.assign(supported_shapes().begin(),
                        supported_shapes().begin() + n_classes);
  }
  spec.samples_per_class = cfg.at("per-class").get<int>();
  spec.points_per_cloud = cfg.at("points").get<int>();
  spec.noise_sigma = cfg.at("noise").get<double>();
  spec.train_fraction = cfg.at("train-frac").get<double>();
  spec.test_fraction = 1.0 - spec.train_fraction;
  spec.rng_seed = cfg.at("seed").get<std::uint64_t>();

  const Dataset data = generate_synthetic(spec);
  const fs::path out = cfg.at("out").get<std::string>();
  save_dataset(out, data, cfg.at("format").get<std::string>());
  write_manifest(out, "gen-data", cfg,
                 {{"result", {{"train_count", data.train.size()},
                              {"test_count", data.test.size()},
                              {"num_classes", data.num_classes}}}});
  std::cout << "dataset: " << data.train.size() << " train / " << data.test.size()
            << " test clouds, " << data.num_classes << " classes -> " << out.string()
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(const json& cfg) {
  const fs::path data_dir = cfg.at("data").get<std::string>();
  const Dataset data = load_split_dataset(data_dir);
  const fs::path out = cfg.at("out").get<std::string>();
  fs::create_directories(out);

  TrainOptions opt;
  opt.epochs = cfg.at("epochs").get<int>();
  opt.lr = cfg.at("lr").get<double>();
  opt.batch_size = cfg.at("batch").get<int>();
  opt.rng_seed = cfg.at("seed").get<std::uint64_t>();
  opt.workers = cfg.at("workers").get<int>();

  const std::string arch = cfg.at("arch").get<std::string>();
  json result;
  if (arch == "autoencoder") {
    AutoencoderSpec spec;
    spec.latent_dim = cfg.at("latent").get<int>();
    spec.encoder_hidden = cfg.at("enc-hidden").get<int>();
    spec.decoder_hidden = cfg.at("dec-hidden").get<int>();
    spec.decoder_points = static_cast<int>(data.train.front().size());
    Autoencoder ae(spec, opt.rng_seed);
    opt.checkpoint_path = out / "ae.ckpt";
    const TrainReport report = train_autoencoder(ae, data, opt);
    result = {{"test_chamfer", report.test_chamfer},
              {"checkpoint", opt.checkpoint_path.string()}};
    std::cout << "autoencoder: test chamfer " << report.test_chamfer << " -> "
              << opt.checkpoint_path.string() << "\n";
  } else {
    ClassifierSpec spec;
    spec.architecture = architecture_from_name(arch);
    spec.widths = parse_int_list(cfg.at("widths").get<std::string>());
    spec.head_width = cfg.at("head-width").get<int>();
    spec.knn_k = cfg.at("knn-k").get<int>();
    spec.num_classes = data.num_classes;
    auto model = make_classifier(spec, opt.rng_seed);
    opt.checkpoint_path = out / "model.ckpt";
    const TrainReport report = train_classifier(*model, data, opt);
    result = {{"test_accuracy", report.test_accuracy},
              {"checkpoint", opt.checkpoint_path.string()}};
    std::cout << "classifier [" << arch << "]: test accuracy " << report.test_accuracy
              << " -> " << opt.checkpoint_path.string() << "\n";
  }
  write_manifest(out, "train", cfg, {{"result", result}});
  return 0;
}

// ---------------------------------------------------- attack config helpers

AttackConfig attack_from_cli(const std::string& name, const json& cfg) {
  AttackConfig a = attack_config_from_name(name);
  const auto override_if = [&](const char* key, auto&& apply) {
    const double v = cfg.at(key).get<double>();
    if (v >= 0.0) apply(v);
  };
  override_if("pa", [&](double v) { a.policy.p_a = v; });
  override_if("ps", [&](double v) { a.policy.p_s = v; });
  override_if("iters", [&](double v) { a.iterations = static_cast<int>(v); });
  override_if("lr", [&](double v) { a.lr = v; });
  override_if("kappa", [&](double v) { a.kappa = v; });
  if (!a.ss_enabled)
    override_if("bs-steps",
                [&](double v) { a.binary_search_steps = static_cast<int>(v); });
  a.epsilon = cfg.at("epsilon").get<double>();
  a.gamma = cfg.at("gamma").get<double>();
  a.knn_k = cfg.at("knn-k").get<int>();
  a.knn_threshold_alpha = cfg.at("threshold-alpha").get<double>();
  a.K_lf = cfg.at("k-lf").get<int>();
  a.spectral_graph_k = cfg.at("graph-k").get<int>();
  a.targeted = cfg.at("targeted").get<bool>();
  a.validate();
  return a;
}

struct LoadedModels {
  std::vector<std::unique_ptr<Classifier>> owned;
  std::vector<ModelRef> refs;
};

LoadedModels load_models(const std::string& list) {
  LoadedModels out;
  for (const auto& path : split_list(list)) {
    const std::string name = fs::path(path).stem().string();
    for (const auto& ref : out.refs)
      if (ref.name == name)
        throw UsageError("duplicate model name \"" + name +
                         "\"; rename the checkpoint files");
    out.owned.push_back(load_classifier(path));
    out.refs.push_back({name, out.owned.back().get()});
  }
  if (out.refs.empty()) throw UsageError("no models given");
  return out;
}

// ------------------------------------------------------------------ attack

int cmd_attack(const json& cfg) {
  const Dataset data = load_split_dataset(cfg.at("data").get<std::string>());
  const auto victim = load_classifier(cfg.at("victim").get<std::string>());
  std::unique_ptr<Autoencoder> ae;
  if (!cfg.at("ae").get<std::string>().empty())
    ae = load_autoencoder(cfg.at("ae").get<std::string>());

  AttackConfig attack = attack_from_cli(cfg.at("attack").get<std::string>(), cfg);
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const int samples = std::min<int>(cfg.at("samples").get<int>(),
                                    static_cast<int>(data.test.size()));
  const int workers = cfg.at("workers").get<int>();

  std::vector<std::size_t> subset(data.test.size());
  std::iota(subset.begin(), subset.end(), 0);
  Rng subset_rng(mix_seed(seed, 0x5B5E7));
  subset_rng.shuffle(subset);
  subset.resize(samples);

  const fs::path out = cfg.at("out").get<std::string>();
  fs::create_directories(out);

  std::vector<json> rows(subset.size());
  std::vector<int> successes(subset.size(), 0);
  parallel_for(subset.size(), workers > 0 ? workers : default_workers(),
               [&](std::size_t i) {
                 const std::size_t di = subset[i];
                 const PointCloud& clean = data.test[di];
                 AttackConfig sample_cfg = attack;
                 sample_cfg.rng_seed = mix_seed(mix_seed(seed, 0xA77AC), di);
                 if (sample_cfg.targeted) {
                   Rng trng(mix_seed(mix_seed(seed, 0x7A6E7), di));
                   int t = static_cast<int>(
                       trng.uniform_int(victim->spec().num_classes - 1));
                   if (t >= clean.label.value()) ++t;
                   sample_cfg.target_class = t;
                 }
                 AttackContext ctx;
                 ctx.model = victim.get();
                 ctx.ae = ae.get();
                 const AttackResult res = run_attack(ctx, clean, sample_cfg);
                 write_pcb(out / (res.adversarial.id + ".pcb"), res.adversarial);
                 successes[i] = res.success ? 1 : 0;
                 rows[i] = {{"id", clean.id},
                            {"label", clean.label.value()},
                            {"success", res.success},
                            {"linf", res.linf_norm},
                            {"l2", res.l2_norm},
                            {"iterations", res.iterations_used},
                            {"seed", sample_cfg.rng_seed}};
                 if (sample_cfg.targeted) rows[i]["target"] = *sample_cfg.target_class;
               });

  const double rate = 100.0 * std::accumulate(successes.begin(), successes.end(), 0) /
                      static_cast<double>(subset.size());
  write_manifest(out, "attack", cfg,
                 {{"samples", rows},
                  {"result", {{"white_box_success", rate}, {"n", subset.size()}}}});
  std::cout << attack.name() << ": white-box success " << rate << "% over "
            << subset.size() << " samples -> " << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ defend

int cmd_defend(const json& cfg) {
  const fs::path in = cfg.at("in").get<std::string>();
  if (!fs::is_directory(in)) throw UsageError("not a directory: " + in.string());
  DefenseConfig defense;
  defense.kind = defense_kind_from_name(cfg.at("defense").get<std::string>());
  defense.srs_drop = cfg.at("srs-drop").get<int>();
  defense.sor_k = cfg.at("sor-k").get<int>();
  defense.sor_alpha = cfg.at("sor-alpha").get<double>();
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".pcb" || ext == ".xyzl"))
      files.push_back(entry.path());
  }
  if (files.empty()) throw Error("no point files in " + in.string());
  std::sort(files.begin(), files.end());

  const fs::path out = cfg.at("out").get<std::string>();
  fs::create_directories(out);
  for (std::size_t i = 0; i < files.size(); ++i) {
    const PointCloud cloud = read_point_file(files[i]);
    Rng rng(mix_seed(seed, i));
    const PointCloud defended = apply_defense(cloud, defense, rng);
    write_pcb(out / (files[i].stem().string() + ".pcb"), defended);
  }
  write_manifest(out, "defend", cfg, {{"result", {{"n_files", files.size()}}}});
  std::cout << defense_kind_name(defense.kind) << ": " << files.size()
            << " clouds -> " << out.string() << "\n";
  return 0;
}

// ----------------------------------------------------------- eval and sweep

struct EvalSetup {
  Dataset data;
  LoadedModels models;
  std::unique_ptr<Autoencoder> ae;
  std::vector<AttackSpec> attacks;
  std::vector<DefenseSpec> defenses;
  MatrixOptions options;
};

EvalSetup prepare_eval(const json& cfg) {
  EvalSetup setup;
  setup.data = load_split_dataset(cfg.at("data").get<std::string>());
  setup.models = load_models(cfg.at("models").get<std::string>());
  if (!cfg.at("ae").get<std::string>().empty())
    setup.ae = load_autoencoder(cfg.at("ae").get<std::string>());

  for (const auto& name : split_list(cfg.at("attacks").get<std::string>())) {
    AttackSpec spec;
    spec.name = name;
    if (name != "none") spec.cfg = attack_from_cli(name, cfg);
    setup.attacks.push_back(std::move(spec));
  }
  if (setup.attacks.empty()) throw UsageError("no attacks given");

  for (const auto& name : split_list(cfg.at("defenses").get<std::string>())) {
    DefenseSpec spec;
    spec.name = name;
    spec.cfg.kind = defense_kind_from_name(name);
    spec.cfg.srs_drop = cfg.at("srs-drop").get<int>();
    spec.cfg.sor_k = cfg.at("sor-k").get<int>();
    spec.cfg.sor_alpha = cfg.at("sor-alpha").get<double>();
    setup.defenses.push_back(std::move(spec));
  }
  if (setup.defenses.empty()) throw UsageError("no defenses given");

  setup.options.samples = cfg.at("samples").get<int>();
  setup.options.seeds = parse_seed_list(cfg.at("seeds").get<std::string>());
  setup.options.workers = cfg.at("workers").get<int>();
  setup.options.ae = setup.ae.get();
  const std::string victims = cfg.at("victims").get<std::string>();
  if (!victims.empty()) setup.options.victims = split_list(victims);
  setup.options.config_digest = config_digest(cfg);
  return setup;
}

int cmd_eval(const json& cfg) {
  EvalSetup setup = prepare_eval(cfg);
  const TransferReport report = run_matrix(setup.models.refs, setup.attacks,
                                           setup.defenses, setup.data.test,
                                           setup.options);
  const fs::path out = cfg.at("out").get<std::string>();
  emit_report(report, out);
  write_manifest(out, "eval", cfg, {{"seeds", report.seeds}});
  std::cout << "matrix: " << report.entries.size() << " cells -> " << out.string()
            << "\n";
  return 0;
}

int cmd_sweep(const json& cfg) {
  const std::string param = cfg.at("param").get<std::string>();
  if (param != "pa" && param != "ps" && param != "iterations" && param != "epsilon")
    throw UsageError("param must be one of pa, ps, iterations, epsilon");
  const std::vector<double> values = parse_values(cfg.at("values").get<std::string>());

  EvalSetup setup = prepare_eval(cfg);
  SweepReport sweep;
  sweep.param = param;
  sweep.values = values;
  for (const double v : values) {
    std::vector<AttackSpec> attacks = setup.attacks;
    for (auto& a : attacks) {
      if (!a.cfg) continue;
      if (param == "pa" && a.cfg->ss_enabled) a.cfg->policy.p_a = v;
      if (param == "ps" && a.cfg->ss_enabled) a.cfg->policy.p_s = v;
      if (param == "iterations") a.cfg->iterations = static_cast<int>(v);
      if (param == "epsilon") a.cfg->epsilon = v;
      a.cfg->validate();
    }
    sweep.reports.push_back(run_matrix(setup.models.refs, attacks, setup.defenses,
                                       setup.data.test, setup.options));
  }
  const fs::path out = cfg.at("out").get<std::string>();
  emit_sweep(sweep, out);
  write_manifest(out, "sweep", cfg, {{"seeds", setup.options.seeds}});
  std::cout << "sweep over " << param << ": " << values.size() << " values -> "
            << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ report

int cmd_report(const json& cfg) {
  const fs::path in = cfg.at("in").get<std::string>();
  const fs::path out = cfg.at("out").get<std::string>();
  std::ifstream is(in);
  if (!is) throw UsageError("cannot open: " + in.string());
  json j = json::parse(is, nullptr, false);
  if (j.is_discarded()) throw Error("malformed JSON: " + in.string());
  const std::string version = j.value("version", "");
  if (version == "report-v1") {
    emit_report(load_report(in), out);
  } else if (version == "sweep-v1") {
    emit_sweep(load_sweep(in), out);
  } else {
    throw UsageError("unsupported document version \"" + version + "\"");
  }
  write_manifest(out, "report", cfg);
  std::cout << "re-emitted " << version << " -> " << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- wiring

// sentinel -1 = keep the per-attack default
struct CommonAttackOpts {
  double pa = -1.0, ps = -1.0, iters = -1.0, lr = -1.0, kappa = -1.0, bs_steps = -1.0;
  double epsilon = 0.18, gamma = 0.25, threshold_alpha = 1.1;
  int knn_k = 5, k_lf = 0, graph_k = 10;
  bool targeted = false;

  void wire(OptionSet& opts) {
    opts.add("pa", pa, "transform probability p_a (-1 = attack default)");
    opts.add("ps", ps, "scale-vs-shear probability p_s (-1 = attack default)");
    opts.add("iters", iters, "iterations (-1 = attack default)");
    opts.add("lr", lr, "optimizer learning rate (-1 = attack default)");
    opts.add("kappa", kappa, "margin kappa (-1 = attack default)");
    opts.add("bs-steps", bs_steps, "binary search steps (-1 = attack default)");
    opts.add("epsilon", epsilon, "l_inf budget");
    opts.add("gamma", gamma, "advpc/aof trade-off");
    opts.add("knn-k", knn_k, "kNN-loss neighborhood size");
    opts.add("threshold-alpha", threshold_alpha, "kNN-loss outlier threshold alpha");
    opts.add("k-lf", k_lf, "retained low frequencies (0 = N/10)");
    opts.add("graph-k", graph_k, "spectral graph neighbors");
    opts.add_flag("targeted", targeted, "targeted attack with random targets");
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Benchmark for transferable adversarial attacks on point-cloud "
               "classifiers"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  OptionSet gen_opts(*gen);
  int gd_classes = 8, gd_per_class = 100, gd_points = 256;
  double gd_noise = 0.01, gd_train_frac = 0.8;
  std::string gd_shapes, gd_format = "pcb", gd_out;
  std::uint64_t gd_seed = 0;
  gen_opts.add("classes", gd_classes, "number of shape classes");
  gen_opts.add("shapes", gd_shapes, "explicit comma list of shapes (overrides --classes)");
  gen_opts.add("per-class", gd_per_class, "samples per class");
  gen_opts.add("points", gd_points, "points per cloud");
  gen_opts.add("noise", gd_noise, "surface jitter sigma");
  gen_opts.add("train-frac", gd_train_frac, "train split fraction");
  gen_opts.add("seed", gd_seed, "rng seed");
  gen_opts.add("format", gd_format, "pcb or xyzl");
  gen_opts.add("out", gd_out, "output directory");
  gen_opts.require("out");

  // train
  auto* train = app.add_subcommand("train", "train a classifier or autoencoder");
  OptionSet train_opts(*train);
  std::string tr_data, tr_arch = "pointwise-maxpool", tr_widths = "64,128,256", tr_out;
  int tr_head = 128, tr_knn_k = 10, tr_latent = 128, tr_enc_hidden = 64,
      tr_dec_hidden = 256, tr_epochs = 50, tr_batch = 32, tr_workers = 0;
  double tr_lr = 1e-3;
  std::uint64_t tr_seed = 0;
  train_opts.add("data", tr_data, "dataset root (train/ + test/)");
  train_opts.require("data");
  train_opts.add("arch", tr_arch, "pointwise-maxpool, edge-conv, or autoencoder");
  train_opts.add("widths", tr_widths, "comma list of layer widths");
  train_opts.add("head-width", tr_head, "classifier head width");
  train_opts.add("knn-k", tr_knn_k, "edge-conv neighborhood size");
  train_opts.add("latent", tr_latent, "autoencoder latent dimension");
  train_opts.add("enc-hidden", tr_enc_hidden, "autoencoder encoder hidden width");
  train_opts.add("dec-hidden", tr_dec_hidden, "autoencoder decoder hidden width");
  train_opts.add("epochs", tr_epochs, "training epochs");
  train_opts.add("lr", tr_lr, "learning rate");
  train_opts.add("batch", tr_batch, "batch size");
  train_opts.add("seed", tr_seed, "rng seed");
  train_opts.add("workers", tr_workers, "worker threads (0 = auto)");
  train_opts.add("out", tr_out, "output directory");
  train_opts.require("out");

  // attack
  auto* attack = app.add_subcommand("attack", "craft adversarial clouds");
  OptionSet attack_opts(*attack);
  std::string at_data, at_victim, at_ae, at_attack = "3d-adv", at_out;
  int at_samples = 200, at_workers = 0;
  std::uint64_t at_seed = 0;
  CommonAttackOpts at_common;
  attack_opts.add("data", at_data, "dataset root");
  attack_opts.require("data");
  attack_opts.add("victim", at_victim, "victim checkpoint");
  attack_opts.require("victim");
  attack_opts.add("ae", at_ae, "autoencoder checkpoint (advpc)");
  attack_opts.add("attack", at_attack, "attack name (e.g. knn, ss-knn)");
  attack_opts.add("samples", at_samples, "test samples to attack");
  at_common.wire(attack_opts);
  attack_opts.add("seed", at_seed, "rng seed");
  attack_opts.add("workers", at_workers, "worker threads (0 = auto)");
  attack_opts.add("out", at_out, "output directory");
  attack_opts.require("out");

  // defend
  auto* defend = app.add_subcommand("defend", "purify point clouds");
  OptionSet defend_opts(*defend);
  std::string df_in, df_defense = "sor", df_out;
  int df_srs_drop = -1, df_sor_k = 2;
  double df_sor_alpha = 1.1;
  std::uint64_t df_seed = 0;
  defend_opts.add("in", df_in, "input directory of point files");
  defend_opts.require("in");
  defend_opts.add("defense", df_defense, "none, srs, or sor");
  defend_opts.add("srs-drop", df_srs_drop, "points to drop (-1 = N/2)");
  defend_opts.add("sor-k", df_sor_k, "SOR neighborhood size");
  defend_opts.add("sor-alpha", df_sor_alpha, "SOR threshold alpha");
  defend_opts.add("seed", df_seed, "rng seed");
  defend_opts.add("out", df_out, "output directory");
  defend_opts.require("out");

  // eval
  auto* eval = app.add_subcommand("eval", "run the transfer matrix");
  OptionSet eval_opts(*eval);
  std::string ev_data, ev_models, ev_victims, ev_attacks = "knn,ss-knn",
              ev_defenses = "none", ev_seeds = "1,2,3", ev_ae, ev_out;
  int ev_samples = 200, ev_workers = 0, ev_srs_drop = -1, ev_sor_k = 2;
  double ev_sor_alpha = 1.1;
  CommonAttackOpts ev_common;
  eval_opts.add("data", ev_data, "dataset root");
  eval_opts.require("data");
  eval_opts.add("models", ev_models, "comma list of checkpoints");
  eval_opts.require("models");
  eval_opts.add("victims", ev_victims, "victim model names (default: all)");
  eval_opts.add("attacks", ev_attacks, "comma list of attacks (none allowed)");
  eval_opts.add("defenses", ev_defenses, "comma list of defenses");
  eval_opts.add("samples", ev_samples, "test samples per victim");
  eval_opts.add("seeds", ev_seeds, "comma list of run seeds");
  ev_common.wire(eval_opts);
  eval_opts.add("srs-drop", ev_srs_drop, "SRS points to drop (-1 = N/2)");
  eval_opts.add("sor-k", ev_sor_k, "SOR neighborhood size");
  eval_opts.add("sor-alpha", ev_sor_alpha, "SOR threshold alpha");
  eval_opts.add("ae", ev_ae, "autoencoder checkpoint (advpc)");
  eval_opts.add("workers", ev_workers, "worker threads (0 = auto)");
  eval_opts.add("out", ev_out, "output directory");
  eval_opts.require("out");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "eval across a swept parameter");
  OptionSet sweep_opts(*sweep);
  std::string sw_data, sw_models, sw_victims, sw_attacks = "knn,ss-knn",
              sw_defenses = "none", sw_seeds = "1,2,3", sw_ae, sw_out, sw_param,
              sw_values;
  int sw_samples = 200, sw_workers = 0, sw_srs_drop = -1, sw_sor_k = 2;
  double sw_sor_alpha = 1.1;
  CommonAttackOpts sw_common;
  sweep_opts.add("param", sw_param, "pa, ps, iterations, or epsilon");
  sweep_opts.require("param");
  sweep_opts.add("values", sw_values, "comma list or lo:hi:step");
  sweep_opts.require("values");
  sweep_opts.add("data", sw_data, "dataset root");
  sweep_opts.require("data");
  sweep_opts.add("models", sw_models, "comma list of checkpoints");
  sweep_opts.require("models");
  sweep_opts.add("victims", sw_victims, "victim model names (default: all)");
  sweep_opts.add("attacks", sw_attacks, "comma list of attacks");
  sweep_opts.add("defenses", sw_defenses, "comma list of defenses");
  sweep_opts.add("samples", sw_samples, "test samples per victim");
  sweep_opts.add("seeds", sw_seeds, "comma list of run seeds");
  sw_common.wire(sweep_opts);
  sweep_opts.add("srs-drop", sw_srs_drop, "SRS points to drop (-1 = N/2)");
  sweep_opts.add("sor-k", sw_sor_k, "SOR neighborhood size");
  sweep_opts.add("sor-alpha", sw_sor_alpha, "SOR threshold alpha");
  sweep_opts.add("ae", sw_ae, "autoencoder checkpoint (advpc)");
  sweep_opts.add("workers", sw_workers, "worker threads (0 = auto)");
  sweep_opts.add("out", sw_out, "output directory");
  sweep_opts.require("out");

  // report
  auto* report = app.add_subcommand("report", "re-emit CSV/plots from a JSON report");
  OptionSet report_opts(*report);
  std::string rp_in, rp_out;
  report_opts.add("in", rp_in, "report.json or sweep.json");
  report_opts.require("in");
  report_opts.add("out", rp_out, "output directory");
  report_opts.require("out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_opts.resolve("gen-data"));
    if (train->parsed()) return cmd_train(train_opts.resolve("train"));
    if (attack->parsed()) return cmd_attack(attack_opts.resolve("attack"));
    if (defend->parsed()) return cmd_defend(defend_opts.resolve("defend"));
    if (eval->parsed()) return cmd_eval(eval_opts.resolve("eval"));
    if (sweep->parsed()) return cmd_sweep(sweep_opts.resolve("sweep"));
    if (report->parsed()) return cmd_report(report_opts.resolve("report"));
    std::cerr << "error: no command\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("ssbench");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ssbench
