// cprlab: synthesize, corrupt, denoise, and evaluate multi-channel CPR
// signals. Every command writes its outputs atomically plus a run manifest.
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "cprlab/babbs.hpp"
#include "cprlab/baselines.hpp"
#include "cprlab/corruption.hpp"
#include "cprlab/denoiser.hpp"
#include "cprlab/ioutil.hpp"
#include "cprlab/manifest.hpp"
#include "cprlab/metrics.hpp"
#include "cprlab/rng.hpp"
#include "cprlab/session.hpp"
#include "cprlab/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cprlab;

namespace {

// Exit codes (also documented in the README):
//   0 success, 1 usage, 2 I/O, 3 schema, 4 missing channel,
//   5 version/format, 6 invalid input or diverged computation.
enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kSchema = 3,
  kMissingChannel = 4,
  kVersion = 5,
  kInvalid = 6,
};

std::size_t thread_cap() {
  std::size_t cap = std::thread::hardware_concurrency();
  if (cap == 0) cap = 1;
  if (const char* env = std::getenv("CPRLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v >= 1) cap = std::min<std::size_t>(cap, v);
  }
  return cap;
}

void run_parallel(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " +
                        ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

json protocol_json(const babbs::CprProtocol& p) {
  return {{"n_cycles", p.n_cycles},
          {"compression_rate", p.compression_rate},
          {"compression_depth", p.compression_depth},
          {"decompression_depth", p.decompression_depth},
          {"duty", p.duty},
          {"target_dbp", p.target_dbp},
          {"sample_rate", p.sample_rate}};
}

json babbs_json(const babbs::BabbsParams& b) {
  return {{"e_min", b.e_min}, {"e_max", b.e_max}, {"f_min", b.f_min},
          {"f_max", b.f_max}, {"pe", b.pe},       {"pf", b.pf},
          {"d_target", b.d_target}};
}

void apply_generate_config(const std::string& path, babbs::CprProtocol& proto,
                           babbs::BabbsParams& params) {
  json j;
  try {
    j = json::parse(ioutil::read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("generate config: invalid JSON: ") + e.what());
  }
  try {
    if (j.contains("protocol")) {
      const auto& p = j["protocol"];
      if (p.contains("n_cycles")) proto.n_cycles = p["n_cycles"].get<int>();
      if (p.contains("compression_rate"))
        proto.compression_rate = p["compression_rate"].get<double>();
      if (p.contains("compression_depth"))
        proto.compression_depth = p["compression_depth"].get<double>();
      if (p.contains("decompression_depth"))
        proto.decompression_depth = p["decompression_depth"].get<double>();
      if (p.contains("duty")) proto.duty = p["duty"].get<double>();
      if (p.contains("target_dbp")) proto.target_dbp = p["target_dbp"].get<double>();
      if (p.contains("sample_rate"))
        proto.sample_rate = p["sample_rate"].get<double>();
    }
    if (j.contains("babbs")) {
      const auto& b = j["babbs"];
      if (b.contains("e_min")) params.e_min = b["e_min"].get<double>();
      if (b.contains("e_max")) params.e_max = b["e_max"].get<double>();
      if (b.contains("f_min")) params.f_min = b["f_min"].get<double>();
      if (b.contains("f_max")) params.f_max = b["f_max"].get<double>();
      if (b.contains("pe")) params.pe = b["pe"].get<double>();
      if (b.contains("pf")) params.pf = b["pf"].get<double>();
      if (b.contains("d_target")) params.d_target = b["d_target"].get<double>();
    }
  } catch (const json::type_error& e) {
    throw SchemaError(std::string("generate config: bad field type: ") +
                      e.what());
  }
}

std::string hash_preprocessed(
    const std::array<std::vector<double>, kNumChannels>& channels) {
  std::string bytes;
  for (const auto& ch : channels)
    bytes.append(reinterpret_cast<const char*>(ch.data()),
                 ch.size() * sizeof(double));
  return ioutil::fnv1a_hex(bytes);
}

struct CommonArgs {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string config;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool out_required = true) {
  auto* s = cmd->add_option("--seed", a.seed, "Base seed for this run");
  cmd->parse_complete_callback([&a, s]() { a.seed_set = s->count() > 0; });
  auto* o = cmd->add_option("--out", a.out, "Output directory");
  if (out_required) o->required();
  cmd->add_option("--config", a.config, "JSON config file");
}

// ---------------------------------------------------------------- generate

int cmd_generate(const CommonArgs& common, int patients, bool sweep) {
  babbs::CprProtocol proto;
  babbs::BabbsParams params;
  if (!common.config.empty()) apply_generate_config(common.config, proto, params);

  auto profiles = babbs::patient_sweep();
  if (!sweep) {
    if (patients < 1 || patients > static_cast<int>(profiles.size())) {
      std::cerr << "generate: --patients must lie in [1,"
                << profiles.size() << "] (or pass --sweep)\n";
      return kUsage;
    }
    profiles.resize(static_cast<std::size_t>(patients));
  }

  manifest::RunManifest mf;
  mf.command = "generate";
  mf.started_at = ioutil::iso8601_now();
  mf.tool_version = kToolVersion;
  mf.seeds["base"] = common.seed;

  ensure_out_dir(common.out);
  std::vector<std::string> outputs(profiles.size());
  run_parallel(profiles.size(), [&](std::size_t i) {
    const SignalSession s = babbs::synthesize_session(profiles[i], proto, params);
    const std::string path = join_path(common.out, profiles[i].patient_id + ".csv");
    write_session_csv(s, path);
    outputs[i] = path;
  });

  json params_j = {{"command", "generate"},
                   {"patients", profiles.size()},
                   {"sweep", sweep},
                   {"seed", common.seed},
                   {"generator_version", kGeneratorVersion},
                   {"protocol", protocol_json(proto)},
                   {"babbs", babbs_json(params)}};
  mf.config_hash = manifest::config_hash(params_j.dump());
  mf.output_paths = outputs;
  mf.finished_at = ioutil::iso8601_now();
  manifest::write_manifest(join_path(common.out, "manifest.json"), mf);
  return kOk;
}

// ----------------------------------------------------------------- corrupt

int cmd_corrupt(const CommonArgs& common, const std::vector<std::string>& inputs) {
  corruption::CorruptionConfig cfg;
  if (!common.config.empty())
    cfg = corruption::corruption_config_from_json(ioutil::read_file(common.config));
  if (common.seed_set) cfg.seed = common.seed;  // CLI flag beats config file

  manifest::RunManifest mf;
  mf.command = "corrupt";
  mf.started_at = ioutil::iso8601_now();
  mf.tool_version = kToolVersion;
  mf.seeds["base"] = cfg.seed;
  mf.input_paths = inputs;

  ensure_out_dir(common.out);
  std::vector<std::string> outputs(inputs.size());
  std::vector<std::uint64_t> file_seeds(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    file_seeds[i] = derive_seed(cfg.seed, i);

  run_parallel(inputs.size(), [&](std::size_t i) {
    SignalSession s = read_session_csv(inputs[i]);
    corruption::CorruptionConfig file_cfg = cfg;
    file_cfg.seed = file_seeds[i];
    const SignalSession noisy = corruption::corrupt_session(s, file_cfg);
    const std::string name = fs::path(inputs[i]).filename().string();
    const std::string path = join_path(common.out, name);
    write_session_csv(noisy, path);
    outputs[i] = path;
  });

  for (std::size_t i = 0; i < inputs.size(); ++i)
    mf.seeds[fs::path(inputs[i]).filename().string()] = file_seeds[i];

  json params_j = json::parse(corruption::corruption_config_to_json(cfg));
  params_j["command"] = "corrupt";
  mf.config_hash = manifest::config_hash(params_j.dump());
  mf.output_paths = outputs;
  mf.finished_at = ioutil::iso8601_now();
  manifest::write_manifest(join_path(common.out, "manifest.json"), mf);
  return kOk;
}

// ------------------------------------------------------------------- train

int cmd_train(const CommonArgs& common, const std::vector<std::string>& inputs,
              std::string model_path) {
  trainer::TrainConfig cfg;
  if (!common.config.empty())
    cfg = trainer::train_config_from_json(ioutil::read_file(common.config));
  if (common.seed_set) cfg.seed = common.seed;

  std::vector<SignalSession> sessions;
  sessions.reserve(inputs.size());
  for (const auto& p : inputs) sessions.push_back(read_session_csv(p));

  denoiser::DenoiserModel model = denoiser::build_model(cfg.seed);
  trainer::Dataset data = trainer::make_dataset(sessions, model.window, 64,
                                                cfg.seed, cfg.val_fraction);
  const trainer::TrainHistory hist = trainer::fit(model, data, cfg);

  ensure_out_dir(common.out);
  if (model_path.empty()) model_path = join_path(common.out, "model.ckpt");
  denoiser::save_model(model, model_path);
  const std::string curve_path = join_path(common.out, "loss_curve.csv");
  ioutil::atomic_write_file(curve_path, trainer::history_to_csv(hist));

  manifest::RunManifest mf;
  mf.command = "train";
  mf.started_at = ioutil::iso8601_now();
  mf.tool_version = kToolVersion;
  mf.seeds["base"] = cfg.seed;
  mf.input_paths = inputs;
  mf.output_paths = {model_path, curve_path};
  json params_j = json::parse(trainer::train_config_to_json(cfg));
  params_j["command"] = "train";
  mf.config_hash = manifest::config_hash(params_j.dump());

  json details;
  details["history"] = json::array();
  for (std::size_t i = 0; i < hist.epochs.size(); ++i)
    details["history"].push_back({{"epoch", i + 1},
                                  {"train_loss", hist.epochs[i].train_loss},
                                  {"val_loss", hist.epochs[i].val_loss}});
  details["stopped_epoch"] = hist.stopped_epoch;
  details["best_epoch"] = hist.best_epoch;
  mf.finished_at = ioutil::iso8601_now();
  manifest::write_manifest(join_path(common.out, "manifest.json"), mf,
                           details.dump());
  return kOk;
}

// ----------------------------------------------------------------- denoise

int cmd_denoise(const CommonArgs& common, const std::string& model_path,
                const std::vector<std::string>& inputs) {
  const denoiser::DenoiserModel model = denoiser::load_model(model_path);

  manifest::RunManifest mf;
  mf.command = "denoise";
  mf.started_at = ioutil::iso8601_now();
  mf.tool_version = kToolVersion;
  mf.input_paths = inputs;
  mf.input_paths.push_back(model_path);

  ensure_out_dir(common.out);
  std::vector<std::string> outputs(inputs.size());
  run_parallel(inputs.size(), [&](std::size_t i) {
    const SignalSession s = read_session_csv(inputs[i]);
    const SignalSession d = denoiser::denoise_session(model, s);
    const std::string path =
        join_path(common.out, fs::path(inputs[i]).filename().string());
    write_session_csv(d, path);
    outputs[i] = path;
  });

  json params_j = {{"command", "denoise"},
                   {"window", model.window},
                   {"stride", model.stride},
                   {"checkpoint_version", model.version}};
  mf.config_hash = manifest::config_hash(params_j.dump());
  mf.output_paths = outputs;
  mf.finished_at = ioutil::iso8601_now();
  manifest::write_manifest(join_path(common.out, "manifest.json"), mf);
  return kOk;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const CommonArgs& common, const std::string& clean_path,
                 const std::string& noisy_path, const std::string& denoised_path,
                 const std::string& method, const std::string& report_name) {
  const SignalSession clean = read_session_csv(clean_path);
  const SignalSession noisy = read_session_csv(noisy_path);
  const SignalSession denoised = read_session_csv(denoised_path);
  const metrics::EvalReport r =
      metrics::evaluate_method(method, clean, noisy, denoised);

  ensure_out_dir(common.out);
  const std::string report_path = join_path(common.out, report_name);
  const std::string scores_path = join_path(common.out, "scores.csv");
  const std::string corr_path = join_path(common.out, "correlations.csv");
  ioutil::atomic_write_file(report_path, metrics::report_to_json(r));
  ioutil::atomic_write_file(scores_path, metrics::scores_csv({r}));
  ioutil::atomic_write_file(corr_path, metrics::correlations_csv({r}));

  manifest::RunManifest mf;
  mf.command = "evaluate";
  mf.started_at = ioutil::iso8601_now();
  mf.tool_version = kToolVersion;
  mf.input_paths = {clean_path, noisy_path, denoised_path};
  mf.output_paths = {report_path, scores_path, corr_path};
  json params_j = {{"command", "evaluate"}, {"method", method}};
  mf.config_hash = manifest::config_hash(params_j.dump());
  mf.finished_at = ioutil::iso8601_now();
  manifest::write_manifest(join_path(common.out, "manifest.json"), mf);
  return kOk;
}

// ----------------------------------------------------------------- compare

int cmd_compare(const CommonArgs& common, const std::string& model_path,
                const std::vector<std::string>& train_paths,
                const std::string& clean_path, const std::string& noisy_path,
                const std::string& methods_flag) {
  std::vector<std::string> methods;
  {
    std::string cur;
    for (char c : methods_flag + ",") {
      if (c == ',') {
        if (!cur.empty()) methods.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }
  for (const auto& m : methods)
    if (m != "proposed" && m != "nlms" && m != "vanilla") {
      std::cerr << "compare: unknown method '" << m
                << "' (expected proposed,nlms,vanilla)\n";
      return kUsage;
    }
  if (methods.empty()) {
    std::cerr << "compare: --methods selected nothing\n";
    return kUsage;
  }

  const denoiser::DenoiserModel model = denoiser::load_model(model_path);
  const SignalSession clean = read_session_csv(clean_path);
  const SignalSession noisy = read_session_csv(noisy_path);

  // Shared preprocessing: every method consumes the imputed session
  // normalized with the proposed model's training statistics.
  const preprocess::ImputedSession imp = preprocess::impute_session(noisy);
  std::array<std::vector<double>, kNumChannels> shared_norm;
  for (std::size_t c = 0; c < kNumChannels; ++c)
    shared_norm[c] = preprocess::normalize(imp.values[c], model.norm_stats[c]);
  const std::string shared_hash = hash_preprocessed(shared_norm);

  ensure_out_dir(common.out);
  std::vector<metrics::EvalReport> reports;
  json hashes = json::object();
  std::vector<std::string> outputs;

  for (const auto& method : methods) {
    SignalSession out;
    std::string method_hash = shared_hash;
    if (method == "proposed") {
      out = denoiser::denoise_session(model, noisy);
    } else if (method == "nlms") {
      baselines::NlmsConfig ncfg;
      out = noisy;
      out.is_clean = false;
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        const std::vector<double> y =
            baselines::nlms_denoise(shared_norm[c], ncfg);
        out.channels[c] = preprocess::denormalize(y, model.norm_stats[c]);
      }
    } else {  // vanilla
      std::vector<SignalSession> train_sessions;
      if (train_paths.empty())
        throw InvalidInput(
            "compare: --train files are required for the vanilla method");
      for (const auto& p : train_paths)
        train_sessions.push_back(read_session_csv(p));
      baselines::VanillaAeConfig vcfg;
      vcfg.seed = common.seed;
      const baselines::VanillaAeModel vae =
          baselines::vanilla_ae_fit(train_sessions, vcfg);
      // The vanilla model fits its stats on the same training sessions; its
      // preprocessing must match the shared path bit-for-bit.
      std::array<std::vector<double>, kNumChannels> v_norm;
      for (std::size_t c = 0; c < kNumChannels; ++c)
        v_norm[c] = preprocess::normalize(imp.values[c], vae.norm_stats[c]);
      method_hash = hash_preprocessed(v_norm);
      out = baselines::vanilla_ae_denoise(vae, noisy);
    }
    hashes[method] = method_hash;
    reports.push_back(metrics::evaluate_method(method, clean, noisy, out));
    const std::string path =
        join_path(common.out, "denoised_" + method + ".csv");
    write_session_csv(out, path);
    outputs.push_back(path);
  }

  json combined;
  combined["methods"] = json::array();
  for (const auto& r : reports)
    combined["methods"].push_back(json::parse(metrics::report_to_json(r)));
  combined["preprocessing_hashes"] = hashes;

  const std::string report_path = join_path(common.out, "report.json");
  const std::string scores_path = join_path(common.out, "scores.csv");
  const std::string corr_path = join_path(common.out, "correlations.csv");
  ioutil::atomic_write_file(report_path, combined.dump(2) + "\n");
  ioutil::atomic_write_file(scores_path, metrics::scores_csv(reports));
  ioutil::atomic_write_file(corr_path, metrics::correlations_csv(reports));
  outputs.push_back(report_path);
  outputs.push_back(scores_path);
  outputs.push_back(corr_path);

  manifest::RunManifest mf;
  mf.command = "compare";
  mf.started_at = ioutil::iso8601_now();
  mf.tool_version = kToolVersion;
  mf.seeds["base"] = common.seed;
  mf.input_paths = {model_path, clean_path, noisy_path};
  for (const auto& p : train_paths) mf.input_paths.push_back(p);
  mf.output_paths = outputs;
  json params_j = {{"command", "compare"},
                   {"methods", methods},
                   {"seed", common.seed}};
  mf.config_hash = manifest::config_hash(params_j.dump());
  mf.finished_at = ioutil::iso8601_now();
  manifest::write_manifest(join_path(common.out, "manifest.json"), mf);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPR signal synthesis, corruption, denoising and evaluation"};
  app.require_subcommand(1);

  CommonArgs g_gen, g_cor, g_tr, g_den, g_ev, g_cmp;

  auto* gen = app.add_subcommand("generate", "Synthesize clean sessions");
  int patients = 0;
  bool sweep = false;
  add_common(gen, g_gen);
  gen->add_option("--patients", patients, "Number of sweep profiles to emit");
  gen->add_flag("--sweep", sweep, "Emit every profile in the sweep grid");

  auto* cor = app.add_subcommand("corrupt", "Apply artifact injectors");
  std::vector<std::string> cor_inputs;
  add_common(cor, g_cor);
  cor->add_option("inputs", cor_inputs, "Clean session CSVs")->required();

  auto* tr = app.add_subcommand("train", "Train the denoiser");
  std::vector<std::string> tr_inputs;
  std::string tr_model;
  add_common(tr, g_tr);
  tr->add_option("inputs", tr_inputs, "Noisy session CSVs")->required();
  tr->add_option("--model", tr_model, "Checkpoint path (default OUT/model.ckpt)");

  auto* den = app.add_subcommand("denoise", "Run a checkpoint over sessions");
  std::vector<std::string> den_inputs;
  std::string den_model;
  add_common(den, g_den);
  den->add_option("--model", den_model, "Checkpoint path")->required();
  den->add_option("inputs", den_inputs, "Noisy session CSVs")->required();

  auto* ev = app.add_subcommand("evaluate", "Score one denoised session");
  std::string ev_clean, ev_noisy, ev_denoised, ev_method = "proposed";
  std::string ev_report = "report.json";
  add_common(ev, g_ev);
  ev->add_option("--clean", ev_clean, "Clean reference CSV")->required();
  ev->add_option("--noisy", ev_noisy, "Noisy input CSV")->required();
  ev->add_option("--denoised", ev_denoised, "Denoised estimate CSV")->required();
  ev->add_option("--method", ev_method, "Method label for the report");
  ev->add_option("--report", ev_report, "Report file name inside --out");

  auto* cmp = app.add_subcommand("compare", "Proposed vs baselines");
  std::string cmp_model, cmp_clean, cmp_noisy;
  std::string cmp_methods = "proposed,nlms,vanilla";
  std::vector<std::string> cmp_train;
  add_common(cmp, g_cmp);
  cmp->add_option("--model", cmp_model, "Trained checkpoint")->required();
  cmp->add_option("--train", cmp_train,
                  "Noisy training CSVs (fits the vanilla baseline)");
  cmp->add_option("--clean", cmp_clean, "Clean reference CSV")->required();
  cmp->add_option("--noisy", cmp_noisy, "Noisy evaluation CSV")->required();
  cmp->add_option("--methods", cmp_methods, "Comma list: proposed,nlms,vanilla");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every argument error maps to the single
    // documented usage code.
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(g_gen, patients, sweep);
    if (cor->parsed()) return cmd_corrupt(g_cor, cor_inputs);
    if (tr->parsed()) return cmd_train(g_tr, tr_inputs, tr_model);
    if (den->parsed()) return cmd_denoise(g_den, den_model, den_inputs);
    if (ev->parsed())
      return cmd_evaluate(g_ev, ev_clean, ev_noisy, ev_denoised, ev_method,
                          ev_report);
    if (cmp->parsed())
      return cmd_compare(g_cmp, cmp_model, cmp_train, cmp_clean, cmp_noisy,
                         cmp_methods);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const MissingChannelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissingChannel;
  } catch (const VersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVersion;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSchema;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
