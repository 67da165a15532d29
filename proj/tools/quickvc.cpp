// quickvc: command-line front end for the conversion engine.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qvc/dsp/stft.hpp"
#include "qvc/errors.hpp"
#include "qvc/log.hpp"
#include "qvc/losses/losses.hpp"
#include "qvc/model/model.hpp"
#include "qvc/nn/weights.hpp"
#include "qvc/runtime/bench.hpp"
#include "qvc/runtime/features.hpp"
#include "qvc/runtime/inspect.hpp"
#include "qvc/runtime/pipeline.hpp"
#include "qvc/runtime/wav.hpp"
#include "qvc/simd/kernels.hpp"

namespace {

using json = nlohmann::json;
using namespace qvc;

constexpr int kAuditSchemaVersion = 1;

model::Model load_model(const std::string& path) { return model::Model::load(nn::read_weights_file(path)); }

// ---- convert ---------------------------------------------------------------

struct ConvertArgs {
  std::string model, features, ref_wav, source_wav, out;
  double noise_scale = runtime::kDefaultNoiseScale;
  std::uint64_t seed = 0;
};

int run_convert(const ConvertArgs& a) {
  runtime::ConversionRequest req;
  if (!a.features.empty()) {
    req.source = runtime::read_content_features(a.features);
  } else if (!a.source_wav.empty()) {
    req.source = runtime::wav_read(a.source_wav);
  } else {
    throw UsageError("convert needs --features (or --source-wav together with --features)");
  }
  req.target_ref = runtime::wav_read(a.ref_wav);
  req.noise_scale = a.noise_scale;
  req.seed = a.seed;
  const model::Model m = load_model(a.model);
  runtime::StageTimings t;
  const Waveform out = runtime::convert(req, m, &t);
  runtime::wav_write(a.out, out);
  spdlog::info("wrote {} samples ({:.2f} s) to {} in {:.3f} s", out.size(), out.seconds(), a.out, t.total());
  return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string model;
  double seconds = 10.0;
  std::size_t threads = 1;
  std::size_t repetitions = 5;
  std::string mode = "full";
  std::uint64_t seed = 1;
  bool json_out = false;
  bool tiny = false;
};

int run_bench(const BenchArgs& a) {
  runtime::BenchOptions opt;
  opt.seconds = a.seconds;
  opt.threads = a.threads;
  opt.repetitions = a.repetitions;
  opt.mode = runtime::parse_bench_mode(a.mode);
  opt.seed = a.seed;
  const model::Model m = a.model.empty()
                             ? model::Model::load(model::random_weights(
                                   a.tiny ? model::ModelConfig::tiny() : model::ModelConfig{}, a.seed))
                             : load_model(a.model);
  const runtime::BenchReport r = runtime::bench(m, opt);
  if (a.json_out) {
    json j = runtime::to_json(r);
    j["weights"] = a.model.empty() ? "random" : a.model;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << runtime::to_text(r);
  }
  return 0;
}

// ---- inspect ---------------------------------------------------------------

int run_inspect(const std::string& path) {
  const runtime::InspectReport r = runtime::inspect(nn::read_weights_file(path));
  std::cout << runtime::to_json(r).dump(2) << "\n";
  if (!r.ok()) {
    std::cerr << "quickvc: " << r.error << "\n";
    return 3;
  }
  return 0;
}

// ---- init ------------------------------------------------------------------

int run_init(const std::string& out, std::uint64_t seed, bool tiny) {
  const auto cfg = tiny ? model::ModelConfig::tiny() : model::ModelConfig{};
  const nn::ModelWeights w = model::random_weights(cfg, seed);
  nn::write_weights_file(out, w);
  spdlog::info("wrote {} tensors, {} parameters to {}", w.tensors().size(), w.parameter_count(), out);
  return 0;
}

// ---- dsp roundtrip ---------------------------------------------------------

int run_roundtrip(const std::string& in, const std::string& config, const std::string& out) {
  const dsp::StftConfig cfg = config == "subband" ? dsp::kSubbandStft : dsp::kAnalysisStft;
  if (config != "subband" && config != "analysis") throw UsageError("--config must be analysis or subband");
  const Waveform w = runtime::wav_read(in);
  const std::vector<float> y = dsp::istft(dsp::stft(w, cfg));

  // Interior: skip one window at either end, where the squared-window sum is
  // built from fewer frames.
  const std::size_t n = std::min(w.size(), y.size());
  const std::size_t lo = std::min(n, cfg.win_length);
  const std::size_t hi = n > cfg.win_length ? n - cfg.win_length : 0;
  double err = 0.0, ref = 0.0, max_abs = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = static_cast<double>(y[i]) - w.samples[i];
    err += d * d;
    ref += static_cast<double>(w.samples[i]) * w.samples[i];
    max_abs = std::max(max_abs, std::abs(d));
  }
  json j = {{"input_samples", w.size()},
            {"output_samples", y.size()},
            {"stft", {{"n_fft", cfg.n_fft}, {"hop", cfg.hop}, {"win_length", cfg.win_length}}},
            {"interior", {lo, hi}},
            {"relative_l2", ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err)},
            {"max_abs_error", max_abs}};
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) runtime::wav_write(out, Waveform{y, kSampleRate});
  return 0;
}

// ---- audit-loss ------------------------------------------------------------

struct AuditArgs {
  std::string mel_target, mel_pred;
  std::string kl_zq, kl_mq, kl_logsq, kl_zp, kl_mp, kl_logsp;
  double kl_logdet = 0.0;
  std::vector<std::string> d_real, d_fake, fmap_real, fmap_fake;
  bool paper_exact = false;
};

std::vector<float> read_flat(const std::string& path) { return runtime::read_frame_tensor(path).data; }

std::vector<std::vector<float>> read_all(const std::vector<std::string>& paths) {
  std::vector<std::vector<float>> out;
  for (const auto& p : paths) out.push_back(read_flat(p));
  return out;
}

int run_audit(const AuditArgs& a) {
  json terms = json::object();
  double recon = 0.0, kl = 0.0, adv_g = 0.0, fm = 0.0;

  if (a.mel_target.empty() != a.mel_pred.empty()) throw UsageError("--mel-target and --mel-pred go together");
  if (!a.mel_target.empty()) {
    const Matrix t = runtime::read_frame_tensor(a.mel_target);
    const Matrix p = runtime::read_frame_tensor(a.mel_pred);
    if (t.rows != p.rows || t.cols != p.cols) throw ShapeError("mel target and prediction differ in shape");
    recon = losses::recon_loss(t.data, p.data);
    terms["recon"] = recon;
  }

  const std::vector<std::string> kl_files{a.kl_zq, a.kl_mq, a.kl_logsq, a.kl_zp, a.kl_mp, a.kl_logsp};
  const auto given = std::count_if(kl_files.begin(), kl_files.end(), [](const auto& s) { return !s.empty(); });
  if (given != 0 && given != 6) {
    throw UsageError("KL needs all of --kl-zq --kl-mq --kl-logsq --kl-zp --kl-mp --kl-logsp");
  }
  if (given == 6) {
    std::vector<std::vector<float>> v;
    for (const auto& f : kl_files) v.push_back(read_flat(f));
    kl = losses::kl_loss({v[0], v[1], v[2], v[3], v[4], v[5], a.kl_logdet});
    terms["kl"] = kl;
  }

  if (!a.d_fake.empty()) {
    const auto fake = read_all(a.d_fake);
    adv_g = losses::adv_loss_g(fake);
    terms["adv_g"] = adv_g;
    if (!a.d_real.empty()) terms["adv_d"] = losses::adv_loss_d(read_all(a.d_real), fake);
  } else if (!a.d_real.empty()) {
    throw UsageError("--d-real needs matching --d-fake files");
  }

  if (a.fmap_real.size() != a.fmap_fake.size()) throw UsageError("--fmap-real and --fmap-fake need the same count");
  if (!a.fmap_real.empty()) {
    fm = losses::feature_matching_loss({read_all(a.fmap_real)}, {read_all(a.fmap_fake)});
    terms["fm"] = fm;
  }

  const losses::LossWeights w = a.paper_exact ? losses::LossWeights::unweighted() : losses::LossWeights{};
  const json report = {{"schema_version", kAuditSchemaVersion},
                       {"mode", a.paper_exact ? "paper-exact" : "weighted"},
                       {"weights", {{"c_mel", w.c_mel}, {"c_kl", w.c_kl}}},
                       {"terms", terms},
                       {"generator_total", losses::generator_total(recon, kl, adv_g, fm, w)}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();

  CLI::App app{"quickvc: voice conversion inference engine"};
  app.require_subcommand(1);
  std::string simd = "auto";
  app.add_option("--simd", simd, "Kernel backend: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Convert content features to the voice of a reference speaker");
  c->add_option("--model", conv.model, "QVCW weights")->required();
  c->add_option("--features", conv.features, "QVCF content features of the source");
  c->add_option("--source-wav", conv.source_wav, "Source audio (needs --features; kept for error reporting)");
  c->add_option("--ref-wav", conv.ref_wav, "Target speaker reference, 16 kHz mono PCM16")->required();
  c->add_option("--out", conv.out, "Output WAV")->required();
  c->add_option("--noise-scale", conv.noise_scale, "Prior sampling temperature in [0, 2]")
      ->capture_default_str();
  c->add_option("--seed", conv.seed, "Noise seed")->capture_default_str();

  BenchArgs ba;
  auto* b = app.add_subcommand("bench", "Measure synthesis throughput in kHz generated");
  b->add_option("--model", ba.model, "QVCW weights (random default-config weights when omitted)");
  b->add_option("--seconds", ba.seconds, "Utterance length per stream")->capture_default_str();
  b->add_option("--threads", ba.threads, "Independent streams, one per thread")->capture_default_str()
      ->check(CLI::PositiveNumber);
  b->add_option("--reps", ba.repetitions, "Timed passes (median reported)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  b->add_option("--mode", ba.mode, "full or decoder-only")->capture_default_str()
      ->check(CLI::IsMember({"full", "decoder-only"}));
  b->add_option("--seed", ba.seed, "Seed for inputs (and random weights)")->capture_default_str();
  b->add_flag("--tiny", ba.tiny, "Use the narrow test configuration for random weights");
  b->add_flag("--json", ba.json_out, "Emit the JSON report");

  std::string inspect_path;
  auto* in = app.add_subcommand("inspect", "Summarize and validate a QVCW container");
  in->add_option("model", inspect_path, "QVCW weights")->required();

  std::string init_out;
  std::uint64_t init_seed = 0;
  bool init_tiny = false;
  auto* ini = app.add_subcommand("init", "Write randomly initialized weights");
  ini->add_option("--out", init_out, "Output QVCW")->required();
  ini->add_option("--seed", init_seed, "Initialization seed")->capture_default_str();
  ini->add_flag("--tiny", init_tiny, "Narrow test configuration");

  std::string rt_in, rt_out, rt_cfg = "analysis";
  auto* dsp_cmd = app.add_subcommand("dsp", "DSP utilities");
  dsp_cmd->require_subcommand(1);
  auto* rt = dsp_cmd->add_subcommand("roundtrip", "STFT -> iSTFT reconstruction error of a WAV file");
  rt->add_option("input", rt_in, "16 kHz mono PCM16 WAV")->required();
  rt->add_option("--config", rt_cfg, "analysis (1280/320/1280) or subband (16/4/16)")->capture_default_str();
  rt->add_option("--out", rt_out, "Write the reconstruction");

  AuditArgs aa;
  auto* au = app.add_subcommand("audit-loss", "Evaluate training losses on tensors stored as QVCF files");
  au->add_option("--mel-target", aa.mel_target, "Target log-mel (T x 80)");
  au->add_option("--mel-pred", aa.mel_pred, "Predicted log-mel (T x 80)");
  au->add_option("--kl-zq", aa.kl_zq, "Posterior sample z_q");
  au->add_option("--kl-mq", aa.kl_mq, "Posterior mean");
  au->add_option("--kl-logsq", aa.kl_logsq, "Posterior log-std");
  au->add_option("--kl-zp", aa.kl_zp, "Flow image of z_q");
  au->add_option("--kl-mp", aa.kl_mp, "Prior mean");
  au->add_option("--kl-logsp", aa.kl_logsp, "Prior log-std");
  au->add_option("--kl-logdet", aa.kl_logdet, "log|det J| of the flow at z_q");
  au->add_option("--d-real", aa.d_real, "Discriminator logits on real audio, one file per sub-discriminator");
  au->add_option("--d-fake", aa.d_fake, "Discriminator logits on generated audio");
  au->add_option("--fmap-real", aa.fmap_real, "Feature maps on real audio, one file per layer");
  au->add_option("--fmap-fake", aa.fmap_fake, "Feature maps on generated audio");
  au->add_flag("--paper-exact", aa.paper_exact, "Unweighted sum of the four generator terms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simd == "scalar") simd::set_backend(simd::Backend::Scalar);
    if (simd == "avx2") simd::set_backend(simd::Backend::Avx2);
    if (*c) return run_convert(conv);
    if (*b) return run_bench(ba);
    if (*in) return run_inspect(inspect_path);
    if (*ini) return run_init(init_out, init_seed, init_tiny);
    if (*rt) return run_roundtrip(rt_in, rt_cfg, rt_out);
    if (*au) return run_audit(aa);
  } catch (const Error& e) {
    std::cerr << "quickvc: " << e.category() << ": " << e.what() << "\n";
    return dynamic_cast<const UsageError*>(&e) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "quickvc: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
