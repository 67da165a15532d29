#include "qvc/losses/losses.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "qvc/errors.hpp"

namespace qvc::losses {
namespace {

void same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw ShapeError(std::string(what) + ": empty tensor");
}

double mean_sq_offset(std::span<const float> x, double target) {
  double acc = 0.0;
  for (float v : x) {
    const double d = static_cast<double>(v) - target;
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double mean_abs_diff(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return acc / static_cast<double>(a.size());
}

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

double recon_loss(std::span<const float> target, std::span<const float> predicted) {
  same_size(target.size(), predicted.size(), "recon_loss");
  return mean_abs_diff(target, predicted);
}

double recon_loss(const dsp::MelSpectrogram& target, const dsp::MelSpectrogram& predicted) {
  if (target.num_frames() != predicted.num_frames() || target.num_bands() != predicted.num_bands()) {
    throw ShapeError("recon_loss: mel spectrogram shapes differ");
  }
  return recon_loss(target.frames.data, predicted.frames.data);
}

double kl_loss(const KlTerms& t) {
  const std::size_t n = t.z_q.size();
  same_size(n, t.m_q.size(), "kl_loss m_q");
  same_size(n, t.logs_q.size(), "kl_loss logs_q");
  same_size(n, t.z_p.size(), "kl_loss z_p");
  same_size(n, t.m_p.size(), "kl_loss m_p");
  same_size(n, t.logs_p.size(), "kl_loss logs_p");
  double log_q = 0.0;
  double log_p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eq = (static_cast<double>(t.z_q[i]) - t.m_q[i]) * std::exp(-static_cast<double>(t.logs_q[i]));
    const double ep = (static_cast<double>(t.z_p[i]) - t.m_p[i]) * std::exp(-static_cast<double>(t.logs_p[i]));
    log_q += -static_cast<double>(t.logs_q[i]) - kHalfLog2Pi - 0.5 * eq * eq;
    log_p += -static_cast<double>(t.logs_p[i]) - kHalfLog2Pi - 0.5 * ep * ep;
  }
  log_p += t.logdet;
  const double kl = (log_q - log_p) / static_cast<double>(n);
  if (!std::isfinite(kl)) throw NumericalError("kl_loss: non-finite result");
  return kl;
}

double kl_closed_form(std::span<const float> m_q, std::span<const float> logs_q, std::span<const float> m_p,
                      std::span<const float> logs_p) {
  const std::size_t n = m_q.size();
  same_size(n, logs_q.size(), "kl_closed_form logs_q");
  same_size(n, m_p.size(), "kl_closed_form m_p");
  same_size(n, logs_p.size(), "kl_closed_form logs_p");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double var_q = std::exp(2.0 * logs_q[i]);
    const double var_p = std::exp(2.0 * logs_p[i]);
    const double dm = static_cast<double>(m_q[i]) - m_p[i];
    acc += static_cast<double>(logs_p[i]) - logs_q[i] + (var_q + dm * dm) / (2.0 * var_p) - 0.5;
  }
  return acc / static_cast<double>(n);
}

double kl_monte_carlo(std::span<const float> m_q, std::span<const float> logs_q, std::span<const float> m_p,
                      std::span<const float> logs_p, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("kl_monte_carlo: need at least one sample");
  const std::size_t n = m_q.size();
  same_size(n, logs_q.size(), "kl_monte_carlo logs_q");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<float> z(n);
  double acc = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = static_cast<float>(m_q[i] + std::exp(static_cast<double>(logs_q[i])) * dist(rng));
    }
    acc += kl_loss({z, m_q, logs_q, z, m_p, logs_p, 0.0});
  }
  return acc / static_cast<double>(samples);
}

double adv_loss_g(const std::vector<std::vector<float>>& fake_logits) {
  double loss = 0.0;
  for (const auto& d : fake_logits) {
    if (d.empty()) throw ShapeError("adv_loss_g: empty discriminator output");
    loss += mean_sq_offset(d, 1.0);
  }
  return loss;
}

double adv_loss_d(const std::vector<std::vector<float>>& real_logits,
                  const std::vector<std::vector<float>>& fake_logits) {
  if (real_logits.size() != fake_logits.size()) throw ShapeError("adv_loss_d: discriminator counts differ");
  double loss = 0.0;
  for (std::size_t d = 0; d < real_logits.size(); ++d) {
    same_size(real_logits[d].size(), fake_logits[d].size(), "adv_loss_d");
    loss += mean_sq_offset(real_logits[d], 1.0) + mean_sq_offset(fake_logits[d], 0.0);
  }
  return loss;
}

double feature_matching_loss(const std::vector<std::vector<std::vector<float>>>& real_features,
                             const std::vector<std::vector<std::vector<float>>>& fake_features) {
  if (real_features.size() != fake_features.size()) throw ShapeError("feature_matching_loss: discriminator counts differ");
  double loss = 0.0;
  for (std::size_t d = 0; d < real_features.size(); ++d) {
    if (real_features[d].size() != fake_features[d].size()) {
      throw ShapeError("feature_matching_loss: layer counts differ");
    }
    for (std::size_t l = 0; l < real_features[d].size(); ++l) {
      same_size(real_features[d][l].size(), fake_features[d][l].size(), "feature_matching_loss");
      loss += mean_abs_diff(real_features[d][l], fake_features[d][l]);
    }
  }
  return 2.0 * loss;
}

double generator_total(double recon, double kl, double adv_g, double fm, const LossWeights& w) {
  return w.c_mel * recon + w.c_kl * kl + adv_g + fm;
}

}  // namespace qvc::losses
