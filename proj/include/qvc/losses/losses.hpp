#pragma once

// Forward evaluation of the generator and discriminator objectives, for
// auditing checkpoints and verifying exported tensors. All reductions
// accumulate in double.

#include <cstdint>
#include <span>
#include <vector>

#include "qvc/dsp/mel.hpp"

namespace qvc::losses {

// mean |target - predicted|
double recon_loss(std::span<const float> target, std::span<const float> predicted);
double recon_loss(const dsp::MelSpectrogram& target, const dsp::MelSpectrogram& predicted);

/// One posterior sample z_q ~ N(m_q, exp(logs_q)), its flow image z_p with
/// log|det J|, and the prior statistics at z_p.
struct KlTerms {
  std::span<const float> z_q;
  std::span<const float> m_q;
  std::span<const float> logs_q;
  std::span<const float> z_p;
  std::span<const float> m_p;
  std::span<const float> logs_p;
  double logdet = 0.0;
};

// Single-sample estimate of E_q[log q - log p], divided by the element count.
double kl_loss(const KlTerms& t);

// Analytic KL(N(m_q, s_q) || N(m_p, s_p)), mean over elements.
double kl_closed_form(std::span<const float> m_q, std::span<const float> logs_q, std::span<const float> m_p,
                      std::span<const float> logs_p);

// Average of kl_loss over `samples` draws of z_q with an identity flow.
double kl_monte_carlo(std::span<const float> m_q, std::span<const float> logs_q, std::span<const float> m_p,
                      std::span<const float> logs_p, std::size_t samples, std::uint64_t seed);

/// Outputs of a bank of sub-discriminators for one input.
struct DiscriminatorTaps {
  std::vector<std::vector<float>> logits;                // per sub-discriminator
  std::vector<std::vector<std::vector<float>>> features;  // per sub-discriminator, per layer
};

// sum_d mean((D_fake - 1)^2)
double adv_loss_g(const std::vector<std::vector<float>>& fake_logits);
// sum_d [mean((D_real - 1)^2) + mean(D_fake^2)]
double adv_loss_d(const std::vector<std::vector<float>>& real_logits,
                  const std::vector<std::vector<float>>& fake_logits);
// 2 * sum over all layers of mean |real - fake|
double feature_matching_loss(const std::vector<std::vector<std::vector<float>>>& real_features,
                             const std::vector<std::vector<std::vector<float>>>& fake_features);

struct LossWeights {
  double c_mel = 45.0;
  double c_kl = 1.0;

  // The plain unweighted sum L_recon + L_kl + L_adv + L_fm.
  static constexpr LossWeights unweighted() { return {1.0, 1.0}; }
};

double generator_total(double recon, double kl, double adv_g, double fm, const LossWeights& w = {});

}  // namespace qvc::losses
