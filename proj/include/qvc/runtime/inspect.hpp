#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

#include "qvc/nn/weights.hpp"

namespace qvc::runtime {

struct InspectReport {
  nlohmann::json config;
  std::size_t tensor_count = 0;
  std::size_t parameter_count = 0;
  std::size_t samples_per_frame = 0;  // product(upsample_scales) * istft_hop * subbands
  bool hop_identity_ok = false;
  bool config_ok = false;
  bool manifest_ok = false;
  std::string error;  // first failing check, empty when everything passes

  bool ok() const noexcept { return hop_identity_ok && config_ok && manifest_ok; }
};

// Never throws for a container that parsed; problems land in the report.
InspectReport inspect(const nn::ModelWeights& w);

nlohmann::json to_json(const InspectReport& r);

}  // namespace qvc::runtime
