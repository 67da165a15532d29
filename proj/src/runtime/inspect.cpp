#include "qvc/runtime/inspect.hpp"

#include "qvc/errors.hpp"
#include "qvc/model/model.hpp"

namespace qvc::runtime {

InspectReport inspect(const nn::ModelWeights& w) {
  InspectReport r;
  r.config = w.config;
  r.tensor_count = w.tensors().size();
  r.parameter_count = w.parameter_count();

  model::ModelConfig cfg;
  try {
    cfg = model::model_config_from_json(w.config);
  } catch (const Error& e) {
    r.error = e.what();
    return r;
  }
  r.samples_per_frame = cfg.decoder.samples_per_frame();
  r.hop_identity_ok = r.samples_per_frame == model::kFrameHop;
  try {
    cfg.validate();
    r.config_ok = true;
  } catch (const Error& e) {
    r.error = e.what();
    return r;
  }
  try {
    model::check_manifest(w, model::model_manifest(cfg));
    r.manifest_ok = true;
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

nlohmann::json to_json(const InspectReport& r) {
  nlohmann::json j = {
      {"config", r.config},
      {"tensor_count", r.tensor_count},
      {"parameter_count", r.parameter_count},
      {"hop_identity",
       {{"constraint", "product(upsample_scales) * istft_hop * subbands == 320"},
        {"value", r.samples_per_frame},
        {"ok", r.hop_identity_ok}}},
      {"config_valid", r.config_ok},
      {"manifest_valid", r.manifest_ok},
  };
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

}  // namespace qvc::runtime
