// Writes the input files used by the command-line tests into one directory.

#include <cstdio>
#include <filesystem>
#include <string>

#include "qvc/model/model.hpp"
#include "qvc/nn/weights.hpp"
#include "qvc/runtime/features.hpp"
#include "qvc/runtime/wav.hpp"
#include "support.hpp"

using namespace qvc;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: qvc_fixture <dir>\n");
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);

  auto w = model::random_weights(model::ModelConfig::tiny(), 7);
  nn::write_weights_file(dir / "tiny.qvcw", w);
  auto bytes = nn::save_weights(w);
  bytes.resize(bytes.size() / 2);
  nn::write_file_bytes(dir / "truncated.qvcw", bytes);
  w.config["decoder"]["upsample_scales"] = {5, 5};
  nn::write_weights_file(dir / "badhop.qvcw", w);

  Matrix f(25, runtime::kContentDim);
  f.data = test::normal(f.data.size(), 1);
  runtime::write_content_features(dir / "feat.qvcf", {f});

  runtime::wav_write(dir / "ref.wav", Waveform{test::uniform(16000, 2, -0.4f, 0.4f)});
  runtime::wav_write(dir / "ref2.wav", Waveform{test::uniform(16000, 3, -0.8f, 0.8f)});
  runtime::wav_write(dir / "src.wav", Waveform{test::uniform(8000, 4, -0.5f, 0.5f)});
  nn::write_file_bytes(dir / "ref44k.wav", test::wav_bytes(1, 1, 44100, 16, std::vector<std::uint8_t>(200)));

  // Loss terms chosen so each generator term equals 1.
  runtime::write_frame_tensor(dir / "mel_target.qvcf", Matrix(4, 80, 0.0f));
  runtime::write_frame_tensor(dir / "mel_pred.qvcf", Matrix(4, 80, 1.0f));
  runtime::write_frame_tensor(dir / "kl_zero.qvcf", Matrix(1, 1, 0.0f));
  runtime::write_frame_tensor(dir / "d_fake.qvcf", Matrix(3, 1, 0.0f));
  runtime::write_frame_tensor(dir / "d_real.qvcf", Matrix(3, 1, 1.0f));
  runtime::write_frame_tensor(dir / "fmap_real.qvcf", Matrix(2, 5, 0.0f));
  runtime::write_frame_tensor(dir / "fmap_fake.qvcf", Matrix(2, 5, 0.5f));
  return 0;
}
