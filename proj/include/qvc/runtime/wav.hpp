#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qvc/types.hpp"

namespace qvc::runtime {

// RIFF/WAVE, PCM 16-bit, mono, 16 kHz only. Samples are scaled by 1/32768.
Waveform wav_decode(std::span<const std::uint8_t> bytes);
// Clamps to [-1, 1], scales by 32768 and saturates to the int16 range.
std::vector<std::uint8_t> wav_encode(const Waveform& w);

Waveform wav_read(const std::filesystem::path& path);
void wav_write(const std::filesystem::path& path, const Waveform& w);

}  // namespace qvc::runtime
