#pragma once

#include <string>

#include "storm/signal.hpp"

namespace storm {

enum class WavFormat { pcm16, float32 };

/// Reads a mono WAV file. Accepts 16-bit integer PCM and 32-bit IEEE float,
/// little-endian. Anything else (including multi-channel files) is rejected
/// with a DataError.
Waveform read_wav(const std::string& path);

/// Writes a mono WAV file in the requested sample format.
void write_wav(const std::string& path, const Waveform& w,
               WavFormat format = WavFormat::float32);

}  // namespace storm
