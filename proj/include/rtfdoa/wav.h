// include/rtfdoa/wav.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_WAV_H_
#define RTFDOA_WAV_H_

#include <string>
#include <vector>

#include "rtfdoa/signal.h"

namespace rtfdoa {

// Mono RIFF/WAVE, PCM16 (scaled by 1/32768) or IEEE float32.  Stereo or other
// codecs raise std::runtime_error.  No resampling.
RealSignal load_wav(const std::string& path);

// IEEE float32 mono.
void write_wav(const std::string& path, const RealSignal& signal);

// Two-channel float32 files used for the impulse-response cache
// (ir_doa{±DDD}_range{R}m.wav stores h1/h2 as channels 1/2).
void write_wav_pair(const std::string& path, const std::vector<double>& ch1,
                    const std::vector<double>& ch2, double sample_rate_hz);
void load_wav_pair(const std::string& path, std::vector<double>* ch1,
                   std::vector<double>* ch2, double* sample_rate_hz);

}  // namespace rtfdoa

#endif  // RTFDOA_WAV_H_
