#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace longscribe {

// Rate every model-facing stage consumes; other inputs are resampled on ingest.
inline constexpr int kInternalSampleRate = 16000;

// Mono PCM samples at a fixed rate. Construction validates the rate and
// rejects non-finite samples.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::vector<float> samples, int sample_rate);

  std::span<const float> samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  // Samples in [round(start_s * rate), round(end_s * rate)), clamped to the
  // buffer. Throws when the span lies outside the buffer by more than one sample.
  AudioBuffer slice(double start_s, double end_s) const;

 private:
  std::vector<float> samples_;
  int sample_rate_ = kInternalSampleRate;
};

// RIFF/WAVE, 16-bit PCM, any channel count (downmixed by arithmetic mean).
// Distinct ErrorKinds: FileNotFound, UnsupportedEncoding, MalformedHeader.
AudioBuffer read_wav(const std::filesystem::path& path);

// Polyphase rational resampling by up/down. The output keeps the input's
// sample rate, so content is time-scaled by up/down when played back at it.
// Output length is ceil(len * up / down).
AudioBuffer stretch(const AudioBuffer& buffer, int up, int down);

// Polyphase resampling to `target_rate` with a shorter filter (20 * max(up, down) taps in total).
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

inline AudioBuffer to_internal_rate(const AudioBuffer& buffer) {
  return buffer.sample_rate() == kInternalSampleRate ? buffer
                                                     : resample(buffer, kInternalSampleRate);
}

double rms(std::span<const float> samples);

struct NoiseMix {
  AudioBuffer mixed;          // clipped to [-1, 1]
  double noise_scale = 0.0;   // gain applied to the fitted noise
  double achieved_snr_db = 0.0;  // measured on the scaled noise, before clipping
};

// Noise is tiled or truncated to the signal length, then scaled so that
// 20*log10(rms(signal) / rms(scaled noise)) == snr_db.
NoiseMix mix_noise_detailed(const AudioBuffer& signal, const AudioBuffer& noise, double snr_db);

inline AudioBuffer mix_noise(const AudioBuffer& signal, const AudioBuffer& noise, double snr_db) {
  return mix_noise_detailed(signal, noise, snr_db).mixed;
}

}  // namespace longscribe
