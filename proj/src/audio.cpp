#include "longscribe/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <string>

#include "longscribe/error.hpp"

namespace longscribe {

AudioBuffer::AudioBuffer(std::vector<float> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  require(sample_rate_ > 0, "sample rate must be positive");
  for (float s : samples_) require(std::isfinite(s), "audio samples must be finite");
}

AudioBuffer AudioBuffer::slice(double start_s, double end_s) const {
  require(start_s <= end_s, "slice start after end");
  const double rate = sample_rate_;
  const auto first = static_cast<std::int64_t>(std::llround(start_s * rate));
  const auto last = static_cast<std::int64_t>(std::llround(end_s * rate));
  const auto n = static_cast<std::int64_t>(samples_.size());
  require(first >= -1 && last <= n + 1, "slice [" + std::to_string(start_s) + ", " +
                                            std::to_string(end_s) + ") outside buffer of " +
                                            std::to_string(duration_s()) + " s");
  const auto lo = std::clamp<std::int64_t>(first, 0, n);
  const auto hi = std::clamp<std::int64_t>(last, lo, n);
  return AudioBuffer(std::vector<float>(samples_.begin() + lo, samples_.begin() + hi),
                     sample_rate_);
}

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(std::filesystem::exists(path) ? ErrorKind::Io : ErrorKind::FileNotFound,
         "cannot open " + path.string());
  }
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorKind::MalformedHeader, where + "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* id = bytes.data() + pos;
    std::size_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        fail(ErrorKind::MalformedHeader, where + "truncated fmt chunk");
      }
      std::uint16_t format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      const std::uint16_t block_align = read_u16(bytes.data() + body + 12);
      const std::uint16_t bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) fail(ErrorKind::MalformedHeader, where + "truncated extensible fmt chunk");
        format = read_u16(bytes.data() + body + 24);  // first two bytes of the subformat GUID
      }
      if (format != kFormatPcm) {
        fail(ErrorKind::UnsupportedEncoding,
             where + "format tag " + std::to_string(format) + " is not PCM");
      }
      if (bits != 16) {
        fail(ErrorKind::UnsupportedEncoding,
             where + std::to_string(bits) + "-bit samples; only 16-bit PCM is supported");
      }
      if (channels == 0 || rate == 0 || block_align != channels * 2) {
        fail(ErrorKind::MalformedHeader, where + "inconsistent fmt chunk");
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      const std::size_t available = bytes.size() - body;
      // Streaming writers leave the size as 0 or 0xFFFFFFFF.
      if (size == 0xFFFFFFFFu || (size == 0 && available > 0)) size = available;
      if (size > available) fail(ErrorKind::MalformedHeader, where + "data chunk truncated");
      data_offset = body;
      data_size = size;
      have_data = true;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) fail(ErrorKind::MalformedHeader, where + "missing fmt chunk");
  if (!have_data) fail(ErrorKind::MalformedHeader, where + "missing data chunk");

  const std::size_t frame_bytes = std::size_t{channels} * 2;
  const std::size_t frames = data_size / frame_bytes;
  std::vector<float> samples(frames);
  const unsigned char* data = bytes.data() + data_offset;
  for (std::size_t f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(read_u16(data + f * frame_bytes + c * 2));
      sum += raw;
    }
    samples[f] = static_cast<float>(sum / channels / 32768.0);
  }
  return AudioBuffer(std::move(samples), static_cast<int>(rate));
}

namespace {

constexpr double kKaiserBeta = 8.0;
constexpr int kTapsPerPhaseFactor = 10;

// Kaiser-windowed sinc low-pass at the upsampled rate, cutoff pi/max(up, down),
// gain `up` so the zero-stuffed signal keeps unit DC gain.
std::vector<double> design_lowpass(int up, int down, int taps_per_phase) {
  const std::size_t length = static_cast<std::size_t>(taps_per_phase) * up + 1;
  const double center = static_cast<double>(length - 1) / 2.0;
  const double cutoff = 0.5 / std::max(up, down);  // cycles per upsampled sample
  const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
  std::vector<double> h(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double x = static_cast<double>(n) - center;
    const double arg = 2.0 * cutoff * x;
    const double sinc =
        x == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double k = x / center;
    const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - k * k))) / norm;
    h[n] = up * 2.0 * cutoff * sinc * window;
  }
  return h;
}

enum class FilterLength { PerPhase, Total };

// PerPhase: 10 * max(up, down) taps in every phase.
// Total: 20 * max(up, down) taps across all phases, which keeps ingest of
// rates like 44.1 kHz cheap.
std::vector<float> polyphase(std::span<const float> x, int up, int down, FilterLength length) {
  const int g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == down) return {x.begin(), x.end()};

  const int span = kTapsPerPhaseFactor * std::max(up, down);
  const int taps_per_phase = length == FilterLength::PerPhase ? span : std::max(1, (2 * span + up - 1) / up);
  const std::vector<double> h = design_lowpass(up, down, taps_per_phase);
  const auto taps = static_cast<std::int64_t>(h.size());
  const std::int64_t delay = (taps - 1) / 2;
  const auto n_in = static_cast<std::int64_t>(x.size());
  const std::int64_t n_out = (n_in * up + down - 1) / down;

  std::vector<float> y(static_cast<std::size_t>(n_out));
  for (std::int64_t m = 0; m < n_out; ++m) {
    const std::int64_t t = m * down + delay;  // position on the upsampled grid
    std::int64_t i_lo = t - (taps - 1);
    i_lo = i_lo <= 0 ? 0 : (i_lo + up - 1) / up;
    const std::int64_t i_hi = std::min(n_in - 1, t / up);
    double acc = 0.0;
    for (std::int64_t i = i_lo; i <= i_hi; ++i) acc += x[i] * h[t - i * up];
    y[m] = static_cast<float>(acc);
  }
  return y;
}

}  // namespace

AudioBuffer stretch(const AudioBuffer& buffer, int up, int down) {
  require(up >= 1 && down >= 1, "stretch factors must be >= 1");
  require(!buffer.empty(), "cannot stretch an empty buffer");
  return AudioBuffer(polyphase(buffer.samples(), up, down, FilterLength::PerPhase),
                     buffer.sample_rate());
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  require(target_rate > 0, "target rate must be positive");
  if (buffer.sample_rate() == target_rate || buffer.empty()) {
    return AudioBuffer(std::vector<float>(buffer.samples().begin(), buffer.samples().end()),
                       target_rate);
  }
  const int g = std::gcd(target_rate, buffer.sample_rate());
  return AudioBuffer(polyphase(buffer.samples(), target_rate / g, buffer.sample_rate() / g,
                               FilterLength::Total),
                     target_rate);
}

double rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (float s : samples) sum += double{s} * s;
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

NoiseMix mix_noise_detailed(const AudioBuffer& signal, const AudioBuffer& noise, double snr_db) {
  require(signal.sample_rate() == noise.sample_rate(),
          "sample-rate mismatch: signal " + std::to_string(signal.sample_rate()) +
              " Hz, noise " + std::to_string(noise.sample_rate()) + " Hz");
  require(!noise.empty() && rms(noise.samples()) > 0.0, "noise source is silent");
  require(std::isfinite(snr_db), "snr_db must be finite");

  const std::size_t n = signal.size();
  std::vector<double> fitted(n);
  for (std::size_t i = 0; i < n; ++i) fitted[i] = noise.samples()[i % noise.size()];

  double noise_energy = 0.0;
  for (double v : fitted) noise_energy += v * v;
  const double noise_rms = n == 0 ? 0.0 : std::sqrt(noise_energy / static_cast<double>(n));
  // A long noise source can still be all zeros over the truncated span.
  require(n == 0 || noise_rms > 0.0, "noise source is silent over the signal span");

  const double signal_rms = rms(signal.samples());
  NoiseMix result;
  result.noise_scale = n == 0 ? 0.0 : signal_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));

  std::vector<float> mixed(n);
  double scaled_energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = fitted[i] * result.noise_scale;
    scaled_energy += scaled * scaled;
    mixed[i] = static_cast<float>(std::clamp(signal.samples()[i] + scaled, -1.0, 1.0));
  }
  const double scaled_rms = n == 0 ? 0.0 : std::sqrt(scaled_energy / static_cast<double>(n));
  result.achieved_snr_db = scaled_rms > 0.0 ? 20.0 * std::log10(signal_rms / scaled_rms) : snr_db;
  result.mixed = AudioBuffer(std::move(mixed), signal.sample_rate());
  return result;
}

}  // namespace longscribe
