#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsemap/error.hpp"

namespace tsemap {

/// Mono waveform with its sample rate. Samples are stored in 64-bit floats
/// with nominal range [-1, 1]; the constructor rejects non-finite values.
class AudioBuffer {
 public:
  AudioBuffer() = default;

  AudioBuffer(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ <= 0) fail("sample rate must be positive");
    for (double x : samples_) {
      if (!std::isfinite(x)) fail("non-finite sample in audio buffer");
    }
  }

  /// All-zero buffer.
  static AudioBuffer zeros(std::size_t length, int sample_rate) {
    return AudioBuffer(std::vector<double>(length, 0.0), sample_rate);
  }

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::span<const double> view() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 1;
};

inline double energy(std::span<const double> x) {
  if (x.empty()) fail("empty signal");
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

inline double energy(const AudioBuffer& buf) { return energy(buf.view()); }

inline double peak(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double peak(const AudioBuffer& buf) { return peak(buf.view()); }

inline AudioBuffer scaled(const AudioBuffer& buf, double gain) {
  std::vector<double> out(buf.samples());
  for (double& v : out) v *= gain;
  return AudioBuffer(std::move(out), buf.sample_rate());
}

inline void require_same_shape(const AudioBuffer& a, const AudioBuffer& b,
                               const char* what) {
  if (a.size() != b.size()) {
    fail(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
         " vs " + std::to_string(b.size()) + ")");
  }
  if (a.sample_rate() != b.sample_rate()) {
    fail(std::string(what) + ": sample rate mismatch (" +
         std::to_string(a.sample_rate()) + " vs " +
         std::to_string(b.sample_rate()) + ")");
  }
}

inline AudioBuffer add(const AudioBuffer& a, const AudioBuffer& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return AudioBuffer(std::move(out), a.sample_rate());
}

inline AudioBuffer subtract(const AudioBuffer& a, const AudioBuffer& b) {
  require_same_shape(a, b, "subtract");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return AudioBuffer(std::move(out), a.sample_rate());
}

/// 10 log10 of signal energy over interference energy, over the full length
/// of both buffers (silent regions included).
inline double snr_db(const AudioBuffer& signal, const AudioBuffer& interference) {
  if (signal.size() != interference.size()) {
    fail("snr_db: length mismatch (" + std::to_string(signal.size()) + " vs " +
         std::to_string(interference.size()) + ")");
  }
  const double es = energy(signal);
  const double ei = energy(interference);
  if (ei <= 0.0) fail("degenerate SNR (no interference)");
  if (es <= 0.0) fail("degenerate SNR (no signal)");
  return 10.0 * std::log10(es / ei);
}

/// Gain that, applied to `interference_sum`, puts the target at
/// `desired_snr_db` relative to it.
inline double gain_for_snr(const AudioBuffer& target,
                           const AudioBuffer& interference_sum,
                           double desired_snr_db) {
  const double et = energy(target);
  const double ei = energy(interference_sum);
  if (et <= 0.0 || ei <= 0.0) fail("gain_for_snr: zero-energy input");
  return std::sqrt(et / (ei * std::pow(10.0, desired_snr_db / 10.0)));
}

struct Normalized {
  AudioBuffer buffer;
  double gain = 1.0;
};

/// Scales `buf` down so that its peak equals `peak_target` when it exceeds
/// it. Buffers already within the limit (including all-zero ones) come back
/// unchanged with gain 1.
inline Normalized peak_normalize(const AudioBuffer& buf, double peak_target) {
  if (!(peak_target > 0.0 && peak_target <= 1.0)) {
    fail("peak target must lie in (0, 1]");
  }
  if (buf.empty()) fail("empty signal");
  const double p = peak(buf);
  if (p <= peak_target) return {buf, 1.0};
  const double g = peak_target / p;
  std::vector<double> out(buf.samples());
  for (double& v : out) v = v * g;
  // Pin the extreme sample so the post-condition holds exactly.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::abs(buf[i]) == p) out[i] = std::copysign(peak_target, buf[i]);
  }
  return {AudioBuffer(std::move(out), buf.sample_rate()), g};
}

}  // namespace tsemap
