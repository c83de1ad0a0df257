#pragma once

#include <cmath>
#include <string>

#include "tsemap/error.hpp"
#include "tsemap/signal.hpp"

namespace tsemap {

// SDR here is the plain energy ratio ||s||^2 / ||s - s_hat||^2 in dB, the
// negation of the SNR training loss. It is not the projection-based
// BSS-eval SDR, so absolute values are not comparable with bss_eval output.

inline double sdr_db(const AudioBuffer& reference, const AudioBuffer& estimate) {
  if (reference.size() != estimate.size()) {
    fail("sdr_db: length mismatch (" + std::to_string(reference.size()) + " vs " +
         std::to_string(estimate.size()) + ")");
  }
  const double es = energy(reference);
  if (es <= 0.0) fail("sdr_db: silent reference");
  double ee = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - estimate[i];
    ee += d * d;
  }
  if (ee <= 0.0) fail("perfect reconstruction (loss -inf)");
  return 10.0 * std::log10(es / ee);
}

/// Per-example SNR loss M = -10 log10(||s||^2 / ||s - s_hat||^2).
inline double snr_loss(const AudioBuffer& target, const AudioBuffer& estimate) {
  return -sdr_db(target, estimate);
}

/// SDR improvement of `estimate` over the unprocessed `mixture`.
inline double isdr_db(const AudioBuffer& reference, const AudioBuffer& mixture,
                      const AudioBuffer& estimate) {
  require_same_shape(reference, mixture, "isdr_db");
  return sdr_db(reference, estimate) - sdr_db(reference, mixture);
}

struct EvalResult {
  std::string example_id;
  double sdr_db = 0.0;
  double input_sdr_db = 0.0;
  double isdr_db = 0.0;
};

inline EvalResult evaluate(std::string example_id, const AudioBuffer& reference,
                           const AudioBuffer& mixture, const AudioBuffer& estimate) {
  require_same_shape(reference, mixture, "evaluate");
  EvalResult r;
  r.example_id = std::move(example_id);
  r.sdr_db = sdr_db(reference, estimate);
  r.input_sdr_db = sdr_db(reference, mixture);
  r.isdr_db = r.sdr_db - r.input_sdr_db;
  return r;
}

}  // namespace tsemap
