#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cmix {

enum class SignalKind { LogisticChaotic, PiecewiseAr, SineDrift, AdversarialFlip, Csv };

// Deterministic bounded test-signal generator. All randomness comes from
// std::mt19937_64 seeded with `seed`, with uniform doubles produced by the
// fixed mapping (x >> 11) * 2^-53, so sequences are identical across
// platforms and standard library implementations.
struct SignalSpec {
    SignalKind kind = SignalKind::LogisticChaotic;
    std::int64_t length = 1000;
    std::uint64_t seed = 1;
    double amplitude = 1.0; // every sample lies in [-amplitude, amplitude]

    double logistic_r = 4.0;                     // logistic-chaotic
    std::vector<double> ar_coeffs = {0.95, -0.8}; // piecewise-ar, cycled per segment
    std::int64_t segment_length = 250;           // piecewise-ar
    double base_frequency = 0.01;                // sine-drift, cycles per sample
    double frequency_drift = 0.02;               // sine-drift
    std::int64_t flip_period = 1;                // adversarial-flip
    std::string csv_path;                        // csv

    void validate() const;
};

// Generates the sequence; deterministic for a fixed spec. Throws
// std::invalid_argument on a bad spec and std::runtime_error on CSV I/O
// failure.
std::vector<double> generate(const SignalSpec& spec);

SignalKind parse_signal_kind(const std::string& name);

} // namespace cmix
