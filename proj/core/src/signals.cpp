#include "cmix/signals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cmix {

namespace {

// Portable uniform double in [0, 1): top 53 bits of the generator output.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double clip(double v, double bound) { return std::clamp(v, -bound, bound); }

// Initial point for the logistic map, kept away from the degenerate points at
// r = 4: 0.5 maps to 1 and then sticks at 0, 0.75 is the fixed point and 0.25
// its preimage.
double logistic_seed_point(std::mt19937_64& rng) {
    const double bad[] = {0.25, 0.5, 0.75};
    for (;;) {
        const double x = 0.01 + 0.98 * uniform01(rng);
        bool ok = true;
        for (double b : bad)
            if (std::abs(x - b) < 1e-6) ok = false;
        if (ok) return x;
    }
}

std::vector<double> gen_logistic(const SignalSpec& spec, std::mt19937_64& rng) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.length));
    double x = logistic_seed_point(rng);
    for (std::int64_t t = 0; t < spec.length; ++t) {
        out.push_back(spec.amplitude * (2.0 * x - 1.0));
        x = spec.logistic_r * x * (1.0 - x);
    }
    return out;
}

std::vector<double> gen_piecewise_ar(const SignalSpec& spec, std::mt19937_64& rng) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.length));
    double x = 0.0;
    for (std::int64_t t = 0; t < spec.length; ++t) {
        const std::size_t seg = static_cast<std::size_t>(t / spec.segment_length);
        const double c = spec.ar_coeffs[seg % spec.ar_coeffs.size()];
        const double noise = (2.0 * uniform01(rng) - 1.0) * 0.25 * spec.amplitude;
        x = clip(c * x + noise, spec.amplitude); // hard saturation keeps the bound
        out.push_back(x);
    }
    return out;
}

std::vector<double> gen_sine_drift(const SignalSpec& spec, std::mt19937_64& rng) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.length));
    double phase = 2.0 * std::numbers::pi * uniform01(rng);
    const double n = static_cast<double>(spec.length);
    for (std::int64_t t = 0; t < spec.length; ++t) {
        const double f = spec.base_frequency + spec.frequency_drift * static_cast<double>(t) / n;
        phase += 2.0 * std::numbers::pi * f;
        out.push_back(spec.amplitude * std::sin(phase));
    }
    return out;
}

std::vector<double> gen_flip(const SignalSpec& spec) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.length));
    for (std::int64_t t = 0; t < spec.length; ++t) {
        const bool positive = (t / spec.flip_period) % 2 == 0;
        out.push_back(positive ? spec.amplitude : -spec.amplitude);
    }
    return out;
}

std::vector<double> gen_csv(const SignalSpec& spec) {
    std::ifstream in(spec.csv_path);
    if (!in) throw std::runtime_error("cannot open signal CSV: " + spec.csv_path);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string field = comma == std::string::npos ? line : line.substr(0, comma);
        out.push_back(std::stod(field));
        if (spec.length > 0 && static_cast<std::int64_t>(out.size()) >= spec.length) break;
    }
    if (out.empty()) throw std::runtime_error("empty signal CSV: " + spec.csv_path);
    for (double v : out)
        if (std::abs(v) > spec.amplitude)
            throw std::invalid_argument("CSV sample exceeds amplitude bound");
    return out;
}

} // namespace

void SignalSpec::validate() const {
    if (kind != SignalKind::Csv && length < 1)
        throw std::invalid_argument("SignalSpec.length must be positive");
    if (!(amplitude > 0.0)) throw std::invalid_argument("SignalSpec.amplitude must be positive");
    if (kind == SignalKind::PiecewiseAr && (ar_coeffs.empty() || segment_length < 1))
        throw std::invalid_argument("SignalSpec: piecewise-ar needs coefficients and segment length");
    if (kind == SignalKind::AdversarialFlip && flip_period < 1)
        throw std::invalid_argument("SignalSpec.flip_period must be positive");
    if (kind == SignalKind::Csv && csv_path.empty())
        throw std::invalid_argument("SignalSpec.csv_path required for csv signals");
}

std::vector<double> generate(const SignalSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    switch (spec.kind) {
    case SignalKind::LogisticChaotic: return gen_logistic(spec, rng);
    case SignalKind::PiecewiseAr: return gen_piecewise_ar(spec, rng);
    case SignalKind::SineDrift: return gen_sine_drift(spec, rng);
    case SignalKind::AdversarialFlip: return gen_flip(spec);
    case SignalKind::Csv: return gen_csv(spec);
    }
    throw std::invalid_argument("generate: unknown signal kind");
}

SignalKind parse_signal_kind(const std::string& name) {
    if (name == "logistic-chaotic") return SignalKind::LogisticChaotic;
    if (name == "piecewise-ar") return SignalKind::PiecewiseAr;
    if (name == "sine-drift") return SignalKind::SineDrift;
    if (name == "adversarial-flip") return SignalKind::AdversarialFlip;
    if (name == "csv") return SignalKind::Csv;
    throw std::invalid_argument("unknown signal kind '" + name + "'");
}

} // namespace cmix
