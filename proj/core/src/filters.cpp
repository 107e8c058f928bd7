#include "cmix/filters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cmix {

namespace {
constexpr double kNlmsDelta = 1e-8;

double clip(double v, double bound) { return std::clamp(v, -bound, bound); }
} // namespace

void FilterSpec::validate() const {
    if (!(clip_bound > 0.0)) throw std::invalid_argument("FilterSpec.clip_bound must be positive");
    switch (kind) {
    case FilterKind::Lms:
    case FilterKind::Nlms:
        if (!(step_size > 0.0) && step_size != 0.0)
            throw std::invalid_argument("FilterSpec.step_size must be non-negative");
        if (order < 1) throw std::invalid_argument("FilterSpec.order must be positive");
        break;
    case FilterKind::Constant:
        if (std::abs(constant_value) > clip_bound)
            throw std::invalid_argument("FilterSpec.constant_value outside [-Y, Y]");
        break;
    case FilterKind::DelayedCopy:
        break;
    }
}

FilterState make_filter_state(const FilterSpec& spec) {
    FilterState st;
    if (spec.kind == FilterKind::Lms || spec.kind == FilterKind::Nlms)
        st.taps.assign(static_cast<std::size_t>(spec.order), 0.0);
    return st;
}

double filter_step(const FilterSpec& spec, FilterState& state,
                   std::span<const double> regressor, double desired) {
    switch (spec.kind) {
    case FilterKind::Constant:
        return clip(spec.constant_value, spec.clip_bound);
    case FilterKind::DelayedCopy: {
        const double out = clip(state.prev_desired, spec.clip_bound);
        state.prev_desired = desired;
        return out;
    }
    case FilterKind::Lms:
    case FilterKind::Nlms: {
        if (regressor.size() != state.taps.size())
            throw std::invalid_argument("filter_step: regressor length != filter order");
        double out = 0.0;
        for (std::size_t i = 0; i < state.taps.size(); ++i) out += state.taps[i] * regressor[i];
        const double err = desired - out; // adaptation uses the unclipped output
        double step = spec.step_size;
        if (spec.kind == FilterKind::Nlms) {
            double norm2 = 0.0;
            for (double x : regressor) norm2 += x * x;
            step /= kNlmsDelta + norm2;
        }
        for (std::size_t i = 0; i < state.taps.size(); ++i)
            state.taps[i] += step * err * regressor[i];
        return clip(out, spec.clip_bound);
    }
    }
    throw std::invalid_argument("filter_step: unknown filter kind");
}

std::vector<double> run_filter(const FilterSpec& spec, const std::vector<double>& ys) {
    spec.validate();
    FilterState state = make_filter_state(spec);
    const std::size_t order =
        (spec.kind == FilterKind::Lms || spec.kind == FilterKind::Nlms)
            ? static_cast<std::size_t>(spec.order)
            : 0;
    std::vector<double> delay(order, 0.0); // delay[0] = y(t-1)
    std::vector<double> out;
    out.reserve(ys.size());
    for (double y : ys) {
        out.push_back(filter_step(spec, state, delay, y));
        if (order > 0) {
            for (std::size_t i = order - 1; i > 0; --i) delay[i] = delay[i - 1];
            delay[0] = y;
        }
    }
    return out;
}

FilterSpec parse_filter_spec(const std::string& text, double clip_bound) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty()) throw std::invalid_argument("empty filter spec");

    FilterSpec spec;
    spec.clip_bound = clip_bound;
    const std::string& kind = parts[0];
    try {
        if (kind == "lms" || kind == "nlms") {
            spec.kind = kind == "lms" ? FilterKind::Lms : FilterKind::Nlms;
            if (parts.size() > 1) spec.step_size = std::stod(parts[1]);
            if (parts.size() > 2) spec.order = std::stoi(parts[2]);
            if (parts.size() > 3) throw std::invalid_argument("too many fields");
        } else if (kind == "constant") {
            spec.kind = FilterKind::Constant;
            if (parts.size() != 2) throw std::invalid_argument("constant needs a value");
            spec.constant_value = std::stod(parts[1]);
        } else if (kind == "delay") {
            spec.kind = FilterKind::DelayedCopy;
            if (parts.size() > 1) throw std::invalid_argument("delay takes no parameters");
        } else {
            throw std::invalid_argument("unknown filter kind '" + kind + "'");
        }
    } catch (const std::exception& e) {
        throw std::invalid_argument("bad filter spec '" + text + "': " + e.what());
    }
    spec.validate();
    return spec;
}

} // namespace cmix
