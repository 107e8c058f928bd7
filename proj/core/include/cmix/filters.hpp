#pragma once

#include <span>
#include <string>
#include <vector>

namespace cmix {

enum class FilterKind { Lms, Nlms, Constant, DelayedCopy };

// Specification of one constituent filter. Outputs are always hard-clipped to
// [-clip_bound, clip_bound]; the filter's own adaptation sees the unclipped
// output.
struct FilterSpec {
    FilterKind kind = FilterKind::Lms;
    double step_size = 0.1;      // lms / nlms
    int order = 4;               // tap count, lms / nlms
    double constant_value = 0.0; // constant
    double clip_bound = 1.0;     // = Y

    void validate() const;
};

struct FilterState {
    std::vector<double> taps; // lms / nlms
    double prev_desired = 0.0; // delayed-copy
};

FilterState make_filter_state(const FilterSpec& spec);

// Advances one step: emits the (clipped) prediction for the current regressor,
// then adapts the internal state using the desired sample.
// NLMS normalizes the step by (1e-8 + ||regressor||^2).
double filter_step(const FilterSpec& spec, FilterState& state,
                   std::span<const double> regressor, double desired);

// Runs a filter over a desired-signal stream. The regressor at time t is the
// delay line [y(t-1), ..., y(t-order)], zero-padded before the start.
std::vector<double> run_filter(const FilterSpec& spec, const std::vector<double>& ys);

// Parses a compact spec string: "lms:<step>:<order>", "nlms:<step>:<order>",
// "constant:<value>", "delay". Throws std::invalid_argument on bad syntax.
FilterSpec parse_filter_spec(const std::string& text, double clip_bound);

} // namespace cmix
