#pragma once

#include <stdexcept>
#include <string>

namespace colopred {

// Every recoverable failure in the toolkit carries one of these codes so
// callers (and the CLI exit-code mapping) can dispatch without string matching.
enum class Errc {
    // counters
    missing_column,
    unknown_column,
    empty_trace,
    non_monotonic_time,
    bad_format,
    duplicate_feature_name,
    // sim
    infeasible_profile,
    side_mismatch,
    // metrics
    non_positive_time,
    // features
    empty_result,
    zero_variance_column,
    degenerate_input,
    schema_mismatch,
    // model
    single_class_training,
    missing_values,
    missing_feature,
    insufficient_data,
    // eval
    length_mismatch,
    empty_input,
    // io / serialization
    io_error,
    bad_model_file,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace colopred
