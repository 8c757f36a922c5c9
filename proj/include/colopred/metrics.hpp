#pragma once

#include <string>

#include "colopred/counters.hpp"

namespace colopred::metrics {

enum class Label { Low, High };

const char* label_name(Label l);
Label label_from_name(const std::string& s);  // throws Errc::bad_format

inline constexpr double kDefaultThresholdPercent = 100.0;

// Relative increase of the co-located execution time over the solo time, in
// percent. Throws non_positive_time unless both times are > 0.
double degradation(double t_solo, double t_coloc);

// High iff pd >= threshold; the boundary itself is High. threshold must be > 0.
Label label(double pd_percent, double threshold_percent = kDefaultThresholdPercent);

struct DegradationResult {
    double pd_percent = 0.0;
    Label label = Label::Low;
    double threshold_percent = kDefaultThresholdPercent;
};

DegradationResult classify_degradation(double t_solo, double t_coloc,
                                       double threshold_percent = kDefaultThresholdPercent);

// One (VE workload, VH workload) pairing with its measured/simulated times,
// degradation label and merged feature row.
struct CoExecutionRecord {
    std::string ve_name;
    std::string vh_name;
    double t_solo_ve = 0.0;
    double t_coloc_ve = 0.0;
    DegradationResult degradation;
    counters::FeatureVector features;
};

}  // namespace colopred::metrics
