#include "colopred/metrics.hpp"

#include "colopred/error.hpp"

namespace colopred::metrics {

const char* label_name(Label l) { return l == Label::High ? "High" : "Low"; }

Label label_from_name(const std::string& s) {
    if (s == "High") return Label::High;
    if (s == "Low") return Label::Low;
    throw Error(Errc::bad_format, "unknown label '" + s + "'");
}

double degradation(double t_solo, double t_coloc) {
    if (!(t_solo > 0.0))
        throw Error(Errc::non_positive_time, "t_solo must be > 0");
    if (!(t_coloc > 0.0))
        throw Error(Errc::non_positive_time, "t_coloc must be > 0");
    return (t_coloc - t_solo) / t_solo * 100.0;
}

Label label(double pd_percent, double threshold_percent) {
    if (!(threshold_percent > 0.0))
        throw Error(Errc::bad_format, "threshold must be > 0");
    return pd_percent >= threshold_percent ? Label::High : Label::Low;
}

DegradationResult classify_degradation(double t_solo, double t_coloc,
                                       double threshold_percent) {
    DegradationResult r;
    r.pd_percent = degradation(t_solo, t_coloc);
    r.threshold_percent = threshold_percent;
    r.label = label(r.pd_percent, threshold_percent);
    return r;
}

}  // namespace colopred::metrics
