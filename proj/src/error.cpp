#include "colopred/error.hpp"

namespace colopred {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::missing_column: return "MissingColumn";
        case Errc::unknown_column: return "UnknownColumn";
        case Errc::empty_trace: return "EmptyTrace";
        case Errc::non_monotonic_time: return "NonMonotonicTime";
        case Errc::bad_format: return "BadFormat";
        case Errc::duplicate_feature_name: return "DuplicateFeatureName";
        case Errc::infeasible_profile: return "InfeasibleProfile";
        case Errc::side_mismatch: return "SideMismatch";
        case Errc::non_positive_time: return "NonPositiveTime";
        case Errc::empty_result: return "EmptyResult";
        case Errc::zero_variance_column: return "ZeroVarianceColumn";
        case Errc::degenerate_input: return "DegenerateInput";
        case Errc::schema_mismatch: return "SchemaMismatch";
        case Errc::single_class_training: return "SingleClassTraining";
        case Errc::missing_values: return "MissingValues";
        case Errc::missing_feature: return "MissingFeature";
        case Errc::insufficient_data: return "InsufficientData";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::empty_input: return "Empty";
        case Errc::io_error: return "IoError";
        case Errc::bad_model_file: return "BadModelFile";
    }
    return "Error";
}

}  // namespace colopred
