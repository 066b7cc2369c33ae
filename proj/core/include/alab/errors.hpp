#pragma once

#include <stdexcept>
#include <string>

namespace alab {

// mapped to process exit code 2 by the CLI
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// certification / accuracy failures, exit code 3
struct CertificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AccuracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalInstabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace alab
