#pragma once

#include <stdexcept>
#include <string>

namespace kgflrw {

// All numerical-failure conditions carry a stable kind tag so the CLI can
// report the failing condition by name (exit code 2).
class error : public std::runtime_error {
public:
    error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }
private:
    std::string kind_;
};

#define KGFLRW_DEFINE_ERROR(cls, tag)                                     \
    class cls : public error {                                            \
    public:                                                               \
        explicit cls(const std::string& what) : error(tag, what) {}       \
    }

KGFLRW_DEFINE_ERROR(non_integrable_endpoint, "NonIntegrableEndpoint");
KGFLRW_DEFINE_ERROR(out_of_chart, "OutOfChart");
KGFLRW_DEFINE_ERROR(cutoff_too_large, "CutoffTooLarge");
KGFLRW_DEFINE_ERROR(empty_spectrum, "EmptySpectrum");
KGFLRW_DEFINE_ERROR(divergent_series, "DivergentSeries");
KGFLRW_DEFINE_ERROR(degenerate_exponent, "DegenerateExponent");
KGFLRW_DEFINE_ERROR(unclassified_regime, "UnclassifiedRegime");
KGFLRW_DEFINE_ERROR(tolerance_failure, "ToleranceFailure");
KGFLRW_DEFINE_ERROR(endpoint_reached, "EndpointReached");
KGFLRW_DEFINE_ERROR(no_convergence, "NoConvergence");
KGFLRW_DEFINE_ERROR(negative_frequency, "NegativeFrequency");
KGFLRW_DEFINE_ERROR(model_selection_ambiguous, "ModelSelectionAmbiguous");
KGFLRW_DEFINE_ERROR(no_admissible_tau0, "NoAdmissibleTau0");
KGFLRW_DEFINE_ERROR(bound_violated, "BoundViolated");
KGFLRW_DEFINE_ERROR(insufficient_smoothness, "InsufficientSmoothness");
KGFLRW_DEFINE_ERROR(precondition_violated, "PreconditionViolated");
KGFLRW_DEFINE_ERROR(unsupported_regime, "UnsupportedRegime");
KGFLRW_DEFINE_ERROR(insufficient_decades, "InsufficientDecades");
KGFLRW_DEFINE_ERROR(supercritical_exponent, "SupercriticalExponent");
KGFLRW_DEFINE_ERROR(domain_error, "DomainError");
KGFLRW_DEFINE_ERROR(no_singularity_on_side, "NoSingularityOnSide");
KGFLRW_DEFINE_ERROR(config_error, "ConfigError");

#undef KGFLRW_DEFINE_ERROR

} // namespace kgflrw
