#pragma once

#include <stdexcept>
#include <string>

namespace invot {

// Machine-readable failure codes. The string names are part of the CLI's
// error JSON, so they must stay stable.
enum class errc {
    all_zero_density,
    non_finite_input,
    non_positive_scale,
    grid_mismatch,
    non_unit_direction,
    divergent_integral,
    infeasible,
    size_exceeded,
    not_spd,
    kernel_spectrum_degenerate,
    unstable_derivative,
    misaligned_samples,
    degenerate_graph,
    non_monotone_graph,
    anchor_infeasible,
    sign_inconsistent,
    method_family_mismatch,
    negative_density,
    parse_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::all_zero_density:           return "AllZeroDensity";
        case errc::non_finite_input:           return "NonFiniteInput";
        case errc::non_positive_scale:         return "NonPositiveScale";
        case errc::grid_mismatch:              return "GridMismatch";
        case errc::non_unit_direction:         return "NonUnitDirection";
        case errc::divergent_integral:         return "DivergentIntegral";
        case errc::infeasible:                 return "Infeasible";
        case errc::size_exceeded:              return "SizeExceeded";
        case errc::not_spd:                    return "NotSPD";
        case errc::kernel_spectrum_degenerate: return "KernelSpectrumDegenerate";
        case errc::unstable_derivative:        return "UnstableDerivative";
        case errc::misaligned_samples:         return "MisalignedSamples";
        case errc::degenerate_graph:           return "DegenerateGraph";
        case errc::non_monotone_graph:         return "NonMonotoneGraph";
        case errc::anchor_infeasible:          return "AnchorInfeasible";
        case errc::sign_inconsistent:          return "SignInconsistent";
        case errc::method_family_mismatch:     return "MethodFamilyMismatch";
        case errc::negative_density:           return "NegativeDensity";
        case errc::parse_error:                return "ParseError";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const noexcept { return code_; }
    const char* name() const noexcept { return errc_name(code_); }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

} // namespace invot
