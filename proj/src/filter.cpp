#include "blackstart/filter.hpp"

#include <cmath>
#include <numbers>

#include "blackstart/errors.hpp"

namespace blackstart {

void FilterParams::validate() const {
    if (!(l_f > 0.0) || !std::isfinite(l_f)) {
        throw InvalidParameter("filter: l_f must be positive");
    }
    if (!(c_f > 0.0) || !std::isfinite(c_f)) {
        throw InvalidParameter("filter: c_f must be positive");
    }
    if (!(r_damp >= 0.0) || !std::isfinite(r_damp)) {
        throw InvalidParameter("filter: r_damp must be non-negative");
    }
}

FilterDerivative filter_derivative(const FilterParams& fp, const FilterState& fs,
                                   const ThreePhase& v_inv, const ThreePhase& i_pcc) {
    return {(v_inv - fs.v_c - fp.r_damp * fs.i_inv) / fp.l_f, (fs.i_inv - i_pcc) / fp.c_f};
}

double resonance_frequency(const FilterParams& fp) {
    fp.validate();
    return 1.0 / (2.0 * std::numbers::pi * std::sqrt(fp.l_f * fp.c_f));
}

double characteristic_impedance(const FilterParams& fp) {
    fp.validate();
    return std::sqrt(fp.l_f / fp.c_f);
}

}  // namespace blackstart
