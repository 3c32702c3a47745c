#pragma once

// LC output filter between the inverter bridge and the PCC.

#include "blackstart/frames.hpp"

namespace blackstart {

struct FilterParams {
    double l_f = 3.4e-3;   ///< filter inductance (H)
    double c_f = 5e-6;     ///< filter capacitance (F)
    double r_damp = 0.0;   ///< series damping resistance (ohm)

    /// Throws InvalidParameter unless l_f > 0, c_f > 0 and r_damp >= 0.
    void validate() const;
};

struct FilterState {
    ThreePhase i_inv;  ///< inductor (inverter-side) current
    ThreePhase v_c;    ///< capacitor voltage, i.e. the PCC voltage
};

struct FilterDerivative {
    ThreePhase di_inv_dt;
    ThreePhase dv_c_dt;
};

[[nodiscard]] FilterDerivative filter_derivative(const FilterParams& fp, const FilterState& fs,
                                                 const ThreePhase& v_inv, const ThreePhase& i_pcc);

/// 1 / (2 pi sqrt(l_f c_f)) in Hz.
[[nodiscard]] double resonance_frequency(const FilterParams& fp);

/// Characteristic impedance sqrt(l_f / c_f) in ohm.
[[nodiscard]] double characteristic_impedance(const FilterParams& fp);

}  // namespace blackstart
