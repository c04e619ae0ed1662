#pragma once

#include "eos/params.hpp"

#include <string>

namespace eos {

// Reads a key-value parameter file on top of `base`. Recognized keys:
//   probe.center_thz, probe.bandwidth_thz, probe.photons,
//   crystal.length_um, crystal.r41_pm_per_v, crystal.n, crystal.n_g, crystal.w0_um,
//   crystal.dispersion = "set1" | "set2" | <path to two-column table>,
//   crystal.absorption = true | false, crystal.mir_window_thz = [lo, hi].
// Unknown keys are rejected. The result is labeled Custom.
ParameterSet load_config(const std::string& path, const ParameterSet& base);
ParameterSet parse_config(const std::string& text, const ParameterSet& base, const std::string& origin = "<string>");

} // namespace eos
