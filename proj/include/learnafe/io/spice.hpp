#pragma once

// Hand-off of a trained bank to circuit simulation: a `.param` include file
// plus a JSON sidecar carrying the same values at full precision.

#include <string>
#include <vector>

#include "learnafe/circuit.hpp"

namespace learnafe::io {

/// `.param NAME=VALUE` lines, one quantity per line, 9 significant digits.
/// Channel k (1-based) contributes I1_k, I2_k (A) and WC1_k, WC2_k (um).
std::string spice_param_text(const circuit::BankParams& bank);

/// Sidecar JSON: pdk constants, per-channel physical values and derived
/// f_c/Q/A, total power (W) and capacitor area (mm^2).
std::string spice_sidecar_text(const circuit::BankParams& bank);

/// Writes `path` and the sidecar `path + ".json"`, both atomically.
void export_spice_params(const circuit::BankParams& bank, const std::string& path);

std::string sidecar_path_for(const std::string& spice_path);

/// Rebuilds a bank from sidecar physical values: phi_I = I1/I2,
/// C1 = C(WC1), phi_C = C(WC2)/C(WC1).
circuit::BankParams bank_from_sidecar(const std::string& json_text);
circuit::BankParams load_sidecar(const std::string& path);

struct SpiceParam {
  std::string name;
  double value = 0.0;
};

/// Parses every `.param` assignment of an include file.
std::vector<SpiceParam> parse_spice_params(const std::string& text);

}  // namespace learnafe::io
