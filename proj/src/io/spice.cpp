#include "learnafe/io/spice.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "learnafe/io/atomic_file.hpp"

namespace learnafe::io {

using circuit::BankParams;
using nlohmann::json;

namespace {

std::string sci9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

}  // namespace

std::string spice_param_text(const BankParams& bank) {
  bank.validate();
  std::ostringstream os;
  os << "* learned bandpass bank: " << bank.channels.size() << " channels\n";
  os << "* currents in A, capacitor plate widths in um\n";
  for (std::size_t k = 0; k < bank.channels.size(); ++k) {
    const auto& ch = bank.channels[k];
    const std::string idx = std::to_string(k + 1);
    const double w1 = circuit::width_for_capacitance(ch.c1_base, bank.pdk).w_c;
    const double w2 = circuit::width_for_capacitance(ch.phi_c * ch.c1_base, bank.pdk).w_c;
    os << ".param I1_" << idx << '=' << sci9(ch.phi_i * ch.i2_base) << '\n';
    os << ".param I2_" << idx << '=' << sci9(ch.i2_base) << '\n';
    os << ".param WC1_" << idx << '=' << sci9(w1) << '\n';
    os << ".param WC2_" << idx << '=' << sci9(w2) << '\n';
  }
  return os.str();
}

std::string spice_sidecar_text(const BankParams& bank) {
  bank.validate();
  json j;
  j["format"] = "learnafe-spice-sidecar";
  j["version"] = 1;
  j["pdk"] = {{"nut_nmos_v", bank.pdk.nut_nmos},
              {"nut_pmos_v", bank.pdk.nut_pmos},
              {"vdd_v", bank.pdk.vdd},
              {"cap_density_ff_per_um2", bank.pdk.cap_density},
              {"cap_fringe_ff_per_um", bank.pdk.cap_fringe}};
  json chans = json::array();
  for (std::size_t k = 0; k < bank.channels.size(); ++k) {
    const auto& ch = bank.channels[k];
    const auto r = circuit::derive_response(ch, bank.pdk);
    chans.push_back({{"index", k + 1},
                     {"i1_a", ch.phi_i * ch.i2_base},
                     {"i2_a", ch.i2_base},
                     {"wc1_um", circuit::width_for_capacitance(ch.c1_base, bank.pdk).w_c},
                     {"wc2_um", circuit::width_for_capacitance(ch.phi_c * ch.c1_base, bank.pdk).w_c},
                     {"phi_i", ch.phi_i},
                     {"phi_c", ch.phi_c},
                     {"c1_f", ch.c1_base},
                     {"fc_hz", r.fc},
                     {"q", r.q},
                     {"gain", r.a}});
  }
  j["channels"] = chans;
  j["power_w"] = circuit::estimate_power(bank).total;
  j["area_mm2"] = circuit::estimate_cap_area(bank);
  // nlohmann serializes doubles with round-trip precision
  return j.dump(2) + "\n";
}

std::string sidecar_path_for(const std::string& spice_path) { return spice_path + ".json"; }

void export_spice_params(const BankParams& bank, const std::string& path) {
  const std::string params = spice_param_text(bank);
  const std::string sidecar = spice_sidecar_text(bank);
  write_file_atomic(path, params);
  write_file_atomic(sidecar_path_for(path), sidecar);
}

BankParams bank_from_sidecar(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed sidecar: ") + e.what());
  }
  try {
    BankParams bank;
    const auto& p = j.at("pdk");
    bank.pdk.nut_nmos = p.at("nut_nmos_v").get<double>();
    bank.pdk.nut_pmos = p.at("nut_pmos_v").get<double>();
    bank.pdk.vdd = p.at("vdd_v").get<double>();
    bank.pdk.cap_density = p.at("cap_density_ff_per_um2").get<double>();
    bank.pdk.cap_fringe = p.at("cap_fringe_ff_per_um").get<double>();
    for (const auto& c : j.at("channels")) {
      const double i1 = c.at("i1_a").get<double>();
      const double i2 = c.at("i2_a").get<double>();
      const double c1 = circuit::capacitance_of({c.at("wc1_um").get<double>()}, bank.pdk);
      const double c2 = circuit::capacitance_of({c.at("wc2_um").get<double>()}, bank.pdk);
      bank.channels.push_back({i2, c1, i1 / i2, c2 / c1});
    }
    bank.validate();
    return bank;
  } catch (const json::exception& e) {
    throw FormatError(std::string("sidecar is missing fields: ") + e.what());
  }
}

BankParams load_sidecar(const std::string& path) { return bank_from_sidecar(read_file(path)); }

std::vector<SpiceParam> parse_spice_params(const std::string& text) {
  std::vector<SpiceParam> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(".param", 0) != 0) continue;
    std::istringstream ls(line.substr(6));
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) throw FormatError("bad .param token '" + tok + "'");
      try {
        out.push_back({tok.substr(0, eq), std::stod(tok.substr(eq + 1))});
      } catch (const std::exception&) {
        throw FormatError("bad .param value in '" + tok + "'");
      }
    }
  }
  return out;
}

}  // namespace learnafe::io
