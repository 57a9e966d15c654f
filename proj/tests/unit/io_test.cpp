#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <regex>

#include "learnafe/circuit.hpp"
#include "learnafe/io/atomic_file.hpp"
#include "learnafe/io/csv.hpp"
#include "learnafe/io/spice.hpp"
#include "learnafe/io/svg.hpp"
#include "oracles.hpp"

using namespace learnafe;
using namespace learnafe::io;
namespace fs = std::filesystem;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Csv, ParseAndColumns) {
  const auto t = parse_csv("a,b,c\n1,2.5,inf\n-3,nan,clean\n\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], 2.5);
  EXPECT_TRUE(std::isinf(t.rows[0][2]));
  EXPECT_TRUE(std::isnan(t.rows[1][1]));
  EXPECT_FALSE(std::isfinite(t.rows[1][2]));
  EXPECT_EQ(t.column("c"), 2u);
  EXPECT_EQ(t.column_values("a"), (std::vector<double>{1, -3}));
  EXPECT_THROW(t.column("d"), FormatError);
  EXPECT_THROW(parse_csv("a,b\n1\n"), FormatError);
  EXPECT_THROW(parse_csv("a,b\n1,x\n"), FormatError);
  EXPECT_THROW(parse_csv(""), FormatError);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 117.76, 5001.7312345678}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(split_fields("a\tb\t", '\t'), (std::vector<std::string>{"a", "b", ""}));
}

TEST(AtomicFile, WritesCreatesAndReplaces) {
  const auto dir = fs::temp_directory_path() / "learnafe_atomic_test";
  fs::remove_all(dir);
  const auto path = (dir / "sub" / "f.txt").string();
  write_file_atomic(path, "first");
  EXPECT_EQ(read_file(path), "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++files;
  EXPECT_EQ(files, 1u);
  EXPECT_THROW(read_file((dir / "missing").string()), FormatError);
  fs::remove_all(dir);
}

TEST(Svg, SeriesAndCellCounts) {
  LinePlot p{"t", "x", "y", true, {}};
  for (int s = 0; s < 16; ++s) {
    p.series.push_back({"ch" + std::to_string(s), {10, 100, 1000}, {1.0 * s, 2.0, std::nan("")}});
  }
  const auto svg = render_line_plot(p);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count_of(svg, "class=\"series\""), 16u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  Array2D<double> v(16, 7, 1.0);
  v(3, 4) = 9.0;
  EXPECT_EQ(count_of(render_heatmap(v, "h", "frame", "channel"), "class=\"cell\""), 16u * 7u);
}

TEST(Spice, ParamsAndSidecarRoundTrip) {
  auto bank = circuit::init_bank({}, {});
  bank.channels[3].phi_i = 2.2;
  bank.channels[9].phi_c = 4.5;
  const auto text = spice_param_text(bank);
  const auto params = parse_spice_params(text);
  ASSERT_EQ(params.size(), 64u);
  for (const auto& p : params) EXPECT_TRUE(std::regex_match(p.name, std::regex("(I1|I2|WC1|WC2)_([1-9]|1[0-6])")));
  const auto find = [&](const std::string& n) {
    for (const auto& p : params) {
      if (p.name == n) return p.value;
    }
    return std::nan("");
  };
  EXPECT_LT(oracle::rel_err(find("I1_4"), 2.2 * bank.channels[3].i2_base), 1e-8);
  EXPECT_LT(oracle::rel_err(find("I2_1"), bank.channels[0].i2_base), 1e-8);
  EXPECT_LT(oracle::rel_err(circuit::capacitance_of({find("WC1_10")}, bank.pdk) * 4.5,
                            circuit::capacitance_of({find("WC2_10")}, bank.pdk)),
            1e-8);

  const auto back = bank_from_sidecar(spice_sidecar_text(bank));
  ASSERT_EQ(back.channels.size(), 16u);
  for (std::size_t k = 0; k < 16; ++k) {
    EXPECT_LT(oracle::rel_err(back.channels[k].phi_i, bank.channels[k].phi_i), 1e-12);
    EXPECT_LT(oracle::rel_err(back.channels[k].phi_c, bank.channels[k].phi_c), 1e-12);
    EXPECT_LT(oracle::rel_err(back.channels[k].i2_base, bank.channels[k].i2_base), 1e-12);
    EXPECT_LT(oracle::rel_err(back.channels[k].c1_base, bank.channels[k].c1_base), 1e-12);
  }
  const auto dir = fs::temp_directory_path() / "learnafe_spice_test";
  const auto path = (dir / "afe.spice").string();
  export_spice_params(bank, path);
  EXPECT_EQ(sidecar_path_for(path), path + ".json");
  EXPECT_EQ(read_file(path), text);
  EXPECT_EQ(load_sidecar(sidecar_path_for(path)).channels.size(), 16u);
  EXPECT_THROW(bank_from_sidecar("{\"channels\": 3}"), FormatError);
  fs::remove_all(dir);
}
