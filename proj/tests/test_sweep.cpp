#include <ringcut/sweep.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ringcut;
using namespace ringcut::sweep;

namespace {

const std::filesystem::path source_dir = RINGCUT_SOURCE_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool has(const LoadResult& r, Diagnostic::Level level, const std::string& field, const std::string& text = "") {
  for (const auto& d : r.diagnostics)
    if (d.level == level && d.field == field && d.message.find(text) != std::string::npos) return true;
  return false;
}

std::string dump(const LoadResult& r) {
  std::string s;
  for (const auto& d : r.diagnostics) s += d.str() + "\n";
  return s;
}

SweepConfig parse_one(const std::string& text) {
  const LoadResult r = load_config(text);
  EXPECT_TRUE(r.ok()) << dump(r);
  return r.config.sweeps.at(0);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

// Cheap corner of a preset sweep: two couplings, the smallest ring.
SweepConfig cheap(SweepConfig c) {
  if (c.j.size() > 2) c.j.resize(2);
  if (!c.M.empty()) c.M = {*std::min_element(c.M.begin(), c.M.end())};
  return c;
}

}  // namespace

TEST(Sweep, MissingGridIsNamed) {
  const LoadResult r = load_config(R"({"observable": "bond_profile_xx", "engine": "tlimit", "h": 0,
                                       "bonds": {"from": 1, "to": 3}})");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, Diagnostic::Level::Error, "j")) << dump(r);
}

TEST(Sweep, ZeroModeWarning) {
  const LoadResult r = load_config(R"({"observable": "bond_profile_xx", "engine": "finite", "boundary": "ring_naive",
                                       "M": [10, 11], "j": 1, "h": [0, 0.5], "bonds": {"from": 1, "to": 3}})");
  EXPECT_TRUE(r.ok()) << dump(r);
  EXPECT_TRUE(has(r, Diagnostic::Level::Warning, "h", "zero")) << dump(r);
  const LoadResult quiet = load_config(R"({"observable": "bond_profile_xx", "engine": "finite",
                                           "boundary": "ring_naive", "M": 11, "j": 1, "h": 0,
                                           "bonds": {"from": 1, "to": 3}})");
  EXPECT_TRUE(quiet.diagnostics.empty()) << dump(quiet);
}

TEST(Sweep, TLimitRejectsSystemSize) {
  const LoadResult r = load_config(R"({"observable": "bond_profile_zz", "engine": "tlimit", "M": 100,
                                       "j": 2, "h": 0, "bonds": {"from": 1, "to": 3}})");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, Diagnostic::Level::Error, "M", "system size")) << dump(r);
}

TEST(Sweep, FieldErrorsCarryPaths) {
  const LoadResult r = load_config(R"({"sweeps": [
    {"observable": "spectrum_scan", "engine": "finite", "M": 20, "j": 2, "h": 0},
    {"observable": "bond_profile_xx", "engine": "finite", "M": 20, "j": [-1], "h": 0,
     "bonds": {"from": 1, "to": 3}, "colour": "red"}]})");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has(r, Diagnostic::Level::Error, "sweeps[1].j")) << dump(r);
  EXPECT_TRUE(has(r, Diagnostic::Level::Error, "sweeps[1].colour")) << dump(r);
  EXPECT_FALSE(has(r, Diagnostic::Level::Error, "sweeps[0].j"));
}

TEST(Sweep, InvalidCombinations) {
  auto errors = [](const std::string& text) { return !load_config(text).ok(); };
  EXPECT_TRUE(errors(R"({"observable": "bond_profile_xx", "engine": "finite", "j": 1, "h": 0,
                         "bonds": {"from": 1, "to": 2}})"));
  EXPECT_TRUE(errors(R"({"observable": "bond_profile_xx", "engine": "finite", "M": 1.5, "j": 1, "h": 0,
                         "bonds": {"from": 1, "to": 2}})"));
  EXPECT_TRUE(errors(R"({"observable": "bond_profile_xx", "engine": "finite", "M": 10, "j": 1, "h": 0})"));
  EXPECT_TRUE(errors(R"({"observable": "bond_profile_xx", "engine": "finite", "M": 10, "j": 1, "h": 0,
                         "bonds": {"from": 1, "to": 20}})"));
  EXPECT_TRUE(errors(R"({"observable": "fidelity_vs_j", "engine": "tlimit", "j": 1, "h": 0})"));
  EXPECT_TRUE(errors(R"({"observable": "fidelity_vs_j", "engine": "finite", "boundary": "open_segment",
                         "M": 10, "j": 1, "h": 0})"));
  EXPECT_TRUE(errors(R"({"observable": "correlators_vs_j", "engine": "tlimit", "j": 1, "h": 0,
                         "sites": [[0.5, 1.5]], "normalize": true})"));
  EXPECT_TRUE(errors(R"({"observable": "magic", "engine": "tlimit", "j": 1, "h": 0})"));
  EXPECT_TRUE(errors(R"({"sweeps": [
    {"observable": "spectrum_scan", "engine": "finite", "M": 20, "j": 2, "h": 0, "output": "a.csv"},
    {"observable": "spectrum_scan", "engine": "finite", "M": 30, "j": 2, "h": 0, "output": "a.csv"}]})"));
}

TEST(Sweep, ParseErrorsHaveLineAndColumn) {
  const LoadResult r = load_config("{\n  \"observable\": \"spectrum_scan\",\n  \"j\": [1, 2,,]\n}");
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].field.rfind("line 3, column", 0), 0u) << r.diagnostics[0].field;
}

TEST(Sweep, GridForms) {
  const SweepConfig c = parse_one(R"({"observable": "spectrum_scan", "engine": "finite", "M": [10, 20],
                                      "j": {"from": 0.1, "to": 1000, "count": 5, "spacing": "log"},
                                      "h": {"from": 0, "to": 1, "count": 3}})");
  ASSERT_EQ(c.j.size(), 5u);
  EXPECT_EQ(c.j.front(), 0.1);
  EXPECT_EQ(c.j.back(), 1000.0);
  EXPECT_NEAR(c.j[2], 10.0, 1e-12);
  EXPECT_EQ(c.h, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(c.M, (std::vector<int>{10, 20}));
  EXPECT_EQ(c.output, "sweep0.csv");
  EXPECT_EQ(c.format, Format::Csv);
}

TEST(Sweep, CsvHeaderIsStable) {
  const std::string header = "observable,engine,M,j,h,site_or_bond_a,site_or_bond_b,value,flag,err_est\n";
  EXPECT_EQ(to_csv({}), header);
  const auto golden = lines(slurp(source_dir / "tests" / "golden" / "fig5_concurrence.csv"));
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(golden.front() + "\n", header);
}

TEST(Sweep, FloatFormatting) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(std::stod(format_double(std::sqrt(0.5))), std::sqrt(0.5));
}

TEST(Sweep, RowsInGridOrderForAnyThreadCount) {
  const SweepConfig c = parse_one(R"({"observable": "bond_profile_zz", "engine": "finite", "M": [12, 16],
                                      "j": [0.5, 2, 4], "h": [0.1, 0.3], "bonds": {"from": -2, "to": 2}})");
  const auto one = run_sweep(c, 1), four = run_sweep(c, 4);
  EXPECT_EQ(to_csv(one.rows), to_csv(four.rows));
  EXPECT_EQ(to_csv(one.rows), to_csv(run_sweep(c, 1).rows));
  ASSERT_EQ(one.rows.size(), 2u * 3 * 2 * 5);
  EXPECT_EQ(one.rows.front().M, 12);
  EXPECT_EQ(one.rows.back().M, 16);
  EXPECT_EQ(one.rows[5].h, 0.3);
}

TEST(Sweep, FlagsZeroModes) {
  const SweepConfig c = parse_one(R"({"observable": "bond_profile_xx", "engine": "finite", "boundary": "ring_naive",
                                      "M": 10, "j": 1, "h": [0, 0.2], "bonds": {"from": 0, "to": 0}})");
  const auto res = run_sweep(c);
  ASSERT_EQ(res.rows.size(), 2u);
  EXPECT_EQ(res.rows[0].flag, "zero_mode");
  EXPECT_EQ(res.rows[1].flag, "ok");
}

TEST(Sweep, PointFailuresStayInRow) {
  SweepConfig c = parse_one(R"({"observable": "bond_profile_xx", "engine": "finite", "M": 10, "j": 1,
                                "h": [0.1, 0.2], "bonds": {"from": 0, "to": 1}})");
  c.h[0] = std::nan("");
  const auto res = run_sweep(c);
  EXPECT_EQ(res.failures, 1);
  ASSERT_EQ(res.rows.size(), 3u);
  EXPECT_EQ(res.rows[0].flag.rfind("error:", 0), 0u);
  EXPECT_TRUE(std::isnan(res.rows[0].value));
  EXPECT_EQ(res.rows[0].flag.find(','), std::string::npos);
  EXPECT_EQ(res.rows[1].flag, "ok");
}

TEST(Sweep, JsonOutput) {
  const SweepConfig c = parse_one(R"({"observable": "spectrum_scan", "engine": "finite", "M": 20, "j": 2, "h": 0,
                                      "output": "s.json"})");
  EXPECT_EQ(c.format, Format::Json);
  const auto doc = nlohmann::json::parse(render(c, run_sweep(c).rows));
  EXPECT_EQ(doc["columns"].size(), 10u);
  ASSERT_EQ(doc["rows"].size(), 3u);
  EXPECT_EQ(doc["rows"][0][0], "spectrum_scan.bound_count");
  EXPECT_EQ(doc["rows"][0][7], 2.0);
}

TEST(Sweep, PresetsAreValid) {
  for (const auto& entry : std::filesystem::directory_iterator(source_dir / "presets")) {
    const LoadResult r = load_config(slurp(entry.path()));
    EXPECT_TRUE(r.ok()) << entry.path() << "\n" << dump(r);
  }
}

// Cheap corners of every preset against frozen tables. Regenerate with
// RINGCUT_UPDATE_GOLDEN=1.
TEST(Sweep, PresetGoldenFiles) {
  const bool update = std::getenv("RINGCUT_UPDATE_GOLDEN") != nullptr;
  for (const auto& entry : std::filesystem::directory_iterator(source_dir / "presets")) {
    const LoadResult r = load_config(slurp(entry.path()));
    ASSERT_TRUE(r.ok());
    for (const auto& full : r.config.sweeps) {
      const SweepConfig c = cheap(full);
      const std::string csv = to_csv(run_sweep(c).rows);
      const auto path = source_dir / "tests" / "golden" / (c.name + ".csv");
      if (update) {
        std::ofstream(path, std::ios::binary) << csv;
        continue;
      }
      ASSERT_TRUE(std::filesystem::exists(path)) << path;
      const auto want = lines(slurp(path)), got = lines(csv);
      ASSERT_EQ(want.size(), got.size()) << c.name;
      EXPECT_EQ(want.front(), got.front());
      for (std::size_t i = 1; i < want.size(); ++i) {
        const auto a = split(want[i]), b = split(got[i]);
        ASSERT_EQ(a.size(), 10u);
        ASSERT_EQ(b.size(), 10u);
        for (int k : {0, 1, 2, 3, 4, 5, 6, 8}) EXPECT_EQ(a[k], b[k]) << c.name << " line " << i;
        const double x = std::stod(a[7]), y = std::stod(b[7]);
        if (std::isnan(x)) EXPECT_TRUE(std::isnan(y));
        else EXPECT_NEAR(x, y, 1e-10) << c.name << " line " << i;
      }
    }
  }
}
