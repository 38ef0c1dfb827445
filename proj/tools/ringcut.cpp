// ringcut: parameter sweeps for the XX ring with a bond defect.

#include <ringcut/sweep.hpp>

#include <CLI11.hpp>

#include "presets_data.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ringcut;

namespace {

constexpr int kOk = 0, kConfigError = 1, kPartialFailure = 2;

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("RINGCUT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring RINGCUT_THREADS='" << env << "'\n";
  }
  return 1;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

bool report(const sweep::LoadResult& res, const std::string& source) {
  for (const auto& d : res.diagnostics) std::cerr << source << ": " << d.str() << '\n';
  return res.ok();
}

int run_config(const std::string& text, const std::string& source, const fs::path& out_dir, int threads) {
  const auto res = sweep::load_config(text);
  if (!report(res, source)) return kConfigError;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kConfigError;
  }
  int failures = 0;
  for (const auto& cfg : res.config.sweeps) {
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = sweep::run_sweep(cfg, threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += result.failures;

    const fs::path data = out_dir / cfg.output;
    if (data.has_parent_path()) fs::create_directories(data.parent_path(), ec);
    std::ofstream os(data, std::ios::binary);
    os << sweep::render(cfg, result.rows);
    if (!os) {
      std::cerr << "error: cannot write " << data << '\n';
      return kConfigError;
    }
    nlohmann::json meta{{"sweep", cfg.name},
                        {"config", source},
                        {"started", started},
                        {"seconds", seconds},
                        {"threads", threads},
                        {"rows", result.rows.size()},
                        {"failed_rows", result.failures}};
    std::ofstream(data.string() + ".meta.json") << meta.dump(2) << '\n';
    std::cout << cfg.name << ": " << result.rows.size() << " rows -> " << data.string();
    if (result.failures) std::cout << " (" << result.failures << " failed)";
    std::cout << '\n';
  }
  return failures ? kPartialFailure : kOk;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    std::cerr << "error: cannot read " << path << '\n';
    return false;
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  text = ss.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground-state correlations, discord and ring-cut fidelity of the XX ring with a bond defect"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads for sweep points (default: RINGCUT_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  std::string config, out_dir = ".";
  auto* run = app.add_subcommand("run", "Run the sweeps in a config file");
  run->add_option("config", config, "JSON config file")->required();
  run->add_option("--out", out_dir, "Directory for output files");

  std::string vconfig;
  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", vconfig, "JSON config file")->required();

  std::string preset_name, preset_out;
  bool list = false, show = false;
  auto* preset = app.add_subcommand("preset", "Run a built-in figure preset");
  preset->add_option("name", preset_name, "Preset name (fig2 ... fig6)");
  preset->add_option("--out", preset_out, "Directory for output files");
  preset->add_flag("--list", list, "List presets");
  preset->add_flag("--show", show, "Print the preset config instead of running it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  if (*run) {
    std::string text;
    if (!read_file(config, text)) return kConfigError;
    return run_config(text, config, out_dir, resolve_threads(threads));
  }
  if (*validate) {
    std::string text;
    if (!read_file(vconfig, text)) return kConfigError;
    const auto res = sweep::load_config(text);
    report(res, vconfig);
    if (res.ok()) {
      for (const auto& s : res.config.sweeps)
        std::cout << s.name << ": " << sweep::detail::points(s).size() << " points, "
                  << sweep::to_string(s.observable) << " (" << sweep::to_string(s.engine) << ") -> " << s.output
                  << '\n';
      std::cout << "ok\n";
    }
    return res.ok() ? kOk : kConfigError;
  }
  // preset
  if (list) {
    for (const auto& [name, _] : presets::all()) std::cout << name << '\n';
    return kOk;
  }
  const auto& all = presets::all();
  const auto it = all.find(preset_name);
  if (it == all.end()) {
    std::cerr << "error: unknown preset '" << preset_name << "' (try --list)\n";
    return kConfigError;
  }
  if (show) {
    std::cout << it->second;
    return kOk;
  }
  if (preset_out.empty()) {
    std::cerr << "error: preset needs --out <dir>\n";
    return kConfigError;
  }
  return run_config(it->second, "preset:" + preset_name, preset_out, resolve_threads(threads));
}
