#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace walkrg::cli {

using json = nlohmann::json;

/// What a subcommand sees: resolved parameters, where to write, and whether
/// to judge the result.
struct RunContext {
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool check = false;
  std::ostream* log = nullptr;
  std::vector<std::string> files;  ///< written so far, relative to out_dir

  std::ofstream open(const std::string& name);
  void write_summary(const std::string& name, const json& summary);
  std::ostream& say() { return *log; }
};

/// Runs one subcommand; returns false when --check was requested and failed.
bool dispatch(const std::string& subcommand, const json& params, RunContext& ctx);

/// Shortest round-trip text for a double, identical across runs.
std::string num(double x);

}  // namespace walkrg::cli
