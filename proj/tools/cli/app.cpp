#include "app.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <thread>

#include "commands.hpp"
#include "manifest.hpp"
#include "params.hpp"
#include "walkrg/errors.hpp"

#ifndef WALKRG_VERSION
#define WALKRG_VERSION "unknown"
#endif

namespace walkrg::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string out;
  std::string config;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool check = false;
  bool print_config = false;
};

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "walkrg-out";
}

unsigned thread_cap(unsigned flag) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return flag == 0 ? hw : flag;
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", path + " is not valid JSON: " + e.what());
  }
}

/// Runs a subcommand into `dir` and appends its manifest.
int execute(const std::string& sub, const json& params, std::uint64_t seed, const fs::path& dir, unsigned threads,
            bool check, std::ostream& out, RunManifest* record = nullptr) {
  fs::create_directories(dir);
  RunContext ctx;
  ctx.out_dir = dir;
  ctx.seed = seed;
  ctx.threads = threads;
  ctx.check = check;
  ctx.log = &out;
  RunManifest m;
  m.subcommand = sub;
  m.params = params;
  m.seed = seed;
  m.code_version = WALKRG_VERSION;
  m.threads = threads;
  m.check_requested = check;
  m.started = utc_now();
  m.check_passed = dispatch(sub, params, ctx);
  m.finished = utc_now();
  for (const auto& f : ctx.files) m.outputs.push_back({f, sha256_file(dir / f), static_cast<std::uint64_t>(fs::file_size(dir / f))});
  append_manifest(dir, m);
  fmt::print(out, "wrote {} file(s) to {}; manifest appended to {}\n", m.outputs.size(), dir.string(),
             (dir / "manifest.jsonl").string());
  if (record) *record = m;
  return check && !m.check_passed ? kExitCheck : kExitOk;
}

int replay(const std::string& manifest_file, int line, const fs::path& dir, unsigned threads, bool check, std::ostream& out) {
  const auto all = read_manifests(manifest_file);
  if (line < 0 || line > static_cast<int>(all.size()))
    throw ConfigError("line", fmt::format("manifest file holds {} line(s)", all.size()));
  const RunManifest& m = all[static_cast<std::size_t>(line == 0 ? all.size() - 1 : line - 1)];
  const Schema& schema = schema_for(m.subcommand);
  json params = schema.defaults();
  overlay(schema, params, m.params, "manifest");
  if (m.code_version != WALKRG_VERSION)
    fmt::print(out, "note: manifest was written by version {}, this is {}\n", m.code_version, WALKRG_VERSION);
  RunManifest now;
  execute(m.subcommand, params, m.seed, dir, threads, false, out, &now);
  bool same = now.outputs.size() == m.outputs.size();
  for (const auto& o : m.outputs) {
    const auto it = std::find_if(now.outputs.begin(), now.outputs.end(), [&](const OutputDigest& x) { return x.file == o.file; });
    const bool ok = it != now.outputs.end() && it->sha256 == o.sha256;
    same = same && ok;
    fmt::print(out, "{} {}\n", ok ? "identical" : "DIFFERS  ", o.file);
  }
  fmt::print(out, "replay {}\n", same ? "reproduced every output byte for byte" : "did not reproduce the outputs");
  return check && !same ? kExitCheck : kExitOk;
}

std::string strip_module(const walkrg::Error& e) {
  std::string w = e.what();
  const std::string prefix = e.module() + ": ";
  return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"walkrg: self-avoiding walk and renormalization group toolkit"};
  app.set_version_flag("--version", WALKRG_VERSION);
  app.require_subcommand(1);

  std::map<std::string, Common> common;
  std::map<std::string, std::map<std::string, std::string>> raw;
  for (const auto& s : schemas()) {
    auto* sub = app.add_subcommand(s.subcommand, s.summary + " [" + s.module + "]");
    auto& c = common[s.subcommand];
    sub->add_option("--out", c.out, std::string("output directory (default: $") + kOutputDirEnv + " or ./walkrg-out)");
    sub->add_option("--config", c.config, "JSON file of parameters; flags override it");
    sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "cap on worker threads (default: all cores)");
    sub->add_flag("--check", c.check, "judge the result; exit 4 on failure");
    sub->add_flag("--print-config", c.print_config, "print the resolved parameters and exit");
    for (const auto& p : s.params)
      sub->add_option("--" + p.key, raw[s.subcommand][p.key], p.help + " (" + type_name(p.type) + ", default " + p.fallback.dump() + ")");
  }
  std::string manifest_file, replay_out;
  int replay_line = 0;
  unsigned replay_threads = 0;
  bool replay_check = false;
  auto* rep = app.add_subcommand("replay", "rerun a recorded manifest and compare output digests");
  rep->add_option("--manifest", manifest_file, "manifest.jsonl to replay")->required();
  rep->add_option("--line", replay_line, "1-based line of the manifest file (default: last)");
  rep->add_option("--out", replay_out, "output directory for the rerun");
  rep->add_option("--threads", replay_threads, "cap on worker threads");
  rep->add_flag("--check", replay_check, "exit 4 unless every digest matches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (rep->parsed()) return replay(manifest_file, replay_line, output_dir(replay_out), thread_cap(replay_threads), replay_check, out);
    for (const auto& s : schemas()) {
      auto* sub = app.get_subcommand(s.subcommand);
      if (!sub->parsed()) continue;
      const Common& c = common[s.subcommand];
      json params = s.defaults();
      std::uint64_t seed = c.seed;
      if (!c.config.empty()) {
        json file = read_config(c.config);
        if (file.is_object() && file.contains("seed")) {
          if (!file["seed"].is_number_unsigned()) throw ConfigError("seed", "expected non-negative integer");
          if (sub->count("--seed") == 0) seed = file["seed"].get<std::uint64_t>();
          file.erase("seed");
        }
        overlay(s, params, file, "config file " + c.config);
      }
      json flags = json::object();
      for (const auto& p : s.params)
        if (sub->count("--" + p.key)) flags[p.key] = parse_flag(p, raw[s.subcommand][p.key]);
      overlay(s, params, flags, "command line");
      if (c.print_config) {
        json shown = params;
        shown["seed"] = seed;
        out << shown.dump(2) << '\n';
        return kExitOk;
      }
      return execute(s.subcommand, params, seed, output_dir(c.out), thread_cap(c.threads), c.check, out);
    }
  } catch (const ConfigError& e) {
    fmt::print(err, "walkrg: configuration error: {}\n", e.what());
    return kExitConfig;
  } catch (const ConfigurationError& e) {
    fmt::print(err, "walkrg: configuration error in module {}: {}\n", e.module(), strip_module(e));
    return kExitConfig;
  } catch (const DomainError& e) {
    fmt::print(err, "walkrg: parameter outside the domain of module {}: {}\n", e.module(), strip_module(e));
    return kExitConfig;
  } catch (const walkrg::Error& e) {
    fmt::print(err, "walkrg: runtime error in module {}: {}\n", e.module(), strip_module(e));
    return kExitRuntime;
  } catch (const std::exception& e) {
    fmt::print(err, "walkrg: runtime error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace walkrg::cli
