#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "params.hpp"

namespace walkrg::cli {

json RunManifest::to_json() const {
  json out = json::array();
  for (const auto& o : outputs) out.push_back({{"file", o.file}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  return {{"subcommand", subcommand},
          {"params", params},
          {"seed", seed},
          {"code_version", code_version},
          {"started", started},
          {"finished", finished},
          {"threads", threads},
          {"check", {{"requested", check_requested}, {"passed", check_passed}}},
          {"outputs", out}};
}

RunManifest RunManifest::from_json(const json& j) {
  static const std::vector<std::string> required{"subcommand", "params", "seed",  "code_version", "started",
                                                 "finished",   "threads", "check", "outputs"};
  if (!j.is_object()) throw ConfigError("manifest", "expected a JSON object");
  for (const auto& k : required)
    if (!j.contains(k)) throw ConfigError("manifest", "missing field '" + k + "'");
  for (const auto& [k, v] : j.items())
    if (std::find(required.begin(), required.end(), k) == required.end())
      throw ConfigError("manifest", "unknown field '" + k + "'");
  try {
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.params = j.at("params");
    if (!m.params.is_object()) throw ConfigError("manifest", "params must be an object");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.code_version = j.at("code_version").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.threads = j.at("threads").get<unsigned>();
    m.check_requested = j.at("check").at("requested").get<bool>();
    m.check_passed = j.at("check").at("passed").get<bool>();
    for (const auto& o : j.at("outputs"))
      m.outputs.push_back({o.at("file").get<std::string>(), o.at("sha256").get<std::string>(), o.at("bytes").get<std::uint64_t>()});
    return m;
  } catch (const json::exception& e) {
    throw ConfigError("manifest", e.what());
  }
}

RunManifest RunManifest::from_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest", std::string("not valid JSON: ") + e.what());
  }
  return from_json(j);
}

std::string sha256_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)), ms);
}

void append_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::ofstream out(dir / "manifest.jsonl", std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.jsonl").string());
  out << m.to_line() << '\n';
}

std::vector<RunManifest> read_manifests(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("manifest", "cannot read " + file.string());
  std::vector<RunManifest> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(RunManifest::from_line(line));
  if (out.empty()) throw ConfigError("manifest", file.string() + " holds no manifests");
  return out;
}

}  // namespace walkrg::cli
