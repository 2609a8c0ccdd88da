// Copyright 2026 The ipeng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ipe: command-line front end over the C API.
//
// Exit codes: 0 success, 1 protocol-level failure (findings, failed
// verification, unfinished simulation), 2 input error (unreadable file,
// syntax error, bad option), 3 verification bound exhausted, 4 simulation
// trace not conformant with the net.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "ipe/ipe.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitBound = 3;
constexpr int kExitNonConformant = 4;

struct StringDeleter {
  void operator()(char* s) const { ipe_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct ProtocolDeleter {
  void operator()(ipe_protocol* p) const { ipe_protocol_free(p); }
};
struct NetDeleter {
  void operator()(ipe_net* n) const { ipe_net_free(n); }
};
struct RegistryDeleter {
  void operator()(ipe_registry* r) const { ipe_registry_free(r); }
};
using Protocol = std::unique_ptr<ipe_protocol, ProtocolDeleter>;
using Net = std::unique_ptr<ipe_net, NetDeleter>;
using Registry = std::unique_ptr<ipe_registry, RegistryDeleter>;

int report(const std::string& context, ipe_status st) {
  std::cerr << "ipe: " << context << ": " << ipe_status_string(st);
  if (*ipe_last_error() != '\0') std::cerr << ": " << ipe_last_error();
  std::cerr << "\n";
  return st == IPE_ERR_PARSE || st == IPE_ERR_IO || st == IPE_ERR_ARGUMENT || st == IPE_ERR_SERVICE ? kExitInput
                                                                                                    : kExitFail;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::filesystem::path& path, const char* text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

/// Loads and syntax-checks a document; nullptr after printing the error.
Protocol load(const std::string& path, int& exit_code) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "ipe: cannot read '" << path << "'\n";
    exit_code = kExitInput;
    return nullptr;
  }
  ipe_protocol* p = nullptr;
  if (auto st = ipe_protocol_parse_document(text->data(), text->size(), &p); st != IPE_OK) {
    exit_code = report(path, st);
    return nullptr;
  }
  return Protocol(p);
}

/// Prints error findings to stderr and returns false when any exist.
bool check_valid(const ipe_protocol* p, bool quiet_ok) {
  int ok = 0;
  char* raw = nullptr;
  if (ipe_protocol_validate(p, &ok, &raw) != IPE_OK) return false;
  CString findings(raw);
  if (!ok) {
    std::cerr << findings.get();
  } else if (!quiet_ok) {
    std::cout << findings.get();
  }
  return ok != 0;
}

struct Options {
  std::string file;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 10000;
  std::uint64_t bounds_nodes = ipe_default_bounds().max_nodes;
  std::uint32_t bounds_tokens = ipe_default_bounds().max_tokens_per_place;
  std::string policy = "min-cost";
  std::uint32_t retries = 1;
  bool force = false;
  bool timing = false;
  std::string out_dir = ".";
  std::string out_file;
  std::string format;
  std::string registry;
};

ipe_bounds bounds_of(const Options& o) { return ipe_bounds{o.bounds_nodes, o.bounds_tokens}; }

int cmd_validate(const Options& o) {
  int code = kExitOk;
  auto p = load(o.file, code);
  if (!p) return code;
  return check_valid(p.get(), false) ? kExitOk : kExitFail;
}

int cmd_verify(const Options& o) {
  int code = kExitOk;
  auto p = load(o.file, code);
  if (!p) return code;
  if (!check_valid(p.get(), true)) return kExitFail;
  ipe_net* raw_net = nullptr;
  if (auto st = ipe_net_translate(p.get(), &raw_net); st != IPE_OK) return report("translate", st);
  Net net(raw_net);
  const ipe_bounds b = bounds_of(o);
  ipe_verify_result res{};
  char* raw = nullptr;
  if (auto st = ipe_verify(net.get(), &b, o.timing ? 1 : 0, &res, &raw); st != IPE_OK) return report("verify", st);
  CString json(raw);
  std::cout << json.get();
  if (!res.bounded) return kExitBound;
  return res.passed ? kExitOk : kExitFail;
}

int cmd_simulate(const Options& o) {
  int code = kExitOk;
  auto p = load(o.file, code);
  if (!p) return code;
  if (!check_valid(p.get(), true)) return kExitFail;
  Registry reg;
  if (!o.registry.empty()) {
    ipe_registry* raw = nullptr;
    if (auto st = ipe_registry_load(o.registry.c_str(), &raw); st != IPE_OK) return report(o.registry, st);
    reg.reset(raw);
  }
  ipe_sim_config cfg = ipe_default_sim_config();
  cfg.seed = o.seed;
  cfg.max_steps = o.max_steps;
  cfg.bounds = bounds_of(o);
  cfg.policy = o.policy == "first" ? IPE_POLICY_FIRST : IPE_POLICY_MIN_COST;
  cfg.retries = o.retries;
  cfg.force = o.force ? 1 : 0;
  cfg.registry = reg.get();

  ipe_sim_result res{};
  char* raw_trace = nullptr;
  char* raw_summary = nullptr;
  if (auto st = ipe_simulate(p.get(), &cfg, &res, &raw_trace, &raw_summary); st != IPE_OK) {
    return report("simulate", st);
  }
  CString trace(raw_trace);
  CString summary(raw_summary);
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  const std::filesystem::path dir(o.out_dir);
  if (!write_file(dir / "trace.ndjson", trace.get()) || !write_file(dir / "summary.json", summary.get())) {
    std::cerr << "ipe: cannot write results under '" << o.out_dir << "'\n";
    return kExitInput;
  }
  std::cout << summary.get();
  if (!res.conformant) return kExitNonConformant;
  return res.status == IPE_SESSION_COMPLETED ? kExitOk : kExitFail;
}

int cmd_export(const Options& o) {
  ipe_format fmt;
  if (o.format == "pnml") {
    fmt = IPE_FORMAT_PNML;
  } else if (o.format == "dot") {
    fmt = IPE_FORMAT_DOT;
  } else {
    std::cerr << "ipe: unknown export format '" << o.format << "' (expected pnml or dot)\n";
    return kExitInput;
  }
  int code = kExitOk;
  auto p = load(o.file, code);
  if (!p) return code;
  if (!check_valid(p.get(), true)) return kExitFail;
  ipe_net* raw_net = nullptr;
  if (auto st = ipe_net_translate(p.get(), &raw_net); st != IPE_OK) return report("translate", st);
  Net net(raw_net);
  char* raw = nullptr;
  if (auto st = ipe_net_export(net.get(), fmt, &raw); st != IPE_OK) return report("export", st);
  CString text(raw);
  if (o.out_file.empty()) {
    std::cout << text.get();
  } else if (!write_file(o.out_file, text.get())) {
    std::cerr << "ipe: cannot write '" << o.out_file << "'\n";
    return kExitInput;
  }
  return kExitOk;
}

void add_bounds(CLI::App* cmd, Options& o) {
  cmd->add_option("--bounds-nodes", o.bounds_nodes, "Maximum reachable markings to explore")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--bounds-tokens", o.bounds_tokens, "Maximum tokens per place")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interaction protocol engine: validate, verify, simulate and export protocols"};
  app.set_version_flag("--version", std::string(ipe_version()));
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check a protocol document for well-formedness");
  validate->add_option("file", o.file, "Protocol document")->required();

  auto* verify = app.add_subcommand("verify", "Translate to a Petri net and check its behavioural properties");
  verify->add_option("file", o.file, "Protocol document")->required();
  add_bounds(verify, o);
  verify->add_flag("--timing", o.timing, "Include elapsed time in the report");

  auto* simulate = app.add_subcommand("simulate", "Run the protocol with seeded agents and record a trace");
  simulate->add_option("file", o.file, "Protocol document")->required();
  simulate->add_option("--seed", o.seed, "Scheduler seed");
  simulate->add_option("--max-steps", o.max_steps, "Step budget")->check(CLI::PositiveNumber);
  simulate->add_option("--policy", o.policy, "Service selection policy")
      ->check(CLI::IsMember({"min-cost", "first"}));
  simulate->add_option("--retries", o.retries, "Further candidates tried after a failed invocation");
  simulate->add_option("--registry", o.registry, "Service registry JSON file");
  simulate->add_option("--out", o.out_dir, "Directory for trace.ndjson and summary.json");
  simulate->add_flag("--force", o.force, "Run even if verification did not pass");
  add_bounds(simulate, o);

  auto* exp = app.add_subcommand("export", "Write the translated net as PNML or DOT");
  exp->add_option("file", o.file, "Protocol document")->required();
  exp->add_option("--format", o.format, "pnml or dot")->required();
  exp->add_option("--out", o.out_file, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  if (validate->parsed()) return cmd_validate(o);
  if (verify->parsed()) return cmd_verify(o);
  if (simulate->parsed()) return cmd_simulate(o);
  return cmd_export(o);
}
