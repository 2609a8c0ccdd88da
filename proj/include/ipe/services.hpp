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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ipe {

/// Seeded generator shared by the scheduler and service stubs. Draws are
/// derived from raw 64-bit outputs so sequences match across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  [[nodiscard]] const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

using AttributeValue = std::variant<double, std::string>;
using Attributes = std::map<std::string, AttributeValue>;

struct StubBehavior {
  std::string response;
  std::uint32_t latency = 1;
  double failure_probability = 0.0;

  friend bool operator==(const StubBehavior&, const StubBehavior&) = default;
};

/// Response table of an in-process service endpoint. Lookup falls back to
/// the "*" entry when the request kind has no row of its own.
struct ServiceStub {
  std::map<std::string, StubBehavior> behaviors;

  [[nodiscard]] const StubBehavior* lookup(std::string_view kind) const;

  friend bool operator==(const ServiceStub&, const ServiceStub&) = default;
};

struct ServiceDescription {
  std::string id;
  std::string name;
  std::set<std::string> keywords;
  Attributes attributes;
  ServiceStub stub;

  friend bool operator==(const ServiceDescription&, const ServiceDescription&) = default;
};

/// Catalogue of discoverable services, keyed by id. Reads may run
/// concurrently; mutations take an exclusive lock.
class Registry {
 public:
  Registry() = default;
  Registry(const Registry& other);
  Registry& operator=(const Registry& other);

  /// Throws ServiceError("DUPLICATE_ID") when the id is taken, or
  /// ServiceError("INVALID") for empty ids/keywords or bad stub tables.
  std::string register_service(ServiceDescription desc);

  [[nodiscard]] std::vector<ServiceDescription> discover(const std::set<std::string>& criteria) const;
  [[nodiscard]] std::optional<ServiceDescription> find(std::string_view id) const;
  [[nodiscard]] std::vector<ServiceDescription> all() const;
  [[nodiscard]] std::size_t size() const;

  friend bool operator==(const Registry& a, const Registry& b);

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, ServiceDescription, std::less<>> services_;
};

/// JSON registry document; see README for the schema.
Registry load_registry(const std::string& path);
Registry parse_registry(std::string_view json_text);
std::string registry_to_json(const Registry& registry);
void save_registry(const Registry& registry, const std::string& path);

struct AttributeProbe {
  bool available = true;
  Attributes attributes;
};

/// Probes every description for its attributes. With an Rng, each probe may
/// fail per the stub's "probe" (or "*") failure probability, marking the
/// entry unavailable. Throws ServiceError("UNKNOWN_ID") for ids absent from
/// the registry.
std::map<std::string, AttributeProbe> fetch_attributes(const Registry& registry,
                                                       const std::vector<ServiceDescription>& descriptions,
                                                       Rng* rng = nullptr);

enum class SelectionPolicy { MinCost, First };

std::string_view to_string(SelectionPolicy p);
std::optional<SelectionPolicy> policy_from_string(std::string_view s);

/// MinCost: least numeric "cost", ties broken by id; candidates without a
/// numeric cost are skipped. First: lowest id. Unavailable probes are never
/// chosen. Throws ServiceError("NO_CANDIDATES").
std::string select_service(const std::map<std::string, AttributeProbe>& candidates, SelectionPolicy policy);

/// Candidate ids in the order retries walk them under `policy`.
std::vector<std::string> selection_order(const std::map<std::string, AttributeProbe>& candidates,
                                         SelectionPolicy policy);

struct InvocationOutcome {
  std::string chosen;
  bool failed = false;
  std::string response;
  std::uint32_t latency = 0;
  std::vector<std::string> cancel_notices;
};

/// One invocation round: an invoke to `chosen` and a cancel to each of
/// `others`, all issued together. The stub's failure draw uses `rng`.
InvocationOutcome invoke_parallel(const Registry& registry, const std::string& chosen,
                                  const std::vector<std::string>& others, std::string_view request_kind, Rng& rng);

}  // namespace ipe
