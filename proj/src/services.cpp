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

#include "ipe/services.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>

namespace ipe {

const StubBehavior* ServiceStub::lookup(std::string_view kind) const {
  if (auto it = behaviors.find(std::string(kind)); it != behaviors.end()) return &it->second;
  if (auto it = behaviors.find("*"); it != behaviors.end()) return &it->second;
  return nullptr;
}

Registry::Registry(const Registry& other) {
  std::shared_lock lock(other.mutex_);
  services_ = other.services_;
}

Registry& Registry::operator=(const Registry& other) {
  if (this == &other) return *this;
  std::map<std::string, ServiceDescription, std::less<>> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.services_;
  }
  std::unique_lock lock(mutex_);
  services_ = std::move(copy);
  return *this;
}

std::string Registry::register_service(ServiceDescription desc) {
  if (desc.id.empty()) throw ServiceError("INVALID", "service id must be non-empty");
  if (desc.keywords.empty()) throw ServiceError("INVALID", "service '" + desc.id + "' needs at least one keyword");
  for (const auto& [kind, b] : desc.stub.behaviors) {
    if (!(b.failure_probability >= 0.0 && b.failure_probability <= 1.0)) {
      throw ServiceError("INVALID", "service '" + desc.id + "' behavior '" + kind +
                                        "' failure probability outside [0, 1]");
    }
  }
  std::unique_lock lock(mutex_);
  if (services_.contains(desc.id)) throw ServiceError("DUPLICATE_ID", "service id '" + desc.id + "' already registered");
  std::string id = desc.id;
  services_.emplace(id, std::move(desc));
  return id;
}

std::vector<ServiceDescription> Registry::discover(const std::set<std::string>& criteria) const {
  std::shared_lock lock(mutex_);
  std::vector<ServiceDescription> out;
  for (const auto& [id, d] : services_) {
    if (std::includes(d.keywords.begin(), d.keywords.end(), criteria.begin(), criteria.end())) out.push_back(d);
  }
  return out;
}

std::optional<ServiceDescription> Registry::find(std::string_view id) const {
  std::shared_lock lock(mutex_);
  if (auto it = services_.find(id); it != services_.end()) return it->second;
  return std::nullopt;
}

std::vector<ServiceDescription> Registry::all() const { return discover({}); }

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return services_.size();
}

bool operator==(const Registry& a, const Registry& b) { return a.all() == b.all(); }

// ---------------------------------------------------------------------------
// File format

namespace {

using nlohmann::json;

AttributeValue attribute_from_json(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ServiceError("INVALID", where + ": attribute values must be numbers or strings");
}

}  // namespace

Registry parse_registry(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ServiceError("PARSE", std::string("registry is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("services") || !doc["services"].is_array()) {
    throw ServiceError("PARSE", "registry document needs a top-level \"services\" array");
  }
  Registry reg;
  for (const auto& s : doc["services"]) {
    try {
      ServiceDescription d;
      d.id = s.at("id").get<std::string>();
      d.name = s.value("name", d.id);
      for (const auto& k : s.at("keywords")) d.keywords.insert(k.get<std::string>());
      if (s.contains("attributes")) {
        for (const auto& [k, v] : s["attributes"].items()) d.attributes[k] = attribute_from_json(v, d.id + "." + k);
      }
      if (s.contains("stub")) {
        for (const auto& [kind, b] : s["stub"].items()) {
          StubBehavior sb;
          sb.response = b.value("response", std::string{});
          const auto latency = b.value("latency", std::int64_t{1});
          if (latency < 0) throw ServiceError("INVALID", d.id + ": stub latency must be >= 0");
          sb.latency = static_cast<std::uint32_t>(latency);
          sb.failure_probability = b.value("failure", 0.0);
          d.stub.behaviors[kind] = std::move(sb);
        }
      }
      reg.register_service(std::move(d));
    } catch (const json::exception& e) {
      throw ServiceError("PARSE", std::string("malformed service entry: ") + e.what());
    }
  }
  return reg;
}

Registry load_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ServiceError("IO", "cannot read registry file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_registry(ss.str());
}

std::string registry_to_json(const Registry& registry) {
  nlohmann::ordered_json doc;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : registry.all()) {
    nlohmann::ordered_json s;
    s["id"] = d.id;
    s["name"] = d.name;
    s["keywords"] = d.keywords;
    nlohmann::ordered_json attrs = nlohmann::ordered_json::object();
    for (const auto& [k, v] : d.attributes) {
      if (const auto* num = std::get_if<double>(&v)) {
        attrs[k] = *num;
      } else {
        attrs[k] = std::get<std::string>(v);
      }
    }
    s["attributes"] = std::move(attrs);
    nlohmann::ordered_json stub = nlohmann::ordered_json::object();
    for (const auto& [kind, b] : d.stub.behaviors) {
      stub[kind] = {{"response", b.response}, {"latency", b.latency}, {"failure", b.failure_probability}};
    }
    s["stub"] = std::move(stub);
    arr.push_back(std::move(s));
  }
  doc["services"] = std::move(arr);
  return doc.dump(2) + "\n";
}

void save_registry(const Registry& registry, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ServiceError("IO", "cannot write registry file '" + path + "'");
  out << registry_to_json(registry);
}

// ---------------------------------------------------------------------------
// Discovery flow

std::map<std::string, AttributeProbe> fetch_attributes(const Registry& registry,
                                                       const std::vector<ServiceDescription>& descriptions,
                                                       Rng* rng) {
  std::map<std::string, AttributeProbe> out;
  for (const auto& d : descriptions) {
    auto stored = registry.find(d.id);
    if (!stored) throw ServiceError("UNKNOWN_ID", "service '" + d.id + "' is not in the registry");
    AttributeProbe probe;
    probe.attributes = stored->attributes;
    if (rng != nullptr) {
      if (const auto* b = stored->stub.lookup("probe"); b && rng->unit() < b->failure_probability) {
        probe.available = false;
      }
    }
    out.emplace(d.id, std::move(probe));
  }
  return out;
}

std::string_view to_string(SelectionPolicy p) { return p == SelectionPolicy::MinCost ? "min-cost" : "first"; }

std::optional<SelectionPolicy> policy_from_string(std::string_view s) {
  if (s == "min-cost") return SelectionPolicy::MinCost;
  if (s == "first") return SelectionPolicy::First;
  return std::nullopt;
}

std::vector<std::string> selection_order(const std::map<std::string, AttributeProbe>& candidates,
                                         SelectionPolicy policy) {
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [id, probe] : candidates) {
    if (!probe.available) continue;
    if (policy == SelectionPolicy::First) {
      ranked.emplace_back(0.0, id);
      continue;
    }
    auto it = probe.attributes.find("cost");
    if (it == probe.attributes.end()) continue;
    if (const auto* cost = std::get_if<double>(&it->second)) ranked.emplace_back(*cost, id);
  }
  std::stable_sort(ranked.begin(), ranked.end());
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(std::move(r.second));
  return out;
}

std::string select_service(const std::map<std::string, AttributeProbe>& candidates, SelectionPolicy policy) {
  if (candidates.empty()) throw ServiceError("NO_CANDIDATES", "no candidate services to select from");
  auto order = selection_order(candidates, policy);
  if (order.empty()) {
    throw ServiceError("NO_CANDIDATES", policy == SelectionPolicy::MinCost
                                            ? "no available candidate carries a numeric cost attribute"
                                            : "no available candidate");
  }
  return order.front();
}

InvocationOutcome invoke_parallel(const Registry& registry, const std::string& chosen,
                                  const std::vector<std::string>& others, std::string_view request_kind, Rng& rng) {
  if (std::find(others.begin(), others.end(), chosen) != others.end()) {
    throw ServiceError("INVALID", "chosen service '" + chosen + "' also appears among the cancelled ones");
  }
  auto target = registry.find(chosen);
  if (!target) throw ServiceError("UNKNOWN_ID", "service '" + chosen + "' is not in the registry");
  for (const auto& o : others) {
    if (!registry.find(o)) throw ServiceError("UNKNOWN_ID", "service '" + o + "' is not in the registry");
  }
  InvocationOutcome out;
  out.chosen = chosen;
  out.cancel_notices = others;
  const StubBehavior* b = target->stub.lookup(request_kind);
  if (b == nullptr) {
    out.failed = true;
    out.latency = 1;
    out.response = "no behavior for request '" + std::string(request_kind) + "'";
    return out;
  }
  out.latency = b->latency;
  if (rng.unit() < b->failure_probability) {
    out.failed = true;
    out.response = "service failure";
  } else {
    out.response = b->response;
  }
  return out;
}

}  // namespace ipe
