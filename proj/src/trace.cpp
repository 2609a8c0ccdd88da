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

#include <array>
#include <cstdio>
#include <json.hpp>

#include "ipe/runtime.hpp"

namespace ipe {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 10> kKinds{{
    {EventKind::Sent, "Sent"},
    {EventKind::Delivered, "Delivered"},
    {EventKind::Handled, "Handled"},
    {EventKind::VarWrite, "VarWrite"},
    {EventKind::StatusChange, "StatusChange"},
    {EventKind::Discover, "Discover"},
    {EventKind::Probe, "Probe"},
    {EventKind::Invoke, "Invoke"},
    {EventKind::Cancel, "Cancel"},
    {EventKind::Response, "Response"},
}};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(EventKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "Sent";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKinds) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

std::string render_content_xml(const Content& c) {
  std::string out = "<content>";
  for (const auto& [k, v] : c.bindings) out += "<" + k + ">" + xml_escape(v) + "</" + k + ">";
  if (!c.body.empty()) out += "<body>" + xml_escape(c.body) + "</body>";
  out += "</content>";
  return out;
}

std::string payload_digest(std::string_view payload) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExecutionTrace::to_ndjson() const {
  std::string out;
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["tick"] = e.tick;
    j["kind"] = to_string(e.kind);
    j["performative"] = e.performative;
    j["sender"] = e.sender;
    j["receiver"] = e.receiver;
    j["conversation"] = e.conversation;
    j["correlation"] = e.correlation;
    j["digest"] = payload_digest(e.payload);
    j["msg"] = e.message_id;
    j["step"] = e.step;
    j["branch"] = e.branch;
    j["control"] = e.control;
    j["flow"] = e.flow;
    j["payload"] = e.payload;
    out += j.dump();
    out += '\n';
  }
  return out;
}

ExecutionTrace ExecutionTrace::from_ndjson(std::string_view text) {
  ExecutionTrace t;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "trace line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    try {
      TraceEvent e;
      e.tick = j.at("tick").get<std::uint64_t>();
      auto kind = event_kind_from_string(j.at("kind").get<std::string>());
      if (!kind) throw std::invalid_argument(where + ": unknown event kind");
      e.kind = *kind;
      e.performative = j.at("performative").get<std::string>();
      e.sender = j.at("sender").get<std::string>();
      e.receiver = j.at("receiver").get<std::string>();
      e.conversation = j.at("conversation").get<std::string>();
      e.correlation = j.at("correlation").get<std::string>();
      e.message_id = j.value("msg", std::uint64_t{0});
      e.step = j.value("step", std::string{});
      e.branch = j.value("branch", std::string{});
      e.control = j.value("control", false);
      e.flow = j.value("flow", std::string{});
      e.payload = j.value("payload", std::string{});
      if (j.at("digest").get<std::string>() != payload_digest(e.payload)) {
        throw std::invalid_argument(where + ": payload digest mismatch");
      }
      t.events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
  }
  return t;
}

std::optional<SessionStatus> ExecutionTrace::final_status() const {
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    if (it->kind != EventKind::StatusChange) continue;
    for (auto s : {SessionStatus::Running, SessionStatus::Completed, SessionStatus::Stuck,
                   SessionStatus::DeadlineExpired}) {
      if (to_string(s) == it->performative) return s;
    }
  }
  return std::nullopt;
}

}  // namespace ipe
