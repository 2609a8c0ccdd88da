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

#include <algorithm>
#include <limits>
#include <sstream>

#include "ipe/cpn.hpp"

namespace ipe {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Send: return "send";
    case Phase::Receive: return "receive";
    case Phase::Rendezvous: return "rendezvous";
    case Phase::Fork: return "fork";
    case Phase::Join: return "join";
    case Phase::Choice: return "choice";
  }
  return "send";
}

std::string_view to_string(PlaceKind k) {
  switch (k) {
    case PlaceKind::RoleState: return "RoleState";
    case PlaceKind::MessageBuffer: return "MessageBuffer";
    case PlaceKind::Control: return "Control";
  }
  return "Control";
}

std::optional<std::size_t> ColoredPetriNet::place_index(std::string_view id) const {
  auto it = std::lower_bound(places.begin(), places.end(), id,
                             [](const Place& p, std::string_view v) { return p.id < v; });
  if (it != places.end() && it->id == id) return static_cast<std::size_t>(it - places.begin());
  // Hand-built nets need not be sorted.
  for (std::size_t i = 0; i < places.size(); ++i) {
    if (places[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> ColoredPetriNet::transition_index(std::string_view id) const {
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t ColoredPetriNet::count_places(PlaceKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(places.begin(), places.end(), [&](const Place& p) { return p.kind == kind; }));
}

void ColoredPetriNet::check_well_formed() const {
  std::vector<bool> has_in(transitions.size()), has_out(transitions.size());
  for (const auto& a : arcs) {
    if (a.place >= places.size() || a.transition >= transitions.size()) {
      throw NetError("arc endpoint does not exist");
    }
    if (a.weight < 1) throw NetError("arc weight must be >= 1");
    (a.input ? has_in : has_out)[a.transition] = true;
  }
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    if (!has_in[t] || !has_out[t]) {
      throw NetError("transition '" + transitions[t].id + "' needs at least one input and one output arc");
    }
  }
  if (initial.size() != places.size()) throw NetError("initial marking width differs from place count");
  for (const auto& f : finals) {
    if (f.size() != places.size()) throw NetError("final marking width differs from place count");
  }
}

FiringRule::FiringRule(const ColoredPetriNet& net)
    : inputs_(net.transitions.size()), outputs_(net.transitions.size()), guard_ok_(net.transitions.size()) {
  for (const auto& a : net.arcs) {
    (a.input ? inputs_ : outputs_)[a.transition].push_back({a.place, a.weight});
  }
  for (std::size_t t = 0; t < net.transitions.size(); ++t) {
    const auto& g = net.transitions[t].guard;
    guard_ok_[t] = !g || evaluate(*g, net.guard_env);
  }
}

bool FiringRule::enabled(const Marking& m, std::size_t t) const {
  if (!guard_ok_[t]) return false;
  // Multiple arcs to one place (read arcs) each need their own tokens only
  // when both are inputs, so accumulate per place.
  for (std::size_t i = 0; i < inputs_[t].size(); ++i) {
    const auto& e = inputs_[t][i];
    std::uint32_t need = e.weight;
    for (std::size_t j = 0; j < i; ++j) {
      if (inputs_[t][j].place == e.place) need += inputs_[t][j].weight;
    }
    if (m[e.place] < need) return false;
  }
  return true;
}

bool FiringRule::fire(const Marking& m, std::size_t t, Marking& out) const {
  if (!enabled(m, t)) return false;
  out = m;
  for (const auto& e : inputs_[t]) out[e.place] = static_cast<std::uint16_t>(out[e.place] - e.weight);
  for (const auto& e : outputs_[t]) {
    const std::uint32_t v = out[e.place] + e.weight;
    out[e.place] = static_cast<std::uint16_t>(std::min<std::uint32_t>(v, std::numeric_limits<std::uint16_t>::max()));
  }
  return true;
}

std::string describe_marking(const ColoredPetriNet& net, const Marking& m) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (std::size_t i = 0; i < m.size() && i < net.places.size(); ++i) {
    if (m[i] == 0) continue;
    os << (first ? "" : ", ") << net.places[i].id << '=' << m[i];
    first = false;
  }
  os << '}';
  return os.str();
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string export_pnml(const ColoredPetriNet& net) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n"
     << "  <net id=\"" << xml_escape(net.name.empty() ? "net" : net.name)
     << "\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n"
     << "    <name><text>" << xml_escape(net.name) << "</text></name>\n"
     << "    <page id=\"page0\">\n";
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    const auto& p = net.places[i];
    os << "      <place id=\"" << xml_escape(p.id) << "\">\n"
       << "        <name><text>" << xml_escape(p.id) << "</text></name>\n";
    if (i < net.initial.size() && net.initial[i] > 0) {
      os << "        <initialMarking><text>" << net.initial[i] << "</text></initialMarking>\n";
    }
    os << "        <toolspecific tool=\"ipeng\" version=\"1.0\">\n"
       << "          <kind>" << to_string(p.kind) << "</kind>\n";
    if (p.owner) os << "          <owner>" << xml_escape(*p.owner) << "</owner>\n";
    os << "          <color>" << (p.color == ColorDomain::Unit ? "unit" : "bindings") << "</color>\n"
       << "        </toolspecific>\n"
       << "      </place>\n";
  }
  for (const auto& t : net.transitions) {
    os << "      <transition id=\"" << xml_escape(t.id) << "\">\n"
       << "        <name><text>" << xml_escape(t.branch.empty() ? t.step : t.branch) << ' ' << to_string(t.phase)
       << "</text></name>\n"
       << "        <toolspecific tool=\"ipeng\" version=\"1.0\">\n"
       << "          <step>" << xml_escape(t.step) << "</step>\n"
       << "          <phase>" << to_string(t.phase) << "</phase>\n";
    if (!t.branch.empty()) os << "          <branch>" << xml_escape(t.branch) << "</branch>\n";
    for (const auto& s : t.subset) os << "          <subset>" << xml_escape(s) << "</subset>\n";
    if (t.guard) os << "          <guard>" << xml_escape(to_string(*t.guard)) << "</guard>\n";
    os << "        </toolspecific>\n"
       << "      </transition>\n";
  }
  for (std::size_t i = 0; i < net.arcs.size(); ++i) {
    const auto& a = net.arcs[i];
    const std::string& p = net.places[a.place].id;
    const std::string& t = net.transitions[a.transition].id;
    os << "      <arc id=\"a" << i << "\" source=\"" << xml_escape(a.input ? p : t) << "\" target=\""
       << xml_escape(a.input ? t : p) << "\">\n"
       << "        <inscription><text>" << a.weight << "</text></inscription>\n"
       << "      </arc>\n";
  }
  os << "    </page>\n";
  if (!net.finals.empty()) {
    os << "    <toolspecific tool=\"ipeng\" version=\"1.0\">\n";
    for (const auto& f : net.finals) {
      os << "      <finalMarking>";
      bool first = true;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0) continue;
        os << (first ? "" : " ") << xml_escape(net.places[i].id) << '=' << f[i];
        first = false;
      }
      os << "</finalMarking>\n";
    }
    os << "    </toolspecific>\n";
  }
  os << "  </net>\n</pnml>\n";
  return os.str();
}

std::string export_dot(const ColoredPetriNet& net) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(net.name) << "\" {\n  rankdir=LR;\n";
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    const auto& p = net.places[i];
    const unsigned tokens = i < net.initial.size() ? net.initial[i] : 0;
    os << "  \"" << dot_escape(p.id) << "\" [shape=circle, label=\"" << dot_escape(p.id);
    if (tokens > 0) os << "\\n" << std::string(std::min(tokens, 8u), '*');
    os << "\"];\n";
  }
  for (const auto& t : net.transitions) {
    os << "  \"" << dot_escape(t.id) << "\" [shape=box, label=\"" << dot_escape(t.id);
    if (t.guard) os << "\\n[" << dot_escape(to_string(*t.guard)) << "]";
    os << "\"];\n";
  }
  for (const auto& a : net.arcs) {
    const std::string& p = net.places[a.place].id;
    const std::string& t = net.transitions[a.transition].id;
    os << "  \"" << dot_escape(a.input ? p : t) << "\" -> \"" << dot_escape(a.input ? t : p) << "\" [label=\""
       << a.weight << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace

std::string export_net(const ColoredPetriNet& net, ExportFormat format) {
  return format == ExportFormat::Pnml ? export_pnml(net) : export_dot(net);
}

}  // namespace ipe
