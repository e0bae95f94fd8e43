#pragma once

#include <cstdint>
#include <string>
#include <tuple>

#include <maxparse/tree.hpp>

namespace maxparse {

enum class ActionKind : std::uint8_t { Tag, Chunk, Build, Check };

/// Start/Join/Other marks.  Chunk actions use all three; build actions only
/// Start and Join.
enum class Mark : std::uint8_t { Start, Join, Other };

struct Action {
  ActionKind kind = ActionKind::Tag;
  Mark mark = Mark::Other;
  bool yes = false;
  std::string label;

  static Action tag(std::string t) {
    Action a;
    a.kind = ActionKind::Tag;
    a.label = std::move(t);
    return a;
  }
  static Action chunk(Mark m, std::string l = std::string()) {
    Action a;
    a.kind = ActionKind::Chunk;
    a.mark = m;
    a.label = std::move(l);
    return a;
  }
  static Action chunk_start(std::string l) { return chunk(Mark::Start, std::move(l)); }
  static Action chunk_join(std::string l) { return chunk(Mark::Join, std::move(l)); }
  static Action chunk_other() { return chunk(Mark::Other); }
  static Action build(Mark m, std::string l) {
    Action a;
    a.kind = ActionKind::Build;
    a.mark = m;
    a.label = std::move(l);
    return a;
  }
  static Action build_start(std::string l) { return build(Mark::Start, std::move(l)); }
  static Action build_join(std::string l) { return build(Mark::Join, std::move(l)); }
  static Action check(bool yes) {
    Action a;
    a.kind = ActionKind::Check;
    a.yes = yes;
    return a;
  }

  friend bool operator==(const Action& a, const Action& b) {
    return a.kind == b.kind && a.mark == b.mark && a.yes == b.yes && a.label == b.label;
  }
  friend bool operator!=(const Action& a, const Action& b) { return !(a == b); }
  friend bool operator<(const Action& a, const Action& b) {
    return std::tie(a.kind, a.mark, a.yes, a.label) <
           std::tie(b.kind, b.mark, b.yes, b.label);
  }
};

inline const char* mark_name(Mark m) {
  switch (m) {
    case Mark::Start: return "Start";
    case Mark::Join: return "Join";
    default: return "Other";
  }
}

inline std::string encode(const Action& a) {
  switch (a.kind) {
    case ActionKind::Tag: return "TAG " + a.label;
    case ActionKind::Chunk:
      if (a.mark == Mark::Other) return "CHUNK Other";
      return std::string("CHUNK ") + mark_name(a.mark) + " " + a.label;
    case ActionKind::Build:
      return std::string("BUILD ") + mark_name(a.mark) + " " + a.label;
    default: return a.yes ? "CHECK Yes" : "CHECK No";
  }
}

inline Action decode_action(const std::string& text) {
  auto sp = text.find(' ');
  if (sp == std::string::npos) throw DataError("bad action: " + text);
  const std::string kind = text.substr(0, sp);
  const std::string rest = text.substr(sp + 1);
  if (kind == "TAG") {
    if (rest.empty()) throw DataError("bad action: " + text);
    return Action::tag(rest);
  }
  if (kind == "CHECK") {
    if (rest == "Yes") return Action::check(true);
    if (rest == "No") return Action::check(false);
    throw DataError("bad action: " + text);
  }
  if (kind == "CHUNK" && rest == "Other") return Action::chunk_other();
  auto sp2 = rest.find(' ');
  if (sp2 == std::string::npos) throw DataError("bad action: " + text);
  const std::string mark = rest.substr(0, sp2);
  const std::string label = rest.substr(sp2 + 1);
  if (label.empty() || (mark != "Start" && mark != "Join"))
    throw DataError("bad action: " + text);
  const Mark m = (mark == "Start") ? Mark::Start : Mark::Join;
  if (kind == "CHUNK") return Action::chunk(m, label);
  if (kind == "BUILD") return Action::build(m, label);
  throw DataError("bad action: " + text);
}

}  // namespace maxparse
