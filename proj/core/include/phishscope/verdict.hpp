#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "phishscope/snapshot.hpp"

namespace phishscope {

// Three-way model answer; the prompt explicitly permits "unknown".
enum class TriState { yes, no, unknown };

enum class ParseMode { strict, lenient, heuristic, failed };

std::string_view tri_state_name(TriState v);    // "true" / "false" / "unknown"
std::string_view parse_mode_name(ParseMode m);

struct Verdict {
  std::optional<int> phishing_score;    // 0..10; out-of-range values dropped
  std::optional<std::string> brands;    // "None"/null map to absent
  TriState phishing = TriState::unknown;
  TriState suspicious_domain = TriState::unknown;
  ParseMode parse_mode = ParseMode::failed;
  // strict/lenient: the object span that parsed; otherwise the head of the
  // raw text (UTF-8-safe, bounded).
  std::string raw_excerpt;
};

// Never throws; failures are encoded in parse_mode. Ladder:
//  strict    — last fenced block, else last brace-balanced object, parsed as
//              standard JSON; requires all four keys present.
//  lenient   — same extraction after normalizing single quotes, trailing
//              commas, and Python-style True/False/None literals.
//  heuristic — per-key regex scan over the whole text; any key hit counts.
//  failed    — no key found anywhere.
Verdict parse_response(const std::string& raw);

// Key rule: phishing iff either tri-state is true (unknown = not-true).
Label classify(const Verdict& verdict);

// Score rule: phishing iff a score is present and >= threshold.
Label classify_by_score(const Verdict& verdict, int threshold);

// Documented persistence form: the four keys, absent score as null, absent
// brands as "None", tri-states as true/false/"unknown", plus parse_mode.
std::string verdict_to_json(const Verdict& verdict);

// Reads verdict_to_json output. Errors: malformed_snapshot on bad input.
Verdict verdict_from_json(const std::string& text);

}  // namespace phishscope
