#include "phishscope/verdict.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <vector>

#include <nlohmann/json.hpp>

#include "phishscope/error.hpp"

namespace phishscope {

namespace {

using nlohmann::json;

constexpr std::size_t kExcerptLimit = 240;

std::string ascii_lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

std::string head_excerpt(const std::string& raw) {
  if (raw.size() <= kExcerptLimit) return raw;
  std::size_t len = kExcerptLimit;
  while (len > 0 && (static_cast<unsigned char>(raw[len]) & 0xC0) == 0x80) --len;
  return raw.substr(0, len);
}

// ---- candidate extraction ------------------------------------------------

std::vector<std::string> fenced_blocks(const std::string& text) {
  std::vector<std::size_t> delims;
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string::npos) {
    delims.push_back(pos);
    pos += 3;
  }
  std::vector<std::string> blocks;
  for (std::size_t i = 0; i + 1 < delims.size(); i += 2) {
    std::size_t start = delims[i] + 3;
    blocks.push_back(text.substr(start, delims[i + 1] - start));
  }
  if (delims.size() % 2 == 1)  // unterminated trailing fence
    blocks.push_back(text.substr(delims.back() + 3));
  // Drop an optional language tag on the opening line ("```json").
  for (auto& block : blocks) {
    std::size_t p = 0;
    while (p < block.size() && std::isalpha(static_cast<unsigned char>(block[p])))
      ++p;
    if (p > 0 && p < block.size() && block[p] == '\n' &&
        block.find('{') != std::string::npos)
      block.erase(0, p + 1);
  }
  return blocks;
}

// Top-level brace-balanced spans, tracking double-quoted strings.
std::vector<std::string> brace_spans(const std::string& text) {
  std::vector<std::string> spans;
  int depth = 0;
  std::size_t start = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"' && depth > 0) {
      in_string = true;
    } else if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}') {
      if (depth > 0 && --depth == 0)
        spans.push_back(text.substr(start, i - start + 1));
    }
  }
  return spans;
}

// ---- field extraction from a parsed object -------------------------------

std::optional<int> score_from(const json& v) {
  long long n = 0;
  if (v.is_number_integer()) {
    n = v.get<long long>();
  } else if (v.is_number_float()) {
    double d = v.get<double>();
    if (d != static_cast<long long>(d)) return std::nullopt;
    n = static_cast<long long>(d);
  } else if (v.is_string()) {
    try {
      std::size_t used = 0;
      n = std::stoll(v.get<std::string>(), &used);
      if (used != v.get<std::string>().size()) return std::nullopt;
    } catch (...) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  if (n < 0 || n > 10) return std::nullopt;
  return static_cast<int>(n);
}

std::optional<std::string> brands_from(const json& v) {
  std::string value;
  if (v.is_string()) {
    value = v.get<std::string>();
  } else if (v.is_array()) {
    for (const auto& item : v) {
      if (!item.is_string()) continue;
      if (!value.empty()) value += ", ";
      value += item.get<std::string>();
    }
  } else {
    return std::nullopt;
  }
  if (value.empty() || ascii_lower(value) == "none") return std::nullopt;
  return value;
}

TriState tri_from_token(std::string token) {
  token = ascii_lower(std::move(token));
  if (token == "true" || token == "yes") return TriState::yes;
  if (token == "false" || token == "no") return TriState::no;
  return TriState::unknown;
}

TriState tri_from(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? TriState::yes : TriState::no;
  if (v.is_string()) return tri_from_token(v.get<std::string>());
  return TriState::unknown;
}

// Requires all four keys; fills the verdict and returns true on success.
bool extract_object(const std::string& candidate, Verdict* out) {
  json doc = json::parse(candidate, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return false;
  for (const char* key :
       {"phishing_score", "brands", "phishing", "suspicious_domain"})
    if (!doc.contains(key)) return false;
  out->phishing_score = score_from(doc["phishing_score"]);
  out->brands = brands_from(doc["brands"]);
  out->phishing = tri_from(doc["phishing"]);
  out->suspicious_domain = tri_from(doc["suspicious_domain"]);
  out->raw_excerpt = candidate;
  return true;
}

bool run_structured_rung(const std::string& text, Verdict* out) {
  std::vector<std::string> candidates = fenced_blocks(text);
  std::vector<std::string> spans = brace_spans(text);
  // Last fenced block first, then brace-balanced objects from last to first.
  std::reverse(candidates.begin(), candidates.end());
  for (auto it = spans.rbegin(); it != spans.rend(); ++it)
    candidates.push_back(*it);
  for (const auto& candidate : candidates)
    if (extract_object(candidate, out)) return true;
  return false;
}

std::string normalize_lenient(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) out.push_back(c == '\'' ? '"' : c);
  static const std::regex trailing_comma(R"(,(\s*[}\]]))");
  out = std::regex_replace(out, trailing_comma, "$1");
  static const std::regex py_true(R"(\bTrue\b)");
  static const std::regex py_false(R"(\bFalse\b)");
  static const std::regex py_none(R"(\bNone\b)");
  out = std::regex_replace(out, py_true, "true");
  out = std::regex_replace(out, py_false, "false");
  out = std::regex_replace(out, py_none, "null");
  return out;
}

// ---- heuristic rung -------------------------------------------------------

bool last_match(const std::string& text, const std::regex& re, std::string* value) {
  bool found = false;
  auto begin = std::sregex_iterator(text.begin(), text.end(), re);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    *value = (*it)[1].str();
    found = true;
  }
  return found;
}

bool run_heuristic_rung(const std::string& text, Verdict* out) {
  static const std::regex score_re(
      R"(phishing_score["'`]?\s*[:=]\s*["']?(-?\d+))",
      std::regex::icase);
  static const std::regex brands_re(
      R"(brands["'`]?\s*[:=]\s*(?:["']([^"'\r\n]*)["']|([A-Za-z0-9][^,\r\n}]*)))",
      std::regex::icase);
  static const std::regex phishing_re(
      R"(phishing(?!_score)["'`]?\s*(?:[:=]|is|as)\s*["']?(true|false|yes|no|unknown)\b)",
      std::regex::icase);
  static const std::regex suspicious_re(
      R"(suspicious_domain["'`]?\s*(?:[:=]|is|as)\s*["']?(true|false|yes|no|unknown)\b)",
      std::regex::icase);

  bool any = false;
  std::string value;

  if (last_match(text, score_re, &value)) {
    any = true;
    try {
      long long n = std::stoll(value);
      if (n >= 0 && n <= 10) out->phishing_score = static_cast<int>(n);
    } catch (...) {
    }
  }

  {
    bool found = false;
    auto begin = std::sregex_iterator(text.begin(), text.end(), brands_re);
    std::string brands;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      brands = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
      found = true;
    }
    if (found) {
      any = true;
      while (!brands.empty() && (brands.back() == ' ' || brands.back() == '.'))
        brands.pop_back();
      if (!brands.empty() && ascii_lower(brands) != "none") out->brands = brands;
    }
  }

  if (last_match(text, phishing_re, &value)) {
    any = true;
    out->phishing = tri_from_token(value);
  }
  if (last_match(text, suspicious_re, &value)) {
    any = true;
    out->suspicious_domain = tri_from_token(value);
  }
  return any;
}

}  // namespace

std::string_view tri_state_name(TriState v) {
  switch (v) {
    case TriState::yes: return "true";
    case TriState::no: return "false";
    default: return "unknown";
  }
}

std::string_view parse_mode_name(ParseMode m) {
  switch (m) {
    case ParseMode::strict: return "strict";
    case ParseMode::lenient: return "lenient";
    case ParseMode::heuristic: return "heuristic";
    default: return "failed";
  }
}

Verdict parse_response(const std::string& raw) {
  Verdict v;

  if (run_structured_rung(raw, &v)) {
    v.parse_mode = ParseMode::strict;
    return v;
  }
  if (run_structured_rung(normalize_lenient(raw), &v)) {
    v.parse_mode = ParseMode::lenient;
    return v;
  }
  v = Verdict{};
  if (run_heuristic_rung(raw, &v)) {
    v.parse_mode = ParseMode::heuristic;
    v.raw_excerpt = head_excerpt(raw);
    return v;
  }
  v = Verdict{};
  v.parse_mode = ParseMode::failed;
  v.raw_excerpt = head_excerpt(raw);
  return v;
}

Label classify(const Verdict& verdict) {
  return (verdict.phishing == TriState::yes ||
          verdict.suspicious_domain == TriState::yes)
             ? Label::phishing
             : Label::non_phishing;
}

Label classify_by_score(const Verdict& verdict, int threshold) {
  return (verdict.phishing_score && *verdict.phishing_score >= threshold)
             ? Label::phishing
             : Label::non_phishing;
}

std::string verdict_to_json(const Verdict& verdict) {
  json doc;
  if (verdict.phishing_score)
    doc["phishing_score"] = *verdict.phishing_score;
  else
    doc["phishing_score"] = nullptr;
  doc["brands"] = verdict.brands ? *verdict.brands : "None";
  auto tri = [](TriState v) -> json {
    if (v == TriState::unknown) return "unknown";
    return v == TriState::yes;
  };
  doc["phishing"] = tri(verdict.phishing);
  doc["suspicious_domain"] = tri(verdict.suspicious_domain);
  doc["parse_mode"] = std::string(parse_mode_name(verdict.parse_mode));
  return doc.dump(2) + "\n";
}

Verdict verdict_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(Errc::malformed_snapshot, "verdict file is not a JSON object",
                "verdict");
  Verdict v;
  if (auto it = doc.find("phishing_score");
      it != doc.end() && !it->is_null())
    v.phishing_score = score_from(*it);
  if (auto it = doc.find("brands"); it != doc.end() && !it->is_null())
    v.brands = brands_from(*it);
  if (auto it = doc.find("phishing"); it != doc.end()) v.phishing = tri_from(*it);
  if (auto it = doc.find("suspicious_domain"); it != doc.end())
    v.suspicious_domain = tri_from(*it);
  if (auto it = doc.find("parse_mode"); it != doc.end() && it->is_string()) {
    const std::string mode = it->get<std::string>();
    if (mode == "strict") v.parse_mode = ParseMode::strict;
    else if (mode == "lenient") v.parse_mode = ParseMode::lenient;
    else if (mode == "heuristic") v.parse_mode = ParseMode::heuristic;
    else v.parse_mode = ParseMode::failed;
  }
  return v;
}

}  // namespace phishscope
