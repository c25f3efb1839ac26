#pragma once

#include <string>
#include <string_view>

#include "phishscope/token_budget.hpp"

namespace phishscope {

struct TruncationFlags {
  bool html = false;
  bool ocr = false;
};

struct PromptBundle {
  std::string text;  // full rendered prompt
  int url_tokens = 0;
  int html_tokens = 0;
  int ocr_tokens = 0;
  int template_tokens = 0;
  TruncationFlags truncation_flags;
};

// The built-in template, embedded at build time from the versioned resource
// file; byte-identical to that file.
const std::string& default_prompt_template();

// Loads an alternative template from disk and validates it contains each of
// the three placeholders exactly once. Errors: not_found, invalid_config.
std::string load_prompt_template(const std::string& path);

// Fencing hygiene: collapse every run of three or more backticks in a fenced
// payload to exactly two, so payloads can never break out of their block.
std::string neutralize_backtick_runs(std::string_view payload);

// Substitutes {URL}, {Browser-rendered HTML}, {OCR-extracted text}. Inputs
// are expected to be pre-simplified; the URL passes through unmodified (its
// token count is reported, not enforced). HTML and OCR payloads get backtick
// runs >= 3 collapsed to 2 before substitution.
PromptBundle build_prompt(const std::string& url,
                          const std::string& simplified_html,
                          const std::string& simplified_ocr,
                          const TokenCounter& counter,
                          TruncationFlags flags = {},
                          const std::string& template_text =
                              default_prompt_template());

}  // namespace phishscope
