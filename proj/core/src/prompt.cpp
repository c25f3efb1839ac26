#include "phishscope/prompt.hpp"

#include <fstream>
#include <sstream>

#include "phishscope/error.hpp"
#include "prompt_template_data.hpp"

namespace phishscope {

namespace {

constexpr std::string_view kUrlSlot = "{URL}";
constexpr std::string_view kHtmlSlot = "{Browser-rendered HTML}";
constexpr std::string_view kOcrSlot = "{OCR-extracted text}";

int count_occurrences(std::string_view text, std::string_view needle) {
  int n = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

void validate_template(const std::string& text, const std::string& origin) {
  for (std::string_view slot : {kUrlSlot, kHtmlSlot, kOcrSlot}) {
    if (count_occurrences(text, slot) != 1)
      throw Error(Errc::invalid_config,
                  "prompt template must contain exactly one '" +
                      std::string(slot) + "' placeholder",
                  origin);
  }
}

std::string replace_once(std::string text, std::string_view slot,
                         std::string_view value) {
  std::size_t pos = text.find(slot);
  text.replace(pos, slot.size(), value);
  return text;
}

}  // namespace

const std::string& default_prompt_template() {
  static const std::string text = [] {
    std::string t(detail::kPromptTemplate);
    validate_template(t, "built-in");
    return t;
  }();
  return text;
}

std::string load_prompt_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "prompt template file not found", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  validate_template(text, path);
  return text;
}

std::string neutralize_backtick_runs(std::string_view payload) {
  std::string out;
  out.reserve(payload.size());
  std::size_t i = 0;
  while (i < payload.size()) {
    if (payload[i] != '`') {
      out.push_back(payload[i]);
      ++i;
      continue;
    }
    std::size_t run = 0;
    while (i + run < payload.size() && payload[i + run] == '`') ++run;
    out.append(run >= 3 ? 2 : run, '`');
    i += run;
  }
  return out;
}

PromptBundle build_prompt(const std::string& url,
                          const std::string& simplified_html,
                          const std::string& simplified_ocr,
                          const TokenCounter& counter, TruncationFlags flags,
                          const std::string& template_text) {
  validate_template(template_text, "caller-supplied");

  const std::string html_payload = neutralize_backtick_runs(simplified_html);
  const std::string ocr_payload = neutralize_backtick_runs(simplified_ocr);

  PromptBundle bundle;
  bundle.truncation_flags = flags;
  bundle.template_tokens = counter.count(template_text);
  bundle.url_tokens = counter.count(url);
  bundle.html_tokens = counter.count(html_payload);
  bundle.ocr_tokens = counter.count(ocr_payload);

  // Substitute back-to-front so a payload that itself contains a placeholder
  // string can never capture a later substitution.
  std::string text = template_text;
  text = replace_once(std::move(text), kOcrSlot, ocr_payload);
  text = replace_once(std::move(text), kHtmlSlot, html_payload);
  text = replace_once(std::move(text), kUrlSlot, url);
  bundle.text = std::move(text);
  return bundle;
}

}  // namespace phishscope
