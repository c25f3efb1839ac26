#include "phishscope/ocr_simplify.hpp"

#include <algorithm>

namespace phishscope {

namespace {

std::string join_lines(const std::vector<const OcrLine*>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i]->text;
  }
  return out;
}

bool utf8_boundary(const std::string& s, std::size_t pos) {
  return pos >= s.size() ||
         (static_cast<unsigned char>(s[pos]) & 0xC0) != 0x80;
}

// Longest prefix (on a character boundary) counting under budget.
std::string cut_to_fit(const std::string& text, int budget,
                       const TokenCounter& counter) {
  std::size_t len = text.size();
  while (len > 0) {
    while (len > 0 && !utf8_boundary(text, len)) --len;
    std::string prefix = text.substr(0, len);
    if (counter.count(prefix) < budget) return prefix;
    if (len == 0) break;
    --len;
  }
  return "";
}

}  // namespace

OcrSimplifyResult simplify_ocr(const std::vector<OcrLine>& lines, int budget,
                               const TokenCounter& counter) {
  std::vector<const OcrLine*> survivors;
  survivors.reserve(lines.size());
  for (const auto& line : lines) survivors.push_back(&line);

  OcrSimplifyResult result;
  while (true) {
    result.text = join_lines(survivors);
    if (counter.count(result.text) < budget) return result;
    if (survivors.empty()) {
      result.truncated = true;  // even empty output cannot satisfy the budget
      return result;
    }

    double min_height = survivors.front()->font_height;
    for (const auto* line : survivors)
      min_height = std::min(min_height, line->font_height);

    std::vector<const OcrLine*> kept;
    kept.reserve(survivors.size());
    for (const auto* line : survivors)
      if (line->font_height != min_height) kept.push_back(line);

    if (kept.empty()) {
      // Deleting the last tie group would empty the text: keep its first
      // line in reading order and cut the text itself to fit.
      result.truncated = true;
      result.text = cut_to_fit(survivors.front()->text, budget, counter);
      return result;
    }
    survivors = std::move(kept);
  }
}

}  // namespace phishscope
