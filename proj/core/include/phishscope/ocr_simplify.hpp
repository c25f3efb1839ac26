#pragma once

#include <string>
#include <vector>

#include "phishscope/snapshot.hpp"
#include "phishscope/token_budget.hpp"

namespace phishscope {

struct OcrSimplifyResult {
  std::string text;        // surviving lines joined by "\n", reading order
  bool truncated = false;  // final line had to be cut to fit
};

// While the joined text counts >= budget tokens, drop every line tied at the
// current minimum font_height, then re-check. If dropping the last tie group
// would empty the output, keep that group's first line in reading order and
// cut its text (at a UTF-8 boundary) until it fits, flagging truncation.
OcrSimplifyResult simplify_ocr(const std::vector<OcrLine>& lines, int budget,
                               const TokenCounter& counter);

}  // namespace phishscope
