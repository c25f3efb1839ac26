#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace phishscope {

// Fixed per-section allocation of the 4096-token prompt window. Sections are
// independent hard caps, not a shared pool.
struct TokenBudget {
  int total = 4096;
  int template_tokens = 362;
  int html_max = 3000;
  int ocr_max = 500;
  int url_max = 234;

  bool consistent() const {
    return total >= 0 && template_tokens >= 0 && html_max >= 0 &&
           ocr_max >= 0 && url_max >= 0 &&
           template_tokens + html_max + ocr_max + url_max == total;
  }
};

TokenBudget default_budget();

// Pure, shareable token-counting scheme. Implementations must satisfy:
//   count("") == 0; deterministic; count(a+b) <= count(a) + count(b) + 1.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual int count(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

int count_tokens(const TokenCounter& counter, std::string_view text);

// Reference scheme: ceil(utf8_byte_length / 4). Registered as "bytes4".
std::shared_ptr<const TokenCounter> make_reference_counter();

// Resolve a counter by name: "bytes4" (reference) or "vocab:<path>" which
// loads a newline-separated vocabulary file and counts via greedy
// longest-match segmentation (adapter slot for an exact BPE scheme supplied
// as a data file). Throws Error(Errc::invalid_config) for unknown names or
// unreadable vocabulary files.
std::shared_ptr<const TokenCounter> make_counter(const std::string& name);

}  // namespace phishscope
