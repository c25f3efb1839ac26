#include "phishscope/token_budget.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>
#include <vector>

#include "phishscope/error.hpp"

namespace phishscope {

TokenBudget default_budget() { return TokenBudget{}; }

int count_tokens(const TokenCounter& counter, std::string_view text) {
  return counter.count(text);
}

namespace {

class Bytes4Counter final : public TokenCounter {
 public:
  int count(std::string_view text) const override {
    return static_cast<int>((text.size() + 3) / 4);
  }
  std::string name() const override { return "bytes4"; }
};

// Greedy longest-match segmentation over a fixed vocabulary; any byte not
// covered by a vocabulary entry counts as one token on its own.
class VocabCounter final : public TokenCounter {
 public:
  VocabCounter(std::string label, std::vector<std::string> entries)
      : label_(std::move(label)) {
    for (auto& e : entries) {
      if (e.empty()) continue;
      max_len_ = std::max(max_len_, e.size());
      vocab_.insert(std::move(e));
    }
  }

  int count(std::string_view text) const override {
    int tokens = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t take = 1;
      std::size_t cap = std::min(max_len_, text.size() - pos);
      for (std::size_t len = cap; len >= 1; --len) {
        if (vocab_.count(std::string(text.substr(pos, len)))) {
          take = len;
          break;
        }
      }
      ++tokens;
      pos += take;
    }
    return tokens;
  }

  std::string name() const override { return label_; }

 private:
  std::string label_;
  std::unordered_set<std::string> vocab_;
  std::size_t max_len_ = 1;
};

}  // namespace

std::shared_ptr<const TokenCounter> make_reference_counter() {
  static const auto instance = std::make_shared<const Bytes4Counter>();
  return instance;
}

std::shared_ptr<const TokenCounter> make_counter(const std::string& name) {
  if (name.empty() || name == "bytes4") return make_reference_counter();
  constexpr std::string_view kVocabPrefix = "vocab:";
  if (name.rfind(kVocabPrefix, 0) == 0) {
    const std::string path = name.substr(kVocabPrefix.size());
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw Error(Errc::invalid_config,
                  "cannot read vocabulary file for token counter", path);
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) entries.push_back(line);
    }
    if (entries.empty())
      throw Error(Errc::invalid_config, "vocabulary file is empty", path);
    return std::make_shared<const VocabCounter>(name, std::move(entries));
  }
  throw Error(Errc::invalid_config, "unknown token counter", name);
}

}  // namespace phishscope
