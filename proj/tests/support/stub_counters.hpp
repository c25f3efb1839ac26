#pragma once

#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "phishscope/token_budget.hpp"

namespace testsupport {

// Deterministic toy counters for budget properties. All satisfy the
// counter contract (empty text counts 0).
class BytesPerCounter : public phishscope::TokenCounter {
 public:
  explicit BytesPerCounter(int per) : per_(per) {}
  int count(std::string_view text) const override {
    return static_cast<int>((text.size() + per_ - 1) / per_);
  }
  std::string name() const override {
    return "bytes" + std::to_string(per_);
  }

 private:
  std::size_t per_;
};

class WordCounter : public phishscope::TokenCounter {
 public:
  int count(std::string_view text) const override {
    int words = 0;
    bool in_word = false;
    for (char c : text) {
      bool ws = c == ' ' || c == '\n' || c == '\t' || c == '\r';
      if (!ws && !in_word) ++words;
      in_word = !ws;
    }
    return words;
  }
  std::string name() const override { return "words"; }
};

class SubstringCounter : public phishscope::TokenCounter {
 public:
  explicit SubstringCounter(std::string needle)
      : needle_(std::move(needle)) {}
  int count(std::string_view text) const override {
    int n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle_, pos)) != std::string_view::npos) {
      ++n;
      pos += needle_.size();
    }
    return n;
  }
  std::string name() const override { return "sub:" + needle_; }

 private:
  std::string needle_;
};

inline std::shared_ptr<const phishscope::TokenCounter> random_counter(
    std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, 5);
  switch (pick(rng)) {
    case 0:
      return std::make_shared<BytesPerCounter>(1);
    case 1:
      return std::make_shared<BytesPerCounter>(4);
    case 2:
      return std::make_shared<BytesPerCounter>(7);
    case 3:
      return std::make_shared<WordCounter>();
    case 4:
      return std::make_shared<SubstringCounter>("<");
    default:
      return std::make_shared<SubstringCounter>("e");
  }
}

}  // namespace testsupport
