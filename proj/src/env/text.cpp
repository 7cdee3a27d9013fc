#include "coda/env/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace coda::env {

namespace {
constexpr std::array<std::string_view, 14> kStopwords = {"and", "in", "of", "off", "on", "onto",
                                                         "open", "panel", "press", "set", "the", "then", "to", "turn"};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '^' || c == '+' || c == '-';
}
}  // namespace

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && (cur.back() == '.' || cur.back() == '-')) cur.pop_back();
    if (!cur.empty() && std::find(kStopwords.begin(), kStopwords.end(), cur) == kStopwords.end()) {
      out.push_back(cur);
    }
    cur.clear();
  };
  for (char c : text) {
    if (word_char(c)) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> quoted_literals(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('\'', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('\'', open + 1);
    if (close == std::string_view::npos) break;
    out.emplace_back(text.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  return out;
}

double token_overlap(const std::vector<std::string>& instruction_tokens, std::string_view label) {
  const auto label_tokens = content_tokens(label);
  if (label_tokens.empty()) return 0.0;
  int hits = 0;
  for (const auto& t : label_tokens) {
    if (std::find(instruction_tokens.begin(), instruction_tokens.end(), t) != instruction_tokens.end()) ++hits;
  }
  return static_cast<double>(hits) / label_tokens.size();
}

}  // namespace coda::env
