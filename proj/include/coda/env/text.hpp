#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace coda::env {

// Lowercased word tokens with instruction filler words removed.
std::vector<std::string> content_tokens(std::string_view text);

// Substrings enclosed in single quotes, in order of appearance.
std::vector<std::string> quoted_literals(std::string_view text);

// Fraction of the label's content tokens that occur in the instruction.
double token_overlap(const std::vector<std::string>& instruction_tokens, std::string_view label);

}  // namespace coda::env
