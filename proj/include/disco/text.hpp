#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace disco {

// Whitespace tokenization with leading/trailing ASCII punctuation split off
// into separate tokens ("cat." -> "cat", "."). Case is preserved.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view s);
std::vector<std::string> to_lower(const std::vector<std::string>& tokens);

std::string join(const std::vector<std::string>& tokens,
                 std::string_view sep = " ");

std::size_t count_words(std::string_view text);

}  // namespace disco
