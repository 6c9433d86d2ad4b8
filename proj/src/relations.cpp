#include "disco/relations.hpp"

#include <mutex>
#include <set>

#include <spdlog/spdlog.h>

#include "disco/errors.hpp"

namespace disco {

namespace {

std::string normalize(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == '_' || c == '-' || c == ' ') continue;
    out += static_cast<char>(
        (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c);
  }
  return out;
}

}  // namespace

int relation_id(std::string_view name) {
  const std::string key = normalize(name);
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (normalize(kRelationNames[i]) == key) return static_cast<int>(i);
  }
  static std::mutex mu;
  static std::set<std::string> warned;
  {
    std::lock_guard lock(mu);
    if (warned.insert(key).second) {
      spdlog::warn("unseen RST relation '{}' mapped to 'unknown'", name);
    }
  }
  return kUnknownRelation;
}

std::string_view relation_name(int id) {
  if (id < 0 || id >= static_cast<int>(kNumRelations)) {
    throw Error(ErrorCode::IndexOutOfRange,
                "relation id " + std::to_string(id));
  }
  return kRelationNames[static_cast<std::size_t>(id)];
}

}  // namespace disco
