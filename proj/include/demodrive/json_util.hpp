#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "demodrive/errors.hpp"

namespace demodrive::json_util {

// Config sections reject keys they do not know so typos surface immediately.
inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                                std::string_view section) {
  if (!j.is_object()) throw ValidationError(std::string(section) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool found = false;
    for (std::string_view k : known) found = found || k == key;
    if (!found) throw ValidationError("unknown key '" + key + "' in " + std::string(section));
  }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(std::string("bad value for '") + key + "'");
    }
  }
}

}  // namespace demodrive::json_util
