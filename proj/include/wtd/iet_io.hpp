#pragma once

// Interval exchange definition files (JSON):
//
//   {
//     "alphabet": ["A", "B", "C", "D"],
//     "top":      ["A", "B", "C", "D"],
//     "bottom":   ["D", "C", "B", "A"],
//     "lengths":  {"A": "1/4", "B": "0.3", ...},   optional; or a list
//     "cocycle":  {"d": 1, "values": {"A": [1], ...}}   optional
//   }
//
// Lengths are decimal or "p/q" strings (or JSON numbers) and are parsed
// exactly. Unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtd/iet.hpp"
#include "wtd/rational.hpp"

namespace wtd::iet {

struct IetDefinition {
  std::vector<std::string> names;
  std::vector<Letter> top;
  std::vector<Letter> bottom;
  std::optional<std::vector<Rational>> lengths;
  std::optional<Cocycle> cocycle;
  std::string hash;  // FNV-1a of the canonical JSON form

  Iet<Rational> exact() const;
  Iet<double> approx() const;
  /// Same permutation pair with the given lengths.
  template <class T>
  Iet<T> with_lengths(std::vector<T> lengths) const {
    return Iet<T>(names, top, bottom, std::move(lengths));
  }
  nlohmann::json to_json() const;
};

IetDefinition parse_definition(const nlohmann::json& j);
IetDefinition load_definition(const std::filesystem::path& path);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace wtd::iet
