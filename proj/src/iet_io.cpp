#include "wtd/iet_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace wtd::iet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Config, what); }

Letter letter_index(const std::vector<std::string>& names, const json& item) {
  if (!item.is_string()) fail("letters must be strings");
  const auto s = item.get<std::string>();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == s) return static_cast<Letter>(i);
  }
  fail("unknown letter '" + s + "'");
}

std::vector<Letter> parse_order(const std::vector<std::string>& names, const json& j,
                                const char* key) {
  if (!j.is_array() || j.size() != names.size()) {
    fail(std::string(key) + " must list every letter once");
  }
  std::vector<Letter> out;
  for (const auto& item : j) out.push_back(letter_index(names, item));
  if (!is_permutation_of_alphabet(out, names.size())) {
    fail(std::string(key) + " must list every letter once");
  }
  return out;
}

Rational parse_length(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number()) return parse_rational(v.dump());
  fail("lengths must be numbers or strings");
}

// Applies `body(letter, value)` to a per-letter map or list.
template <class Body>
void for_each_letter(const std::vector<std::string>& names, const json& j, const char* key,
                     Body body) {
  if (j.is_array()) {
    if (j.size() != names.size()) fail(std::string(key) + " needs one entry per letter");
    for (std::size_t a = 0; a < names.size(); ++a) body(static_cast<Letter>(a), j[a]);
  } else if (j.is_object()) {
    if (j.size() != names.size()) fail(std::string(key) + " needs one entry per letter");
    for (auto it = j.begin(); it != j.end(); ++it) {
      body(letter_index(names, json(it.key())), it.value());
    }
  } else {
    fail(std::string(key) + " must be a list or an object");
  }
}

}  // namespace

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

IetDefinition parse_definition(const json& j) {
  if (!j.is_object()) fail("definition must be a JSON object");
  static const std::set<std::string> known{"alphabet", "top", "bottom", "lengths", "cocycle"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) fail("unknown key '" + it.key() + "'");
  }
  for (const char* key : {"alphabet", "top", "bottom"}) {
    if (!j.contains(key)) fail(std::string("missing key '") + key + "'");
  }
  IetDefinition def;
  if (!j["alphabet"].is_array()) fail("alphabet must be a list of names");
  std::set<std::string> seen;
  for (const auto& item : j["alphabet"]) {
    if (!item.is_string() || item.get<std::string>().empty()) fail("letter names must be strings");
    if (!seen.insert(item.get<std::string>()).second) fail("duplicate letter name");
    def.names.push_back(item.get<std::string>());
  }
  if (def.names.size() < 2) fail("alphabet needs at least two letters");
  def.top = parse_order(def.names, j["top"], "top");
  def.bottom = parse_order(def.names, j["bottom"], "bottom");
  if (!is_irreducible(def.top, def.bottom)) {
    throw Error(ErrorKind::Reducible, "the permutation pair is reducible");
  }

  if (j.contains("lengths")) {
    std::vector<Rational> lengths(def.names.size());
    for_each_letter(def.names, j["lengths"], "lengths",
                    [&](Letter a, const json& v) { lengths[a] = parse_length(v); });
    for (std::size_t a = 0; a < lengths.size(); ++a) {
      if (lengths[a] <= 0) {
        throw Error(ErrorKind::NonPositiveLength, "length of " + def.names[a] + " is not positive");
      }
    }
    def.lengths = std::move(lengths);
  }

  if (j.contains("cocycle")) {
    const json& c = j["cocycle"];
    if (!c.is_object() || !c.contains("values")) fail("cocycle needs 'values'");
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (it.key() != "d" && it.key() != "values") fail("unknown cocycle key '" + it.key() + "'");
    }
    const std::size_t d = c.contains("d") ? c["d"].get<std::size_t>() : 1;
    if (d < 1) fail("cocycle dimension must be >= 1");
    std::vector<std::int64_t> values(def.names.size() * d);
    for_each_letter(def.names, c["values"], "cocycle values", [&](Letter a, const json& v) {
      if (v.is_number_integer() && d == 1) {
        values[a] = v.get<std::int64_t>();
        return;
      }
      if (!v.is_array() || v.size() != d) fail("cocycle values must be integer vectors of length d");
      for (std::size_t i = 0; i < d; ++i) {
        if (!v[i].is_number_integer()) fail("cocycle values must be integers");
        values[a * d + i] = v[i].get<std::int64_t>();
      }
    });
    def.cocycle = Cocycle(def.names.size(), d, std::move(values));
  }
  def.hash = fnv1a_hex(def.to_json().dump());
  return def;
}

IetDefinition load_definition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open definition file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("malformed definition file " + path.string() + ": " + e.what());
  }
  return parse_definition(j);
}

json IetDefinition::to_json() const {
  json j;
  j["alphabet"] = names;
  auto order = [&](const std::vector<Letter>& o) {
    json arr = json::array();
    for (Letter a : o) arr.push_back(names[a]);
    return arr;
  };
  j["top"] = order(top);
  j["bottom"] = order(bottom);
  if (lengths) {
    json l = json::object();
    for (std::size_t a = 0; a < names.size(); ++a) l[names[a]] = wtd::to_string((*lengths)[a]);
    j["lengths"] = l;
  }
  if (cocycle) {
    json v = json::object();
    for (std::size_t a = 0; a < names.size(); ++a) {
      const auto f = (*cocycle)(static_cast<Letter>(a));
      v[names[a]] = std::vector<std::int64_t>(f.begin(), f.end());
    }
    j["cocycle"] = {{"d", cocycle->dim()}, {"values", v}};
  }
  return j;
}

Iet<Rational> IetDefinition::exact() const {
  if (!lengths) fail("definition has no lengths");
  return Iet<Rational>(names, top, bottom, *lengths);
}

Iet<double> IetDefinition::approx() const { return to_double(exact()); }

}  // namespace wtd::iet
