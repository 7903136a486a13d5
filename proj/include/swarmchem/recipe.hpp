#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmchem/params.hpp"
#include "swarmchem/rng.hpp"

namespace swarmchem {

struct RecipeEntry {
  int count = 1;
  KineticParams params;

  friend bool operator==(const RecipeEntry&, const RecipeEntry&) = default;
};

/// A swarm's genome: an ordered, non-empty list of (count, parameter set).
///
/// Counts are designed proportions. They seed tile populations and weight
/// differentiation; live populations are tracked by the world, not here.
class Recipe {
 public:
  /// Throws std::invalid_argument on an empty list or a count below 1.
  /// Parameters are clamped into range.
  explicit Recipe(std::vector<RecipeEntry> entries);

  const std::vector<RecipeEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const RecipeEntry& operator[](std::size_t i) const { return entries_[i]; }
  long total_count() const;

  friend bool operator==(const Recipe&, const Recipe&) = default;

 private:
  std::vector<RecipeEntry> entries_;
};

class RecipeParseError : public std::runtime_error {
 public:
  RecipeParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  /// 1-based line of the offending text, 0 when the error is not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses `<count> * (<R>, <Vn>, <Vm>, <c1>, <c2>, <c3>, <c4>, <c5>)` lines.
/// Blank lines are skipped; values are plain decimals and get clamped.
Recipe parse_recipe(std::string_view text);

/// One line per entry, each terminated by '\n'. Values use the shortest
/// fixed-point form that parses back to the identical double.
std::string serialize_recipe(const Recipe& recipe);

std::string format_param_value(double v);

/// n_types entries, every parameter uniform over its range, each with count_per_type.
Recipe random_recipe(RandomSource& rng, std::size_t n_types, int count_per_type);

KineticParams random_params(RandomSource& rng);

}  // namespace swarmchem
