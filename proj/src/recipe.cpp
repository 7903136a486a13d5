#include "swarmchem/recipe.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

namespace swarmchem {

Recipe::Recipe(std::vector<RecipeEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("recipe needs at least one entry");
  for (auto& e : entries_) {
    if (e.count < 1) throw std::invalid_argument("recipe entry count must be >= 1");
    e.params = clamp(e.params);
  }
}

long Recipe::total_count() const {
  return std::accumulate(entries_.begin(), entries_.end(), 0L,
                         [](long acc, const RecipeEntry& e) { return acc + e.count; });
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

class LineCursor {
 public:
  LineCursor(std::string_view line, std::size_t line_no) : s_(line), line_no_(line_no) {}

  void skip_space() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= s_.size() || s_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  long integer() {
    skip_space();
    bool negative = false;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      negative = s_[pos_] == '-';
      ++pos_;
    }
    long value = 0;
    const char* first = s_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), value);
    if (ec != std::errc{} || ptr == first) fail("expected an integer count");
    pos_ += static_cast<std::size_t>(ptr - first);
    return negative ? -value : value;
  }

  double decimal() {
    skip_space();
    bool negative = false;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      negative = s_[pos_] == '-';
      ++pos_;
    }
    double value = 0.0;
    const char* first = s_.data() + pos_;
    const auto [ptr, ec] =
        std::from_chars(first, s_.data() + s_.size(), value, std::chars_format::fixed);
    if (ptr == first || ec == std::errc::invalid_argument) fail("expected a decimal value");
    if (ec == std::errc::result_out_of_range || !std::isfinite(value)) {
      fail("decimal value out of representable range");
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      fail("scientific notation is not accepted");
    }
    return negative ? -value : value;
  }

  bool at_end() {
    skip_space();
    return pos_ >= s_.size();
  }

  bool peek(char c) {
    skip_space();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw RecipeParseError(line_no_, what + " at column " + std::to_string(pos_ + 1));
  }

 private:
  std::string_view s_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

RecipeEntry parse_line(std::string_view line, std::size_t line_no) {
  LineCursor cur(line, line_no);
  const long count = cur.integer();
  if (count <= 0) throw RecipeParseError(line_no, "count must be positive");
  if (count > 1'000'000'000L) throw RecipeParseError(line_no, "count too large");
  cur.expect('*');
  cur.expect('(');
  std::vector<double> values;
  values.push_back(cur.decimal());
  while (cur.peek(',')) {
    cur.expect(',');
    values.push_back(cur.decimal());
  }
  cur.expect(')');
  if (!cur.at_end()) cur.fail("trailing characters");
  if (values.size() != KineticParams::kCount) {
    throw RecipeParseError(line_no, "expected 8 parameters, got " + std::to_string(values.size()));
  }
  RecipeEntry entry;
  entry.count = static_cast<int>(count);
  for (std::size_t i = 0; i < KineticParams::kCount; ++i) entry.params[i] = values[i];
  entry.params = clamp(entry.params);
  return entry;
}

}  // namespace

Recipe parse_recipe(std::string_view text) {
  std::vector<RecipeEntry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      entries.push_back(parse_line(line, line_no));
    }
    start = end + 1;
  }
  if (entries.empty()) throw RecipeParseError(0, "recipe has no entries");
  return Recipe(std::move(entries));
}

std::string format_param_value(double v) {
  char buf[400];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  std::string out(buf, ptr);
  if (out.find('.') == std::string::npos) out += ".0";
  return out;
}

std::string serialize_recipe(const Recipe& recipe) {
  std::string out;
  for (const auto& e : recipe.entries()) {
    out += std::to_string(e.count);
    out += " * (";
    for (std::size_t i = 0; i < KineticParams::kCount; ++i) {
      if (i) out += ", ";
      out += format_param_value(e.params[i]);
    }
    out += ")\n";
  }
  return out;
}

KineticParams random_params(RandomSource& rng) {
  KineticParams p;
  for (std::size_t i = 0; i < KineticParams::kCount; ++i) {
    p[i] = rng.uniform(kParamRanges[i].min, kParamRanges[i].max);
  }
  return p;
}

Recipe random_recipe(RandomSource& rng, std::size_t n_types, int count_per_type) {
  if (n_types == 0) throw std::invalid_argument("random_recipe needs n_types >= 1");
  std::vector<RecipeEntry> entries;
  entries.reserve(n_types);
  for (std::size_t k = 0; k < n_types; ++k) entries.push_back({count_per_type, random_params(rng)});
  return Recipe(std::move(entries));
}

}  // namespace swarmchem
