#pragma once

// Query filters: ORs of ANDed simple conditions,
//   age >= 30 and sex = Male or hours_per_week < 20
// Operators < <= > >= = (== accepted). Literals are numbers, bare words or
// "quoted strings" (category names). != is rejected: write it as
// "x < c or x > c". Parentheses are not supported; the form is already
// disjunctive.

#include <string>
#include <string_view>
#include <vector>

#include "rasp/ingest.h"
#include "rasp/query.h"

namespace rasp {

struct NamedCondition {
  std::string column;
  CompareOp op = CompareOp::kLessEqual;
  std::string literal;

  friend bool operator==(const NamedCondition&, const NamedCondition&) = default;
};

using Conjunction = std::vector<NamedCondition>;

struct Filter {
  std::vector<Conjunction> disjuncts;
};

Filter parse_filter(std::string_view text);

// Half-width of the window around a category code: x = j on a categorical
// column is sent as j - 0.4 <= x <= j + 0.4, so no record sits on a bound.
inline constexpr double kCategoryWindow = 0.4;

// Conditions in the normalized searchable domain, one list per disjunct.
// Categorical conditions become closed windows around integer codes.
std::vector<std::vector<SimpleCondition>> resolve_filter(const Filter& f,
                                                         const DatasetManifest& manifest);

// Exact evaluation of one condition on a normalized value (strict operators
// stay strict).
bool condition_holds(const SimpleCondition& c, std::span<const double> values);

}  // namespace rasp
