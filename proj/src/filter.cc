#include "rasp/filter.h"

#include <cctype>
#include <cmath>

#include "rasp/error.h"

namespace rasp {
namespace {

enum class Tok { kWord, kString, kOp, kAnd, kOr, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::size_t pos = 0;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' ||
         c == '+';
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void fail(std::size_t pos, const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument,
              "filter: " + what + " at offset " + std::to_string(pos));
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '"') {
      std::string lit;
      std::size_t j = i + 1;
      for (; j < s.size() && s[j] != '"'; ++j) lit.push_back(s[j]);
      if (j == s.size()) fail(i, "unterminated string");
      out.push_back({Tok::kString, std::move(lit), i});
      i = j + 1;
    } else if (c == '<' || c == '>' || c == '=' || c == '!') {
      std::string op(1, c);
      if (i + 1 < s.size() && s[i + 1] == '=') op.push_back('=');
      out.push_back({Tok::kOp, op, i});
      i += op.size();
    } else if (c == '&' || c == '|') {
      if (i + 1 >= s.size() || s[i + 1] != c) fail(i, "expected '" + std::string(2, c) + "'");
      out.push_back({c == '&' ? Tok::kAnd : Tok::kOr, std::string(2, c), i});
      i += 2;
    } else if (c == ',') {
      out.push_back({Tok::kAnd, ",", i});
      ++i;
    } else if (word_char(c)) {
      std::size_t j = i;
      while (j < s.size() && word_char(s[j])) ++j;
      std::string w(s.substr(i, j - i));
      const std::string lw = lower(w);
      Tok kind = lw == "and" ? Tok::kAnd : lw == "or" ? Tok::kOr : Tok::kWord;
      out.push_back({kind, std::move(w), i});
      i = j;
    } else {
      fail(i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::kEnd, "", s.size()});
  return out;
}

CompareOp parse_op(const Token& t) {
  if (t.text == "<") return CompareOp::kLess;
  if (t.text == "<=") return CompareOp::kLessEqual;
  if (t.text == ">") return CompareOp::kGreater;
  if (t.text == ">=") return CompareOp::kGreaterEqual;
  if (t.text == "=" || t.text == "==") return CompareOp::kEqual;
  if (t.text == "!=") fail(t.pos, "'!=' is not supported; write 'x < c or x > c'");
  fail(t.pos, "unknown operator '" + t.text + "'");
}

}  // namespace

Filter parse_filter(std::string_view text) {
  const auto toks = tokenize(text);
  Filter f;
  std::size_t i = 0;
  if (toks[0].kind == Tok::kEnd) fail(0, "empty filter");
  Conjunction cur;
  while (true) {
    const Token& col = toks[i];
    if (col.kind != Tok::kWord) fail(col.pos, "expected a column name");
    const Token& op = toks[i + 1];
    if (op.kind != Tok::kOp) fail(op.pos, "expected a comparison operator");
    const CompareOp cmp = parse_op(op);
    const Token& lit = toks[i + 2];
    if (lit.kind != Tok::kWord && lit.kind != Tok::kString) fail(lit.pos, "expected a value");
    cur.push_back({col.text, cmp, lit.text});
    i += 3;
    const Token& next = toks[i];
    if (next.kind == Tok::kEnd) break;
    if (next.kind == Tok::kOr) {
      f.disjuncts.push_back(std::move(cur));
      cur.clear();
    } else if (next.kind != Tok::kAnd) {
      fail(next.pos, "expected 'and', 'or' or end of filter");
    }
    ++i;
  }
  f.disjuncts.push_back(std::move(cur));
  return f;
}

std::vector<std::vector<SimpleCondition>> resolve_filter(const Filter& f,
                                                         const DatasetManifest& manifest) {
  std::vector<std::vector<SimpleCondition>> out;
  for (const Conjunction& conj : f.disjuncts) {
    std::vector<SimpleCondition> conds;
    for (const NamedCondition& c : conj) {
      const std::size_t dim = manifest.dimension_of(c.column);
      const double raw = manifest.raw_value(dim, c.literal);
      auto add = [&](CompareOp op, double v) {
        conds.push_back({dim, op, manifest.normalization.normalize(dim, v)});
      };
      if (manifest.searchable(dim).kind != ColumnKind::kCategorical) {
        add(c.op, raw);
        continue;
      }
      enforce(raw == std::round(raw), ErrorCode::kInvalidArgument,
              "category code for " + c.column + " must be an integer");
      constexpr double w = kCategoryWindow;
      switch (c.op) {
        case CompareOp::kEqual:
          add(CompareOp::kGreaterEqual, raw - w);
          add(CompareOp::kLessEqual, raw + w);
          break;
        case CompareOp::kLess: add(CompareOp::kLessEqual, raw - 1.0 + w); break;
        case CompareOp::kLessEqual: add(CompareOp::kLessEqual, raw + w); break;
        case CompareOp::kGreater: add(CompareOp::kGreaterEqual, raw + 1.0 - w); break;
        case CompareOp::kGreaterEqual: add(CompareOp::kGreaterEqual, raw - w); break;
        case CompareOp::kNotEqual:
          throw Error(ErrorCode::kInvalidArgument, "'!=' is not supported");
      }
    }
    out.push_back(std::move(conds));
  }
  return out;
}

bool condition_holds(const SimpleCondition& c, std::span<const double> values) {
  enforce(c.dim < values.size(), ErrorCode::kInvalidArgument, "condition dimension out of range");
  const double x = values[c.dim];
  switch (c.op) {
    case CompareOp::kLess: return x < c.constant;
    case CompareOp::kLessEqual: return x <= c.constant;
    case CompareOp::kGreater: return x > c.constant;
    case CompareOp::kGreaterEqual: return x >= c.constant;
    case CompareOp::kEqual: return x == c.constant;
    case CompareOp::kNotEqual: return x != c.constant;
  }
  return false;
}

}  // namespace rasp
