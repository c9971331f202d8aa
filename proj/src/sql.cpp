#include "q2sql/sql.hpp"

#include <algorithm>

#include "q2sql/text.hpp"

namespace q2sql {

std::string agg_op_name(AggOp op) {
  switch (op) {
    case AggOp::None: return "null";
    case AggOp::Count: return "count";
    case AggOp::Max: return "max";
    case AggOp::Min: return "min";
    case AggOp::Avg: return "avg";
  }
  return "?";
}

namespace {

class Parser {
 public:
  Parser(const std::vector<std::string>& toks, ParseError* err) : toks_(toks), err_(err) {}

  std::optional<SqlQuery> run() {
    SqlQuery q;
    if (!expect("select")) return fail("expected SELECT");
    if (!parse_select(q)) return std::nullopt;
    if (!expect("from")) return fail("expected FROM");
    if (!parse_from(q)) return std::nullopt;
    if (!expect("where")) return fail("expected WHERE");
    if (!parse_conditions(q)) return std::nullopt;
    if (pos_ != toks_.size()) return fail("trailing tokens after conditions");
    for (const auto& c : q.agg_cols)
      if (!has_table(q, c.table)) return fail("aggregation column references unjoined table");
    for (const auto& c : q.conditions)
      if (!has_table(q, c.table)) return fail("condition references unjoined table");
    return q;
  }

 private:
  const std::vector<std::string>& toks_;
  ParseError* err_;
  size_t pos_ = 0;

  static bool has_table(const SqlQuery& q, const std::string& t) {
    return std::find(q.tables.begin(), q.tables.end(), t) != q.tables.end();
  }

  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek() const {
    static const std::string empty;
    return done() ? empty : toks_[pos_];
  }
  bool expect(const std::string& t) {
    if (done() || toks_[pos_] != t) return false;
    ++pos_;
    return true;
  }

  std::optional<SqlQuery> fail(const std::string& msg) {
    if (err_) {
      err_->message = msg;
      err_->position = static_cast<int>(pos_);
    }
    return std::nullopt;
  }

  bool failb(const std::string& msg) {
    fail(msg);
    return false;
  }

  // table."column" or table.column
  bool parse_colref(ColumnRef& out) {
    if (done()) return false;
    const std::string& t = toks_[pos_];
    size_t dot = t.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= t.size()) return false;
    out.table = t.substr(0, dot);
    std::string col = t.substr(dot + 1);
    if (col.size() >= 2 && col.front() == '"' && col.back() == '"') col = col.substr(1, col.size() - 2);
    if (col.empty() || col.find('"') != std::string::npos) return false;
    out.column = col;
    ++pos_;
    return true;
  }

  bool parse_select(SqlQuery& q) {
    if (peek() == "count" || peek() == "max" || peek() == "min" || peek() == "avg") {
      if (peek() == "count") q.agg = AggOp::Count;
      else if (peek() == "max") q.agg = AggOp::Max;
      else if (peek() == "min") q.agg = AggOp::Min;
      else q.agg = AggOp::Avg;
      ++pos_;
      if (!expect("(")) return failb("expected ( after aggregation operator");
      if (peek() == "distinct") {
        q.distinct = true;
        ++pos_;
      }
      if (!parse_collist(q.agg_cols)) return failb("expected aggregation column");
      if (!expect(")")) return failb("expected ) after aggregation columns");
    } else {
      q.agg = AggOp::None;
      if (!parse_collist(q.agg_cols)) return failb("expected aggregation column");
    }
    return true;
  }

  bool parse_collist(std::vector<ColumnRef>& cols) {
    ColumnRef c;
    if (!parse_colref(c)) return false;
    cols.push_back(c);
    while (peek() == ",") {
      ++pos_;
      if (!parse_colref(c)) return false;
      cols.push_back(c);
    }
    return true;
  }

  bool parse_from(SqlQuery& q) {
    if (done()) return failb("expected table name");
    q.tables.push_back(toks_[pos_++]);
    while (peek() == "inner") {
      ++pos_;
      if (!expect("join")) return failb("expected JOIN after INNER");
      if (done()) return failb("expected table name after JOIN");
      q.tables.push_back(toks_[pos_++]);
      if (!expect("on")) return failb("expected ON in join clause");
      ColumnRef lhs, rhs;
      if (!parse_colref(lhs)) return failb("expected join key column");
      if (!expect("=")) return failb("expected = in join clause");
      if (!parse_colref(rhs)) return failb("expected join key column");
    }
    return true;
  }

  static bool is_cond_op(const std::string& t) {
    return t == "=" || t == ">" || t == "<" || t == ">=" || t == "<=";
  }

  bool parse_conditions(SqlQuery& q) {
    while (true) {
      Condition c;
      ColumnRef col;
      if (!parse_colref(col)) return failb("expected condition column");
      c.table = col.table;
      c.column = col.column;
      if (done() || !is_cond_op(peek())) return failb("expected condition operator");
      c.op = toks_[pos_++];
      // value: tokens up to "and" or end; a lone quoted token keeps its inner text
      std::vector<std::string> val;
      while (!done() && peek() != "and") val.push_back(toks_[pos_++]);
      if (val.empty()) return failb("dangling condition: missing value");
      if (val.size() == 1 && val[0].size() >= 2 && val[0].front() == '"' && val[0].back() == '"')
        c.value = val[0].substr(1, val[0].size() - 2);
      else
        c.value = join_tokens(val);
      q.conditions.push_back(c);
      if (done()) break;
      ++pos_;  // and
      if (done()) return failb("dangling AND");
    }
    return true;
  }
};

}  // namespace

std::optional<SqlQuery> parse_sql(const std::vector<std::string>& tokens, ParseError* err) {
  return Parser(tokens, err).run();
}

std::optional<SqlQuery> parse_sql(const std::string& text, ParseError* err) {
  return parse_sql(tokenize(text), err);
}

static std::string colref_str(const ColumnRef& c) {
  return c.table + ".\"" + c.column + "\"";
}

std::string serialize(const SqlQuery& q) {
  std::string s = "select ";
  std::string cols;
  for (size_t i = 0; i < q.agg_cols.size(); ++i) {
    if (i) cols += " , ";
    cols += colref_str(q.agg_cols[i]);
  }
  if (q.agg == AggOp::None) {
    s += cols;
  } else {
    s += agg_op_name(q.agg) + " ( ";
    if (q.distinct) s += "distinct ";
    s += cols + " )";
  }
  s += " from " + (q.tables.empty() ? std::string("?") : q.tables[0]);
  for (size_t i = 1; i < q.tables.size(); ++i)
    s += " inner join " + q.tables[i] + " on " + q.tables[0] + ".hadm_id = " + q.tables[i] +
         ".hadm_id";
  s += " where ";
  for (size_t i = 0; i < q.conditions.size(); ++i) {
    if (i) s += " and ";
    const Condition& c = q.conditions[i];
    s += c.table + ".\"" + c.column + "\" " + c.op + " \"" + c.value + "\"";
  }
  return s;
}

}  // namespace q2sql
