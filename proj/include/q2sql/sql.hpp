#pragma once

#include <optional>
#include <string>
#include <vector>

namespace q2sql {

enum class AggOp { None, Count, Max, Min, Avg };

std::string agg_op_name(AggOp op);

struct ColumnRef {
  std::string table;
  std::string column;
  bool operator==(const ColumnRef&) const = default;
  bool operator<(const ColumnRef& o) const {
    return table != o.table ? table < o.table : column < o.column;
  }
};

struct Condition {
  std::string table;
  std::string column;
  std::string op;  // = > < >= <=
  std::string value;
  bool operator==(const Condition&) const = default;
};

// Constrained template:
//   SELECT $AGG_OP ($AGG_COLUMN)+ FROM $TABLE WHERE ($COND_COLUMN $COND_OP $COND_VAL)+
// with tables joined through the demographic hub on hadm_id.
struct SqlQuery {
  AggOp agg = AggOp::None;
  bool distinct = false;
  std::vector<ColumnRef> agg_cols;
  std::vector<std::string> tables;  // first entry is the join hub
  std::vector<Condition> conditions;
  bool operator==(const SqlQuery&) const = default;
};

struct ParseError {
  std::string message;
  int position = 0;  // token index
};

// Recursive-descent parse of the template. Values may be quoted single
// tokens or bare token runs up to "and"/end.
std::optional<SqlQuery> parse_sql(const std::vector<std::string>& tokens, ParseError* err = nullptr);
std::optional<SqlQuery> parse_sql(const std::string& text, ParseError* err = nullptr);

// Canonical form: lowercase keywords, columns as table."column", values
// double-quoted, conditions joined by "and" in AST order.
std::string serialize(const SqlQuery& q);

}  // namespace q2sql
