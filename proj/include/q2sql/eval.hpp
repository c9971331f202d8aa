#pragma once

#include <array>
#include <string>
#include <vector>

#include "q2sql/db.hpp"
#include "q2sql/sql.hpp"

namespace q2sql {

// Exact match of canonical token strings (order-sensitive).
bool acc_lf(const std::string& pred_sql, const std::string& gold_sql);

// True iff pred parses, executes, and yields the gold result multiset.
bool acc_ex(const std::string& pred_sql, const std::string& gold_sql, const Database& db);

// Agg_op (incl. distinct), Agg_col (set), Table (set), Con_col+op
// (multiset), Con_val (multiset). Unparseable pred scores all false.
std::array<bool, 5> breakdown(const std::string& pred_sql, const std::string& gold_sql);

struct ExampleResult {
  bool lf = false;
  bool ex = false;
  std::array<bool, 5> slots{};
};

struct EvalReport {
  double acc_lf = 0.0;
  double acc_ex = 0.0;
  std::array<double, 5> breakdown{};
  double breakdown_avg = 0.0;
  std::vector<ExampleResult> per_example;
};

inline constexpr std::array<const char*, 5> kSlotNames = {"agg_op", "agg_col", "table",
                                                          "con_col_op", "con_val"};

EvalReport evaluate(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                    const Database& db);

std::string report_text(const EvalReport& r);
void save_report(const EvalReport& r, const std::string& path_stem);

}  // namespace q2sql
