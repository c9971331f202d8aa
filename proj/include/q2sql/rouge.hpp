#pragma once

#include <map>
#include <string>
#include <vector>

#include "q2sql/db.hpp"
#include "q2sql/sql.hpp"

namespace q2sql {

// ROUGE-L F-score (beta = 1): LCS over token sequences, P = LCS/|a|,
// R = LCS/|b|, F = 2PR/(P+R), 0 when both are 0.
double rouge_l_word(const std::string& a, const std::string& b);
double rouge_l_char(const std::string& a, const std::string& b);

enum class ColumnKind { Textual, Numeric, Key };

struct LookupTable {
  // (table, column) -> deduplicated canonical values
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> values;
  std::map<std::pair<std::string, std::string>, ColumnKind> kinds;

  const std::vector<std::string>* find(const std::string& table, const std::string& column) const;
  ColumnKind kind_of(const std::string& table, const std::string& column) const;
};

// argmax of (rouge_l_word + rouge_l_char)/2; ties broken by
// lexicographically smallest candidate.
std::string recover_condition_value(const std::string& predicted,
                                    const std::vector<std::string>& candidates);

struct RecoveryDiagnostics {
  std::vector<std::string> skipped;  // conditions left unchanged and why
};

// Replace textual condition values with their best look-up matches.
// Numeric columns and unknown (table, column) pairs are left unchanged.
SqlQuery recover_query(const SqlQuery& q, const LookupTable& lut,
                       RecoveryDiagnostics* diag = nullptr);

void save_lookup_table(const LookupTable& lut, const std::string& path_stem);
LookupTable load_lookup_table(const std::string& path_stem);

}  // namespace q2sql
