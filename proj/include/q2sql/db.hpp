#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "q2sql/sql.hpp"

namespace q2sql {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int col_index(const std::string& col) const;
};

struct Database {
  std::vector<Table> tables;

  const Table* find(const std::string& name) const;
  Table* find(const std::string& name);
};

// Unordered multiset of result rows.
using ResultSet = std::vector<std::vector<std::string>>;

struct ExecError {
  std::string message;
};

// Inner-join the referenced tables on hadm_id (demographic hub), filter by
// the conditions, then aggregate. Textual "=" is case-insensitive after
// trimming; order operators compare decimal parses and drop rows whose
// cells fail to parse.
std::optional<ResultSet> execute(const SqlQuery& q, const Database& db, ExecError* err = nullptr);

// Multiset equality with case-insensitive cells.
bool results_equal(const ResultSet& a, const ResultSet& b);

std::optional<double> parse_number(const std::string& s);
std::string format_number(double x);
std::string trim_lower(const std::string& s);

// Comma-separated files with a header row, one file per table.
void save_database(const Database& db, const std::string& dir);
Database load_database(const std::string& dir, const std::vector<std::string>& table_names);

}  // namespace q2sql
