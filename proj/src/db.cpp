#include "q2sql/db.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace q2sql {

int Table::col_index(const std::string& col) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == col) return static_cast<int>(i);
  return -1;
}

const Table* Database::find(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

Table* Database::find(const std::string& name) {
  for (auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

std::string trim_lower(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out = s.substr(b, e - b);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  const std::string t = trim_lower(s);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  double x = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return std::nullopt;
  return x;
}

std::string format_number(double x) {
  if (std::abs(x - std::round(x)) < 1e-9 && std::abs(x) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

namespace {

bool cond_holds(const Condition& c, const std::string& cell) {
  if (c.op == "=") return trim_lower(cell) == trim_lower(c.value);
  auto lhs = parse_number(cell);
  auto rhs = parse_number(c.value);
  if (!lhs || !rhs) return false;
  if (c.op == ">") return *lhs > *rhs;
  if (c.op == "<") return *lhs < *rhs;
  if (c.op == ">=") return *lhs >= *rhs;
  if (c.op == "<=") return *lhs <= *rhs;
  return false;
}

}  // namespace

std::optional<ResultSet> execute(const SqlQuery& q, const Database& db, ExecError* err) {
  auto fail = [err](const std::string& msg) -> std::optional<ResultSet> {
    if (err) err->message = msg;
    return std::nullopt;
  };
  if (q.tables.empty()) return fail("no tables");
  std::vector<const Table*> tabs;
  for (const auto& name : q.tables) {
    const Table* t = db.find(name);
    if (!t) return fail("unknown table: " + name);
    tabs.push_back(t);
  }
  std::vector<int> key_col(tabs.size());
  if (tabs.size() > 1)
    for (size_t i = 0; i < tabs.size(); ++i) {
      key_col[i] = tabs[i]->col_index("hadm_id");
      if (key_col[i] < 0) return fail("table lacks join key hadm_id: " + tabs[i]->name);
    }

  // resolve referenced columns up front
  auto resolve = [&](const std::string& table, const std::string& column, int& ti,
                     int& ci) -> bool {
    ti = -1;
    for (size_t i = 0; i < q.tables.size(); ++i)
      if (q.tables[i] == table) ti = static_cast<int>(i);
    if (ti < 0) return false;
    ci = tabs[static_cast<size_t>(ti)]->col_index(column);
    return ci >= 0;
  };
  struct Ref {
    int ti, ci;
  };
  std::vector<Ref> agg_refs;
  for (const auto& c : q.agg_cols) {
    Ref r{};
    if (!resolve(c.table, c.column, r.ti, r.ci))
      return fail("unknown column: " + c.table + "." + c.column);
    agg_refs.push_back(r);
  }
  std::vector<Ref> cond_refs;
  for (const auto& c : q.conditions) {
    Ref r{};
    if (!resolve(c.table, c.column, r.ti, r.ci))
      return fail("unknown column: " + c.table + "." + c.column);
    cond_refs.push_back(r);
  }

  // joined rows as per-table row indices, built hub-outward
  std::vector<std::vector<int>> joined;
  for (size_t r = 0; r < tabs[0]->rows.size(); ++r) joined.push_back({static_cast<int>(r)});
  for (size_t ti = 1; ti < tabs.size(); ++ti) {
    std::vector<std::vector<int>> next;
    for (const auto& j : joined) {
      const std::string& key = tabs[0]->rows[static_cast<size_t>(j[0])][static_cast<size_t>(key_col[0])];
      for (size_t r = 0; r < tabs[ti]->rows.size(); ++r)
        if (tabs[ti]->rows[r][static_cast<size_t>(key_col[ti])] == key) {
          auto ext = j;
          ext.push_back(static_cast<int>(r));
          next.push_back(std::move(ext));
        }
    }
    joined = std::move(next);
  }

  // filter
  std::vector<std::vector<int>> kept;
  for (const auto& j : joined) {
    bool ok = true;
    for (size_t k = 0; k < q.conditions.size(); ++k) {
      const auto& cell =
          tabs[static_cast<size_t>(cond_refs[k].ti)]->rows[static_cast<size_t>(j[static_cast<size_t>(cond_refs[k].ti)])]
              [static_cast<size_t>(cond_refs[k].ci)];
      if (!cond_holds(q.conditions[k], cell)) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(j);
  }

  auto cell_of = [&](const std::vector<int>& j, const Ref& r) -> const std::string& {
    return tabs[static_cast<size_t>(r.ti)]->rows[static_cast<size_t>(j[static_cast<size_t>(r.ti)])]
        [static_cast<size_t>(r.ci)];
  };

  ResultSet out;
  switch (q.agg) {
    case AggOp::None: {
      for (const auto& j : kept) {
        std::vector<std::string> row;
        for (const auto& r : agg_refs) row.push_back(cell_of(j, r));
        out.push_back(std::move(row));
      }
      break;
    }
    case AggOp::Count: {
      long n = 0;
      if (q.distinct) {
        std::vector<std::vector<std::string>> seen;
        for (const auto& j : kept) {
          std::vector<std::string> row;
          for (const auto& r : agg_refs) row.push_back(trim_lower(cell_of(j, r)));
          seen.push_back(std::move(row));
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        n = static_cast<long>(seen.size());
      } else {
        n = static_cast<long>(kept.size());
      }
      out.push_back({std::to_string(n)});
      break;
    }
    case AggOp::Max:
    case AggOp::Min:
    case AggOp::Avg: {
      // aggregate over the first column's numeric parses; rows that fail to
      // parse are skipped
      double acc = 0.0;
      long n = 0;
      double best = 0.0;
      for (const auto& j : kept) {
        auto x = parse_number(cell_of(j, agg_refs[0]));
        if (!x) continue;
        if (n == 0) best = *x;
        else if (q.agg == AggOp::Max) best = std::max(best, *x);
        else if (q.agg == AggOp::Min) best = std::min(best, *x);
        acc += *x;
        ++n;
      }
      if (n == 0) break;  // empty aggregate -> empty result
      out.push_back({format_number(q.agg == AggOp::Avg ? acc / static_cast<double>(n) : best)});
      break;
    }
  }
  return out;
}

bool results_equal(const ResultSet& a, const ResultSet& b) {
  if (a.size() != b.size()) return false;
  auto norm = [](const ResultSet& rs) {
    std::vector<std::vector<std::string>> out;
    for (const auto& row : rs) {
      std::vector<std::string> r;
      for (const auto& cell : row) r.push_back(trim_lower(cell));
      out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  return norm(a) == norm(b);
}

void save_database(const Database& db, const std::string& dir) {
  for (const auto& t : db.tables) {
    std::ofstream f(dir + "/" + t.name + ".csv");
    if (!f) throw std::runtime_error("cannot write table file for " + t.name);
    auto emit = [&f](const std::vector<std::string>& cells) {
      for (size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].find(',') != std::string::npos || cells[i].find('\n') != std::string::npos)
          throw std::runtime_error("cell contains separator: " + cells[i]);
        if (i) f << ',';
        f << cells[i];
      }
      f << '\n';
    };
    emit(t.columns);
    for (const auto& row : t.rows) emit(row);
  }
}

Database load_database(const std::string& dir, const std::vector<std::string>& table_names) {
  Database db;
  for (const auto& name : table_names) {
    std::ifstream f(dir + "/" + name + ".csv");
    if (!f) throw std::runtime_error("cannot read table file " + dir + "/" + name + ".csv");
    Table t;
    t.name = name;
    std::string line;
    bool header = true;
    while (std::getline(f, line)) {
      std::vector<std::string> cells;
      std::string cur;
      std::istringstream ss(line);
      while (std::getline(ss, cur, ',')) cells.push_back(cur);
      if (line.empty()) continue;
      if (line.back() == ',') cells.push_back("");
      if (header) {
        t.columns = cells;
        header = false;
      } else {
        if (cells.size() != t.columns.size())
          throw std::runtime_error("ragged row in " + name + ".csv");
        t.rows.push_back(cells);
      }
    }
    db.tables.push_back(std::move(t));
  }
  return db;
}

}  // namespace q2sql
