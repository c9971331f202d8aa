#include "q2sql/eval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace q2sql {

namespace {

// canonicalize through the parser when possible, else fall back to the raw
// token string
std::string canonical(const std::string& sql) {
  auto q = parse_sql(sql);
  return q ? serialize(*q) : sql;
}

}  // namespace

bool acc_lf(const std::string& pred_sql, const std::string& gold_sql) {
  return canonical(pred_sql) == canonical(gold_sql);
}

bool acc_ex(const std::string& pred_sql, const std::string& gold_sql, const Database& db) {
  auto gq = parse_sql(gold_sql);
  if (!gq) return false;
  auto gold_res = execute(*gq, db);
  if (!gold_res) return false;
  auto pq = parse_sql(pred_sql);
  if (!pq) return false;
  auto pred_res = execute(*pq, db);
  if (!pred_res) return false;
  return results_equal(*pred_res, *gold_res);
}

std::array<bool, 5> breakdown(const std::string& pred_sql, const std::string& gold_sql) {
  std::array<bool, 5> out{};
  auto pq = parse_sql(pred_sql);
  auto gq = parse_sql(gold_sql);
  if (!pq || !gq) return out;

  out[0] = pq->agg == gq->agg && pq->distinct == gq->distinct;

  auto col_set = [](std::vector<ColumnRef> cols) {
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
  };
  out[1] = col_set(pq->agg_cols) == col_set(gq->agg_cols);

  auto table_set = [](std::vector<std::string> t) {
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
  };
  out[2] = table_set(pq->tables) == table_set(gq->tables);

  auto colops = [](const SqlQuery& q) {
    std::vector<std::string> out;
    for (const auto& c : q.conditions) out.push_back(c.table + "." + c.column + " " + c.op);
    std::sort(out.begin(), out.end());
    return out;
  };
  out[3] = colops(*pq) == colops(*gq);

  auto tuples = [](const SqlQuery& q) {
    std::vector<std::string> out;
    for (const auto& c : q.conditions)
      out.push_back(c.table + "." + c.column + " " + c.op + " " + c.value);
    std::sort(out.begin(), out.end());
    return out;
  };
  out[4] = tuples(*pq) == tuples(*gq);
  return out;
}

EvalReport evaluate(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                    const Database& db) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("evaluate: prediction count does not match dataset size");
  if (gold.empty()) throw std::invalid_argument("evaluate: empty dataset");
  EvalReport r;
  long n_lf = 0, n_ex = 0;
  std::array<long, 5> n_slot{};
  for (size_t i = 0; i < gold.size(); ++i) {
    ExampleResult ex;
    ex.lf = acc_lf(pred[i], gold[i]);
    ex.ex = acc_ex(pred[i], gold[i], db);
    ex.slots = breakdown(pred[i], gold[i]);
    n_lf += ex.lf;
    n_ex += ex.ex;
    for (int s = 0; s < 5; ++s) n_slot[static_cast<size_t>(s)] += ex.slots[static_cast<size_t>(s)];
    r.per_example.push_back(ex);
  }
  const double n = static_cast<double>(gold.size());
  r.acc_lf = static_cast<double>(n_lf) / n;
  r.acc_ex = static_cast<double>(n_ex) / n;
  double acc = 0.0;
  for (int s = 0; s < 5; ++s) {
    r.breakdown[static_cast<size_t>(s)] = static_cast<double>(n_slot[static_cast<size_t>(s)]) / n;
    acc += r.breakdown[static_cast<size_t>(s)];
  }
  r.breakdown_avg = acc / 5.0;
  return r;
}

std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "acc_lf: " << r.acc_lf << "\n";
  os << "acc_ex: " << r.acc_ex << "\n";
  for (int s = 0; s < 5; ++s)
    os << kSlotNames[static_cast<size_t>(s)] << ": " << r.breakdown[static_cast<size_t>(s)] << "\n";
  os << "breakdown_avg: " << r.breakdown_avg << "\n";
  return os.str();
}

void save_report(const EvalReport& r, const std::string& stem) {
  std::ofstream f(stem + ".report");
  if (!f) throw std::runtime_error("cannot write " + stem + ".report");
  f << report_text(r);
  std::ofstream t(stem + ".examples.tsv");
  if (!t) throw std::runtime_error("cannot write " + stem + ".examples.tsv");
  t << "id\tlf\tex\tagg_op\tagg_col\ttable\tcon_col_op\tcon_val\n";
  for (size_t i = 0; i < r.per_example.size(); ++i) {
    const auto& e = r.per_example[i];
    t << i << "\t" << e.lf << "\t" << e.ex;
    for (bool b : e.slots) t << "\t" << b;
    t << "\n";
  }
}

}  // namespace q2sql
