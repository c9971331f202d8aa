#include "q2sql/rouge.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "q2sql/text.hpp"

namespace q2sql {

namespace {

template <typename Seq>
int lcs_length(const Seq& a, const Seq& b) {
  const size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) return 0;
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[m];
}

double f_score(int lcs, size_t la, size_t lb) {
  if (la == 0 || lb == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(la);
  const double r = static_cast<double>(lcs) / static_cast<double>(lb);
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

}  // namespace

double rouge_l_word(const std::string& a, const std::string& b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  return f_score(lcs_length(ta, tb), ta.size(), tb.size());
}

double rouge_l_char(const std::string& a, const std::string& b) {
  return f_score(lcs_length(a, b), a.size(), b.size());
}

const std::vector<std::string>* LookupTable::find(const std::string& table,
                                                  const std::string& column) const {
  auto it = values.find({table, column});
  return it == values.end() ? nullptr : &it->second;
}

ColumnKind LookupTable::kind_of(const std::string& table, const std::string& column) const {
  auto it = kinds.find({table, column});
  return it == kinds.end() ? ColumnKind::Textual : it->second;
}

std::string recover_condition_value(const std::string& predicted,
                                    const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("recover_condition_value: no candidates");
  double best_score = -1.0;
  const std::string* best = nullptr;
  for (const auto& cand : candidates) {
    const double s = 0.5 * (rouge_l_word(predicted, cand) + rouge_l_char(predicted, cand));
    if (s > best_score || (s == best_score && cand < *best)) {
      best_score = s;
      best = &cand;
    }
  }
  return *best;
}

SqlQuery recover_query(const SqlQuery& q, const LookupTable& lut, RecoveryDiagnostics* diag) {
  SqlQuery out = q;
  for (auto& c : out.conditions) {
    const auto* cands = lut.find(c.table, c.column);
    if (!cands || cands->empty()) {
      if (diag) diag->skipped.push_back(c.table + "." + c.column + ": not in look-up table");
      continue;
    }
    if (lut.kind_of(c.table, c.column) != ColumnKind::Textual) {
      if (diag) diag->skipped.push_back(c.table + "." + c.column + ": non-textual column");
      continue;
    }
    c.value = recover_condition_value(c.value, *cands);
  }
  return out;
}

void save_lookup_table(const LookupTable& lut, const std::string& stem) {
  std::ofstream f(stem + ".lut");
  if (!f) throw std::runtime_error("cannot write " + stem + ".lut");
  for (const auto& [key, vals] : lut.values)
    for (const auto& v : vals) f << key.first << "." << key.second << "\t" << v << "\n";
  std::ofstream k(stem + ".kinds");
  if (!k) throw std::runtime_error("cannot write " + stem + ".kinds");
  for (const auto& [key, kind] : lut.kinds)
    k << key.first << "." << key.second << "\t"
      << (kind == ColumnKind::Textual ? "textual" : kind == ColumnKind::Numeric ? "numeric" : "key")
      << "\n";
}

LookupTable load_lookup_table(const std::string& stem) {
  LookupTable lut;
  std::ifstream f(stem + ".lut");
  if (!f) throw std::runtime_error("cannot read " + stem + ".lut");
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    size_t dot = line.find('.');
    if (tab == std::string::npos || dot == std::string::npos || dot > tab)
      throw std::runtime_error("malformed look-up line: " + line);
    lut.values[{line.substr(0, dot), line.substr(dot + 1, tab - dot - 1)}].push_back(
        line.substr(tab + 1));
  }
  std::ifstream k(stem + ".kinds");
  if (!k) throw std::runtime_error("cannot read " + stem + ".kinds");
  while (std::getline(k, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    size_t dot = line.find('.');
    if (tab == std::string::npos || dot == std::string::npos || dot > tab)
      throw std::runtime_error("malformed kinds line: " + line);
    const std::string kind = line.substr(tab + 1);
    lut.kinds[{line.substr(0, dot), line.substr(dot + 1, tab - dot - 1)}] =
        kind == "numeric" ? ColumnKind::Numeric : kind == "key" ? ColumnKind::Key
                                                                : ColumnKind::Textual;
  }
  return lut;
}

}  // namespace q2sql
