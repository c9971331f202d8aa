#pragma once

#include <string>
#include <vector>

#include "q2sql/db.hpp"
#include "q2sql/rouge.hpp"
#include "q2sql/sql.hpp"

namespace q2sql {

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Textual;
};

struct TableSpec {
  std::string name;
  std::vector<ColumnSpec> columns;
};

// Five linked tables in the style of a hospital record system: a
// demographic hub plus diagnoses / procedures / prescriptions / lab
// detail tables, joined on hadm_id.
struct SchemaSpec {
  std::vector<TableSpec> tables;
};

SchemaSpec default_schema();

// Every SQL keyword, table name, and qualified column token of the
// schema. Generated questions never contain any of these verbatim.
std::vector<std::string> schema_tokens(const SchemaSpec& spec);

// Deterministic for a seed; child-table hadm_ids all exist in the hub
// table. The look-up table collects the distinct values of every textual
// column.
Database gen_database(const SchemaSpec& spec, uint64_t seed, int n_patients, LookupTable* lut);

struct ValueSpan {
  int start = 0;  // question token index
  int len = 0;
};

struct QaPair {
  std::vector<std::string> question;  // tokens
  std::string sql;                    // canonical serialization
  SqlQuery query;
  std::vector<ValueSpan> value_spans;  // condition-value tokens in the question
};

// Template instantiation: lookups for one patient, patient listings,
// counts, and max/min/avg aggregates, each with at most two conditions
// drawn from actual rows so the gold query has a non-empty answer.
std::vector<QaPair> gen_question_pairs(const Database& db, uint64_t seed, int n);

struct NoisePolicy {
  double p_abbr = 0.3;  // whole-word abbreviation from a fixed map
  double p_typo = 0.2;  // swap/drop/duplicate one character
  double p_drop = 0.15; // drop a token of a multi-word value
};

// Perturbs only the condition-value tokens; deterministic per seed.
std::vector<std::string> add_noise(const std::vector<std::string>& question,
                                   const std::vector<ValueSpan>& spans, uint64_t seed,
                                   const NoisePolicy& policy);

struct SplitRatios {
  double train = 0.8, dev = 0.1, test = 0.1;
};

struct Splits {
  std::vector<QaPair> train, dev, test;
};

Splits split(const std::vector<QaPair>& pairs, const SplitRatios& ratios, uint64_t seed);

}  // namespace q2sql
