#include "q2sql/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "q2sql/rng.hpp"
#include "q2sql/text.hpp"

namespace q2sql {

namespace {

const std::vector<std::string> kDiseases = {
    "bowel obstruction",      "acute renal failure",   "coronary artery disease",
    "congestive heart failure", "diabetic ketoacidosis", "upper gi bleeding",
    "altered mental status",  "aortic stenosis",       "severe pneumonia",
    "subdural hematoma"};

const std::vector<std::string> kDiagnosisTitles = {
    "chronic kidney disease", "acute respiratory failure", "urinary tract infection",
    "atrial fibrillation",    "sepsis due to pneumonia",   "cerebral artery occlusion",
    "fracture of femur",      "alcohol withdrawal delirium", "pulmonary embolism",
    "gastrointestinal hemorrhage"};

const std::vector<std::string> kProcedureTitles = {
    "abdomen artery incision",   "coronary artery bypass graft", "cardiac catheterization",
    "venous catheter insertion", "knee joint replacement",       "spinal canal exploration",
    "gastric bypass revision",   "temporary tracheostomy",       "hip replacement surgery",
    "percutaneous abdominal drainage"};

const std::vector<std::string> kDrugs = {
    "warfarin sodium",     "insulin glargine",   "metoprolol tartrate",
    "potassium chloride",  "magnesium sulfate",  "heparin flush",
    "albuterol inhaler",   "furosemide injection", "aspirin tablet",
    "vancomycin hydrochloride"};

const std::vector<std::string> kLabLabels = {
    "white blood cells", "platelet volume",    "hemoglobin level", "serum creatinine",
    "blood urea nitrogen", "lactate level",    "bilirubin total",  "glucose level"};

const std::vector<std::string> kAdmitLocations = {
    "emergency room admit", "hospital transfer", "clinic referral", "physician referral"};

const std::vector<std::string> kDischargeLocations = {
    "home health care", "rehab facility", "skilled nursing facility", "home"};

const std::vector<std::string> kGenders = {"f", "m"};
const std::vector<std::string> kMarital = {"single", "married", "divorced", "widowed"};
const std::vector<std::string> kAdmitTypes = {"emergency", "elective", "urgent", "newborn"};
const std::vector<std::string> kInsurance = {"medicare", "medicaid", "private", "government"};
const std::vector<std::string> kEthnicity = {"white", "black", "hispanic", "asian"};
const std::vector<std::string> kLanguage = {"engl", "span", "russ", "port"};
const std::vector<std::string> kReligion = {"catholic", "protestant", "jewish", "buddhist"};
const std::vector<std::string> kLabFlags = {"normal", "abnormal", "delta"};
const std::vector<std::string> kLabFluids = {"blood", "urine"};
const std::vector<std::string> kLabCategories = {"chemistry", "hematology", "blood gas"};
const std::vector<std::string> kRoutes = {"oral", "iv", "topical", "intramuscular"};
const std::vector<std::string> kDrugTypes = {"main", "base", "additive"};
const std::vector<std::string> kValueUnits = {"mg dl", "k ul", "g dl", "mmol l"};

const std::vector<int> kDayThresholds = {3, 5, 7, 10, 14, 21};
const std::vector<int> kAgeThresholds = {30, 40, 50, 60, 70, 80};

std::string patient_name(int i) {
  static const std::vector<std::string> pre = {
      "al",  "bar", "car", "dun", "el",  "far",  "gor", "har", "iv",  "jen", "kel", "lor", "mar",
      "nor", "or",  "per", "quin", "ros", "sul", "tar", "ul",  "var", "wel", "xan", "yor", "zel"};
  static const std::vector<std::string> suf = {
      "ba",  "den", "field", "gate", "ham",  "kin",  "ley", "man",   "mont", "ner",
      "rick", "son", "ston", "ton",  "vale", "wick", "wood", "worth", "by",   "dale"};
  const int n = static_cast<int>(pre.size() * suf.size());
  std::string name = pre[static_cast<size_t>(i) % pre.size()] +
                     suf[(static_cast<size_t>(i) / pre.size()) % suf.size()];
  if (i >= n) name += std::to_string(i / n);
  return name;
}

std::string short_title_of(const std::string& long_title) {
  std::istringstream is(long_title);
  std::string a, b;
  is >> a >> b;
  return b.empty() ? a : a + " " + b;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

}  // namespace

SchemaSpec default_schema() {
  using K = ColumnKind;
  SchemaSpec s;
  s.tables.push_back(
      {"demographic",
       {{"subject_id", K::Key},       {"hadm_id", K::Key},
        {"name", K::Textual},         {"marital_status", K::Textual},
        {"age", K::Numeric},          {"dob_year", K::Numeric},
        {"gender", K::Textual},       {"language", K::Textual},
        {"religion", K::Textual},     {"admission_type", K::Textual},
        {"days_stay", K::Numeric},    {"insurance", K::Textual},
        {"ethnicity", K::Textual},    {"expire_flag", K::Numeric},
        {"admission_location", K::Textual}, {"discharge_location", K::Textual},
        {"diagnosis", K::Textual},    {"dod_year", K::Numeric},
        {"admityear", K::Numeric},    {"dischyear", K::Numeric},
        {"admission_month", K::Numeric}, {"icustay_total", K::Numeric},
        {"ward_id", K::Numeric}}});
  s.tables.push_back({"diagnoses",
                      {{"subject_id", K::Key},
                       {"hadm_id", K::Key},
                       {"icd9_code", K::Textual},
                       {"short_title", K::Textual},
                       {"long_title", K::Textual}}});
  s.tables.push_back({"procedures",
                      {{"subject_id", K::Key},
                       {"hadm_id", K::Key},
                       {"icd9_code", K::Textual},
                       {"short_title", K::Textual},
                       {"long_title", K::Textual}}});
  s.tables.push_back({"prescriptions",
                      {{"subject_id", K::Key},
                       {"hadm_id", K::Key},
                       {"drug_type", K::Textual},
                       {"drug", K::Textual},
                       {"formulary_drug_cd", K::Textual},
                       {"dose_unit", K::Textual},
                       {"route", K::Textual}}});
  s.tables.push_back({"lab",
                      {{"subject_id", K::Key},
                       {"hadm_id", K::Key},
                       {"itemid", K::Numeric},
                       {"charttime", K::Textual},
                       {"flag", K::Textual},
                       {"value_unit", K::Textual},
                       {"label", K::Textual},
                       {"fluid", K::Textual},
                       {"category", K::Textual}}});
  return s;
}

std::vector<std::string> schema_tokens(const SchemaSpec& spec) {
  std::vector<std::string> out = {"select", "count", "max",  "min", "avg", "distinct",
                                  "from",   "where", "inner", "join", "on",  "and",
                                  "=",      ">",     "<",    ">=",  "<=",  "(",
                                  ")",      ","};
  for (const auto& t : spec.tables) {
    out.push_back(t.name);
    out.push_back(t.name + ".hadm_id");
    for (const auto& c : t.columns) out.push_back(t.name + ".\"" + c.name + "\"");
  }
  return out;
}

Database gen_database(const SchemaSpec& spec, uint64_t seed, int n_patients, LookupTable* lut) {
  if (n_patients < 1) throw std::invalid_argument("gen_database: n_patients must be >= 1");
  Rng rng(seed);
  Database db;
  for (const auto& ts : spec.tables) {
    Table t;
    t.name = ts.name;
    for (const auto& c : ts.columns) t.columns.push_back(c.name);
    db.tables.push_back(std::move(t));
  }
  Table& demo = db.tables[0];
  Table& diag = db.tables[1];
  Table& proc = db.tables[2];
  Table& pres = db.tables[3];
  Table& lab = db.tables[4];

  for (int i = 0; i < n_patients; ++i) {
    const std::string subject = std::to_string(i + 1);
    const std::string hadm = std::to_string(100000 + i);
    const int age = rng.uniform_int(18, 90);
    const int admityear = rng.uniform_int(2100, 2110);
    demo.rows.push_back({subject, hadm, patient_name(i), rng.pick(kMarital),
                         std::to_string(age), std::to_string(admityear - age),
                         rng.pick(kGenders), rng.pick(kLanguage), rng.pick(kReligion),
                         rng.pick(kAdmitTypes), std::to_string(rng.uniform_int(1, 40)),
                         rng.pick(kInsurance), rng.pick(kEthnicity),
                         std::to_string(rng.uniform_int(0, 1)), rng.pick(kAdmitLocations),
                         rng.pick(kDischargeLocations), rng.pick(kDiseases),
                         std::to_string(admityear + rng.uniform_int(0, 5)),
                         std::to_string(admityear), std::to_string(admityear),
                         std::to_string(rng.uniform_int(1, 12)),
                         std::to_string(rng.uniform_int(0, 3)),
                         std::to_string(rng.uniform_int(1, 50))});

    const int n_diag = rng.uniform_int(1, 2);
    for (int k = 0; k < n_diag; ++k) {
      const std::string& title = rng.pick(kDiagnosisTitles);
      diag.rows.push_back({subject, hadm, "d" + std::to_string(rng.uniform_int(100, 999)),
                           short_title_of(title), title});
    }
    const int n_proc = rng.uniform_int(1, 2);
    for (int k = 0; k < n_proc; ++k) {
      const std::string& title = rng.pick(kProcedureTitles);
      proc.rows.push_back({subject, hadm, "p" + std::to_string(rng.uniform_int(100, 999)),
                           short_title_of(title), title});
    }
    const int n_pres = rng.uniform_int(1, 2);
    for (int k = 0; k < n_pres; ++k) {
      const std::string& drug = rng.pick(kDrugs);
      pres.rows.push_back({subject, hadm, rng.pick(kDrugTypes), drug,
                           drug.substr(0, 4) + std::to_string(rng.uniform_int(10, 99)),
                           rng.pick(kValueUnits), rng.pick(kRoutes)});
    }
    const int n_lab = rng.uniform_int(1, 2);
    for (int k = 0; k < n_lab; ++k) {
      lab.rows.push_back({subject, hadm, std::to_string(50800 + rng.uniform_int(0, 99)),
                          std::to_string(admityear) + "-" + std::to_string(rng.uniform_int(1, 12)),
                          rng.pick(kLabFlags), rng.pick(kValueUnits), rng.pick(kLabLabels),
                          rng.pick(kLabFluids), rng.pick(kLabCategories)});
    }
  }

  if (lut) {
    *lut = LookupTable{};
    for (size_t ti = 0; ti < spec.tables.size(); ++ti) {
      const TableSpec& ts = spec.tables[ti];
      const Table& t = db.tables[ti];
      for (size_t ci = 0; ci < ts.columns.size(); ++ci) {
        const auto key = std::make_pair(ts.name, ts.columns[ci].name);
        lut->kinds[key] = ts.columns[ci].kind;
        if (ts.columns[ci].kind != ColumnKind::Textual) continue;
        std::set<std::string> distinct;
        for (const auto& row : t.rows) distinct.insert(row[ci]);
        lut->values[key] = std::vector<std::string>(distinct.begin(), distinct.end());
      }
    }
  }
  return db;
}

namespace {

// one instantiated condition plus its question phrasing
struct CondDraw {
  Condition cond;
  std::vector<std::string> phrase;  // question tokens
  int value_start = 0;              // offset of the value tokens inside phrase
  int value_len = 0;
};

std::vector<std::string> with_value(std::vector<std::string> head, const std::string& value,
                                    std::vector<std::string> tail, CondDraw& out) {
  const std::vector<std::string> vw = split_words(value);
  out.value_start = static_cast<int>(head.size());
  out.value_len = static_cast<int>(vw.size());
  head.insert(head.end(), vw.begin(), vw.end());
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

// demographic hub row plus one sampled row per child table for the same admission
struct PatientDraw {
  const std::vector<std::string>* demo = nullptr;
  std::map<std::string, const std::vector<std::string>*> child;  // table -> row
};

PatientDraw draw_patient(const Database& db, Rng& rng) {
  PatientDraw pd;
  const Table& demo = *db.find("demographic");
  const size_t i = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(demo.rows.size()) - 1));
  pd.demo = &demo.rows[i];
  const std::string& hadm = demo.rows[i][1];
  for (const char* name : {"diagnoses", "procedures", "prescriptions", "lab"}) {
    const Table& t = *db.find(name);
    std::vector<const std::vector<std::string>*> match;
    for (const auto& row : t.rows)
      if (row[1] == hadm) match.push_back(&row);
    pd.child[name] = match[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(match.size()) - 1))];
  }
  return pd;
}

std::string demo_cell(const Database& db, const PatientDraw& pd, const std::string& col) {
  return (*pd.demo)[static_cast<size_t>(db.find("demographic")->col_index(col))];
}

std::string child_cell(const Database& db, const PatientDraw& pd, const std::string& table,
                       const std::string& col) {
  return (*pd.child.at(table))[static_cast<size_t>(db.find(table)->col_index(col))];
}

// numeric threshold consistent with the row value and the operator
std::string pick_threshold(Rng& rng, const std::vector<int>& pool, double row_value, bool greater) {
  std::vector<int> ok;
  for (int t : pool)
    if (greater ? row_value > t : row_value < t) ok.push_back(t);
  if (ok.empty()) return "";
  return std::to_string(ok[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(ok.size()) - 1))]);
}

CondDraw draw_condition(const Database& db, const PatientDraw& pd, Rng& rng, int which) {
  CondDraw d;
  switch (which) {
    case 0: {
      const std::string v = demo_cell(db, pd, "gender");
      d.cond = {"demographic", "gender", "=", v};
      d.phrase = with_value({"are", "of", "sex"}, v, {}, d);
      break;
    }
    case 1: {
      const std::string v = demo_cell(db, pd, "admission_type");
      d.cond = {"demographic", "admission_type", "=", v};
      d.phrase = with_value({"had", "an", "admission", "type", "of"}, v, {}, d);
      break;
    }
    case 2: {
      const std::string v = demo_cell(db, pd, "marital_status");
      d.cond = {"demographic", "marital_status", "=", v};
      d.phrase = with_value({"have", "a", "marital", "status", "of"}, v, {}, d);
      break;
    }
    case 3: {
      const std::string v = demo_cell(db, pd, "diagnosis");
      d.cond = {"demographic", "diagnosis", "=", v};
      d.phrase = with_value({"have", "a", "primary", "disease", "of"}, v, {}, d);
      break;
    }
    case 4: {
      const std::string v = demo_cell(db, pd, "insurance");
      d.cond = {"demographic", "insurance", "=", v};
      d.phrase = with_value({"are", "covered", "by"}, v, {"insurance"}, d);
      break;
    }
    case 5: {
      const std::string v = demo_cell(db, pd, "ethnicity");
      d.cond = {"demographic", "ethnicity", "=", v};
      d.phrase = with_value({"belong", "to", "the"}, v, {"ethnic", "group"}, d);
      break;
    }
    case 6: {
      const std::string v = demo_cell(db, pd, "admission_location");
      d.cond = {"demographic", "admission_location", "=", v};
      d.phrase = with_value({"were", "admitted", "via"}, v, {}, d);
      break;
    }
    case 7: {
      const bool greater = rng.bernoulli(0.5);
      const double row = std::stod(demo_cell(db, pd, "days_stay"));
      const std::string v = pick_threshold(rng, kDayThresholds, row, greater);
      if (v.empty()) return draw_condition(db, pd, rng, 0);
      d.cond = {"demographic", "days_stay", greater ? ">" : "<", v};
      d.phrase = with_value({"stayed", "in", "hospital", greater ? "more" : "less", "than"}, v,
                            {"days"}, d);
      break;
    }
    case 8: {
      const bool greater = rng.bernoulli(0.5);
      const double row = std::stod(demo_cell(db, pd, "age"));
      const std::string v = pick_threshold(rng, kAgeThresholds, row, greater);
      if (v.empty()) return draw_condition(db, pd, rng, 0);
      d.cond = {"demographic", "age", greater ? ">" : "<", v};
      d.phrase = with_value({"are", greater ? "older" : "younger", "than"}, v, {"years", "old"}, d);
      break;
    }
    case 9: {
      const std::string v = child_cell(db, pd, "procedures", "long_title");
      d.cond = {"procedures", "long_title", "=", v};
      d.phrase = with_value({"underwent", "the", "procedure"}, v, {}, d);
      break;
    }
    case 10: {
      const std::string v = child_cell(db, pd, "diagnoses", "long_title");
      d.cond = {"diagnoses", "long_title", "=", v};
      d.phrase = with_value({"received", "a", "diagnosis", "of"}, v, {}, d);
      break;
    }
    case 11: {
      const std::string v = child_cell(db, pd, "prescriptions", "drug");
      d.cond = {"prescriptions", "drug", "=", v};
      d.phrase = with_value({"were", "prescribed"}, v, {}, d);
      break;
    }
    case 12: {
      const std::string v = child_cell(db, pd, "prescriptions", "route");
      d.cond = {"prescriptions", "route", "=", v};
      d.phrase = with_value({"received", "medication", "by", "the"}, v, {"route"}, d);
      break;
    }
    case 13: {
      const std::string v = child_cell(db, pd, "lab", "flag");
      d.cond = {"lab", "flag", "=", v};
      d.phrase = with_value({"had", "a", "laboratory", "result", "flagged"}, v, {}, d);
      break;
    }
    case 14: {
      const std::string v = child_cell(db, pd, "lab", "fluid");
      d.cond = {"lab", "fluid", "=", v};
      d.phrase = with_value({"had", "a", "laboratory", "test", "of", "the", "fluid"}, v, {}, d);
      break;
    }
    case 15: {
      const std::string v = child_cell(db, pd, "lab", "label");
      d.cond = {"lab", "label", "=", v};
      d.phrase = with_value({"had", "a", "laboratory", "measurement", "of"}, v, {}, d);
      break;
    }
    default:
      throw std::logic_error("draw_condition: bad index");
  }
  return d;
}

constexpr int kNumCondSpecs = 16;

// question noun phrases for demographic attributes (template 1)
const std::vector<std::pair<std::string, std::vector<std::string>>> kAttrNouns = {
    {"age", {"age"}},
    {"admission_type", {"admission", "type"}},
    {"days_stay", {"length", "of", "hospital", "stay"}},
    {"insurance", {"insurance", "coverage"}},
    {"marital_status", {"marital", "status"}},
    {"ethnicity", {"ethnic", "background"}},
    {"gender", {"sex"}},
    {"admission_location", {"admission", "location"}},
    {"diagnosis", {"primary", "disease"}},
    {"religion", {"religion"}},
    {"language", {"language"}}};

void append(std::vector<std::string>& out, const std::vector<std::string>& xs) {
  out.insert(out.end(), xs.begin(), xs.end());
}

// assemble tables list: hub first, then referenced child tables in first-use order
void finish_tables(SqlQuery& q) {
  q.tables = {"demographic"};
  for (const auto& c : q.conditions)
    if (std::find(q.tables.begin(), q.tables.end(), c.table) == q.tables.end())
      q.tables.push_back(c.table);
}

}  // namespace

std::vector<QaPair> gen_question_pairs(const Database& db, uint64_t seed, int n) {
  if (db.tables.empty() || db.tables[0].rows.empty())
    throw std::invalid_argument("gen_question_pairs: empty database");
  Rng rng(seed);
  std::vector<QaPair> out;
  out.reserve(static_cast<size_t>(n));

  while (static_cast<int>(out.size()) < n) {
    const int tmpl = rng.uniform_int(0, 3);
    const PatientDraw pd = draw_patient(db, rng);
    QaPair pair;
    SqlQuery q;

    if (tmpl == 0) {
      // attribute lookup for one named patient
      int a = rng.uniform_int(0, static_cast<int>(kAttrNouns.size()) - 1);
      int b = rng.uniform_int(0, static_cast<int>(kAttrNouns.size()) - 1);
      while (b == a) b = rng.uniform_int(0, static_cast<int>(kAttrNouns.size()) - 1);
      const std::string name = demo_cell(db, pd, "name");
      pair.question = {"what", "is", "the"};
      append(pair.question, kAttrNouns[static_cast<size_t>(a)].second);
      append(pair.question, {"as", "well", "as", "the"});
      append(pair.question, kAttrNouns[static_cast<size_t>(b)].second);
      append(pair.question, {"of", "patient"});
      pair.value_spans.push_back({static_cast<int>(pair.question.size()), 1});
      pair.question.push_back(name);
      pair.question.push_back("?");
      q.agg = AggOp::None;
      q.agg_cols = {{"demographic", kAttrNouns[static_cast<size_t>(a)].first},
                    {"demographic", kAttrNouns[static_cast<size_t>(b)].first}};
      q.conditions = {{"demographic", "name", "=", name}};
    } else {
      const int n_conds = rng.uniform_int(1, 2);
      std::vector<CondDraw> draws;
      std::set<std::string> used_cols;
      while (static_cast<int>(draws.size()) < n_conds) {
        CondDraw d = draw_condition(db, pd, rng, rng.uniform_int(0, kNumCondSpecs - 1));
        const std::string key = d.cond.table + "." + d.cond.column;
        if (!used_cols.insert(key).second) continue;
        draws.push_back(std::move(d));
      }

      if (tmpl == 1) {
        pair.question = {"show", "me", "all", "the", "patients", "who"};
        q.agg = AggOp::None;
        q.agg_cols = {{"demographic", "name"}};
      } else if (tmpl == 2) {
        pair.question = {"how", "many", "patients"};
        q.agg = AggOp::Count;
        q.distinct = true;
        q.agg_cols = {{"demographic", "subject_id"}};
      } else {
        const int op = rng.uniform_int(0, 2);
        q.agg = op == 0 ? AggOp::Max : op == 1 ? AggOp::Min : AggOp::Avg;
        const bool use_age = rng.bernoulli(0.5);
        q.agg_cols = {{"demographic", use_age ? "age" : "days_stay"}};
        pair.question = {"what", "is", "the",
                         op == 0 ? "maximum" : op == 1 ? "minimum" : "average"};
        if (use_age)
          pair.question.push_back("age");
        else
          append(pair.question, {"number", "of", "hospital", "days"});
        append(pair.question, {"of", "patients", "who"});
      }

      for (size_t i = 0; i < draws.size(); ++i) {
        if (i > 0) append(pair.question, {"as", "well", "as"});
        pair.value_spans.push_back(
            {static_cast<int>(pair.question.size()) + draws[i].value_start, draws[i].value_len});
        append(pair.question, draws[i].phrase);
        q.conditions.push_back(draws[i].cond);
      }
      pair.question.push_back("?");
    }

    finish_tables(q);
    pair.query = q;
    pair.sql = serialize(q);
    out.push_back(std::move(pair));
  }
  return out;
}

namespace {

const std::map<std::string, std::string>& abbreviation_map() {
  static const std::map<std::string, std::string> m = {
      {"obstruction", "obstruct"},     {"failure", "fail"},
      {"disease", "dis"},              {"artery", "art"},
      {"hemorrhage", "hem"},           {"infection", "infect"},
      {"respiratory", "resp"},         {"catheterization", "cath"},
      {"replacement", "replc"},        {"chloride", "cl"},
      {"sodium", "na"},                {"magnesium", "mag"},
      {"creatinine", "creat"},         {"hemoglobin", "hgb"},
      {"platelet", "plt"},             {"glucose", "gluc"},
      {"emergency", "emerg"},          {"married", "marr"},
      {"divorced", "div"},             {"abnormal", "abnorm"},
      {"injection", "inj"},            {"pneumonia", "pna"},
      {"fibrillation", "fib"},         {"catheter", "cath"},
      {"withdrawal", "wdrawal"},       {"gastrointestinal", "gi"}};
  return m;
}

std::string typo(const std::string& w, Rng& rng) {
  if (w.size() < 2) return w;
  std::string out = w;
  const int kind = rng.uniform_int(0, 2);
  const int i = rng.uniform_int(0, static_cast<int>(w.size()) - 2);
  if (kind == 0) std::swap(out[static_cast<size_t>(i)], out[static_cast<size_t>(i) + 1]);
  else if (kind == 1) out.erase(static_cast<size_t>(i), 1);
  else out.insert(static_cast<size_t>(i), 1, out[static_cast<size_t>(i)]);
  return out;
}

}  // namespace

std::vector<std::string> add_noise(const std::vector<std::string>& question,
                                   const std::vector<ValueSpan>& spans, uint64_t seed,
                                   const NoisePolicy& policy) {
  Rng rng(seed);
  std::vector<std::string> out = question;
  std::vector<bool> dropped(question.size(), false);
  for (const ValueSpan& span : spans) {
    int kept = span.len;
    for (int k = 0; k < span.len; ++k) {
      const size_t pos = static_cast<size_t>(span.start + k);
      if (span.len > 1 && kept > 1 && rng.bernoulli(policy.p_drop)) {
        dropped[pos] = true;
        --kept;
        continue;
      }
      std::string& w = out[pos];
      auto it = abbreviation_map().find(w);
      if (it != abbreviation_map().end() && rng.bernoulli(policy.p_abbr)) w = it->second;
      if (rng.bernoulli(policy.p_typo)) w = typo(w, rng);
    }
  }
  std::vector<std::string> result;
  for (size_t i = 0; i < out.size(); ++i)
    if (!dropped[i]) result.push_back(out[i]);
  return result;
}

Splits split(const std::vector<QaPair>& pairs, const SplitRatios& ratios, uint64_t seed) {
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    throw std::invalid_argument("split: ratios must sum to 1");
  std::vector<int> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);
  const int n = static_cast<int>(pairs.size());
  const int n_train = static_cast<int>(std::lround(ratios.train * n));
  const int n_dev = static_cast<int>(std::lround(ratios.dev * n));
  Splits s;
  for (int i = 0; i < n; ++i) {
    const QaPair& p = pairs[static_cast<size_t>(order[static_cast<size_t>(i)])];
    if (i < n_train) s.train.push_back(p);
    else if (i < n_train + n_dev) s.dev.push_back(p);
    else s.test.push_back(p);
  }
  return s;
}

}  // namespace q2sql
