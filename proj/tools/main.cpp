#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "q2sql/datagen.hpp"
#include "q2sql/eval.hpp"
#include "q2sql/infer.hpp"
#include "q2sql/train.hpp"

namespace fs = std::filesystem;
using namespace q2sql;

namespace {

std::vector<std::string> table_names() {
  std::vector<std::string> out;
  for (const auto& t : default_schema().tables) out.push_back(t.name);
  return out;
}

std::vector<std::string> load_lines(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

struct Prediction {
  std::string id;
  std::string sql;
  double log_prob = 0.0;
};

std::vector<Prediction> load_predictions(const std::string& path) {
  std::vector<Prediction> out;
  for (const auto& line : load_lines(path)) {
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw std::runtime_error("prediction line needs id<TAB>sql<TAB>logprob: " + line);
    out.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1),
                   std::stod(line.substr(t2 + 1))});
  }
  return out;
}

void save_predictions(const std::vector<Prediction>& preds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const auto& p : preds) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", p.log_prob);
    f << p.id << "\t" << p.sql << "\t" << buf << "\n";
  }
}

int cmd_gen_data(const std::string& out_dir, uint64_t seed, int patients, int pairs,
                 const NoisePolicy& policy) {
  fs::create_directories(out_dir + "/db");
  const SchemaSpec spec = default_schema();
  LookupTable lut;
  const Database db = gen_database(spec, seed, patients, &lut);
  save_database(db, out_dir + "/db");
  save_lookup_table(lut, out_dir + "/lookup");

  {
    std::ofstream f(out_dir + "/schema_tokens.txt");
    for (const auto& t : schema_tokens(spec)) f << t << "\n";
  }

  const auto all = gen_question_pairs(db, seed + 1, pairs);
  const Splits s = split(all, {}, seed + 2);
  auto to_text = [](const std::vector<QaPair>& xs) {
    std::vector<QaPairText> out;
    for (const auto& p : xs) out.push_back({join_tokens(p.question), p.sql});
    return out;
  };
  save_pairs(to_text(s.train), out_dir + "/train.tsv");
  save_pairs(to_text(s.dev), out_dir + "/dev.tsv");
  save_pairs(to_text(s.test), out_dir + "/test.tsv");

  std::vector<QaPairText> noised;
  for (size_t i = 0; i < s.test.size(); ++i) {
    const QaPair& p = s.test[i];
    noised.push_back({join_tokens(add_noise(p.question, p.value_spans, seed + 3 + i, policy)),
                      p.sql});
  }
  save_pairs(noised, out_dir + "/test_noised.tsv");
  std::cerr << "wrote " << s.train.size() << "/" << s.dev.size() << "/" << s.test.size()
            << " pairs under " << out_dir << "\n";
  return 0;
}

int cmd_build_vocab(const std::string& data_dir, int min_freq) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& p : load_pairs(data_dir + "/train.tsv")) {
    corpus.push_back(tokenize(p.question));
    corpus.push_back(tokenize(p.sql));
  }
  const Vocab v = build_vocab(corpus, load_lines(data_dir + "/schema_tokens.txt"), min_freq);
  save_vocab(v, data_dir + "/vocab");
  std::cerr << "vocab size " << v.size() << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir, TrainConfig cfg,
              bool no_temporal, bool no_dynamic, bool no_copy, bool quiet) {
  fs::create_directories(out_dir);
  const Vocab vocab = load_vocab(data_dir + "/vocab");
  const auto train_set = encode_dataset(load_pairs(data_dir + "/train.tsv"), vocab);
  const auto dev_set = encode_dataset(load_pairs(data_dir + "/dev.tsv"), vocab);

  ModelConfig mcfg;
  mcfg.vocab_size = vocab.size();
  mcfg.embed_dim = cfg.embed_dim;
  mcfg.hidden = cfg.hidden;
  mcfg.no_temporal = no_temporal;
  mcfg.no_dynamic = no_dynamic;
  mcfg.no_copy = no_copy;
  ParamStore params = init_params(mcfg, cfg.seed);

  const TrainResult r = train(train_set, dev_set, params, cfg, out_dir, quiet);
  std::cerr << "best epoch " << r.best_epoch << " dev loss " << r.best_dev_loss << "\n";
  return 0;
}

int cmd_predict(const std::string& data_dir, const std::string& ckpt, const std::string& input,
                const std::string& out_path, int beam, bool greedy) {
  const Vocab vocab = load_vocab(data_dir + "/vocab");
  ParamStore params = load_checkpoint(ckpt);
  const ModelConfig cfg = config_from_params(params);
  if (cfg.vocab_size != vocab.size())
    throw std::runtime_error("checkpoint vocabulary size does not match " + data_dir + "/vocab");

  BeamConfig bc;
  bc.beam = greedy ? 1 : beam;
  std::vector<Prediction> preds;
  const auto pairs = load_pairs(input);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const QuestionEncoding q = encode_question(tokenize(pairs[i].question), vocab);
    const auto hyps = beam_search(params, cfg, q, vocab, bc);
    const std::vector<std::string> tokens = replace_placeholders(hyps[0], vocab, q);
    preds.push_back({std::to_string(i), join_tokens(tokens), hyps[0].log_prob});
  }
  save_predictions(preds, out_path);
  std::cerr << "wrote " << preds.size() << " predictions to " << out_path << "\n";
  return 0;
}

int cmd_recover(const std::string& pred_path, const std::string& lookup_stem,
                const std::string& out_path) {
  const LookupTable lut = load_lookup_table(lookup_stem);
  auto preds = load_predictions(pred_path);
  int recovered = 0, unparsed = 0;
  for (auto& p : preds) {
    auto q = parse_sql(p.sql);
    if (!q) {
      ++unparsed;
      continue;
    }
    const SqlQuery fixed = recover_query(*q, lut);
    if (!(fixed == *q)) ++recovered;
    p.sql = serialize(fixed);
  }
  save_predictions(preds, out_path);
  std::cerr << "recovered values in " << recovered << " queries (" << unparsed
            << " unparseable left untouched)\n";
  return 0;
}

int cmd_execute(const std::string& db_dir, const std::string& sql, const std::string& pred_path) {
  const Database db = load_database(db_dir, table_names());
  std::vector<std::string> queries;
  if (!sql.empty()) queries.push_back(sql);
  if (!pred_path.empty())
    for (const auto& p : load_predictions(pred_path)) queries.push_back(p.sql);
  if (queries.empty()) throw std::runtime_error("execute: need --sql or --pred");

  int status = 0;
  for (const auto& text : queries) {
    ParseError perr;
    auto q = parse_sql(text, &perr);
    if (!q) {
      std::cout << "error: " << perr.message << "\n";
      status = 1;
      continue;
    }
    ExecError xerr;
    auto rs = execute(*q, db, &xerr);
    if (!rs) {
      std::cout << "error: " << xerr.message << "\n";
      status = 1;
      continue;
    }
    if (rs->empty()) std::cout << "(empty)\n";
    for (const auto& row : *rs) {
      for (size_t i = 0; i < row.size(); ++i) std::cout << (i ? "\t" : "") << row[i];
      std::cout << "\n";
    }
  }
  return status;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gold_path,
                 const std::string& db_dir, const std::string& out_stem, bool recover,
                 const std::string& lookup_stem) {
  const Database db = load_database(db_dir, table_names());
  std::vector<std::string> pred, gold;
  for (const auto& p : load_predictions(pred_path)) pred.push_back(p.sql);
  for (const auto& p : load_pairs(gold_path)) gold.push_back(p.sql);

  const EvalReport raw = evaluate(gold, pred, db);
  std::cout << "== raw ==\n" << report_text(raw);
  if (!out_stem.empty()) save_report(raw, out_stem);

  if (recover) {
    if (lookup_stem.empty()) throw std::runtime_error("evaluate --recover needs --lookup");
    const LookupTable lut = load_lookup_table(lookup_stem);
    std::vector<std::string> fixed;
    for (const auto& s : pred) {
      auto q = parse_sql(s);
      fixed.push_back(q ? serialize(recover_query(*q, lut)) : s);
    }
    const EvalReport rec = evaluate(gold, fixed, db);
    std::cout << "== recovered ==\n" << report_text(rec);
    if (!out_stem.empty()) save_report(rec, out_stem + "_recovered");
  }
  return 0;
}

int cmd_attention_dump(const std::string& data_dir, const std::string& ckpt,
                       const std::string& question, int beam) {
  const Vocab vocab = load_vocab(data_dir + "/vocab");
  ParamStore params = load_checkpoint(ckpt);
  const ModelConfig cfg = config_from_params(params);
  const QuestionEncoding q = encode_question(tokenize(question), vocab);
  BeamConfig bc;
  bc.beam = beam;
  const auto hyps = beam_search(params, cfg, q, vocab, bc);
  std::cout << attention_report(hyps[0], vocab, q);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"question-to-SQL pipeline"};
  app.require_subcommand(1);

  std::string data_dir = "data", out_dir, ckpt, input, out_path, sql, pred_path, gold_path,
              db_dir, lookup_stem, question, config_path, out_stem;
  uint64_t seed = 1;
  int patients = 500, pairs = 2000, beam = 5, min_freq = 5;
  bool greedy = false, recover = false, quiet = false;
  bool no_temporal = false, no_dynamic = false, no_copy = false;
  NoisePolicy policy;
  TrainConfig tcfg;

  auto* gen = app.add_subcommand("gen-data", "generate database, look-up table, and QA splits");
  gen->add_option("--out", data_dir, "output data directory")->capture_default_str();
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--patients", patients)->capture_default_str();
  gen->add_option("--pairs", pairs)->capture_default_str();
  gen->add_option("--p-abbr", policy.p_abbr)->capture_default_str();
  gen->add_option("--p-typo", policy.p_typo)->capture_default_str();
  gen->add_option("--p-drop", policy.p_drop)->capture_default_str();

  auto* bv = app.add_subcommand("build-vocab", "build vocabulary from the training split");
  bv->add_option("--data", data_dir)->capture_default_str();
  bv->add_option("--min-freq", min_freq)->capture_default_str();

  auto* tr = app.add_subcommand("train", "train the translation model");
  tr->add_option("--data", data_dir)->capture_default_str();
  tr->add_option("--out", out_dir, "checkpoint directory")->required();
  tr->add_option("--config", config_path, "key=value training config file");
  tr->add_option("--seed", tcfg.seed)->capture_default_str();
  tr->add_option("--epochs", tcfg.epochs)->capture_default_str();
  tr->add_option("--embed", tcfg.embed_dim)->capture_default_str();
  tr->add_option("--hidden", tcfg.hidden)->capture_default_str();
  tr->add_flag("--no-temporal-attention", no_temporal, "plain softmax encoder attention");
  tr->add_flag("--no-dynamic-attention", no_dynamic, "zero decoder-side context");
  tr->add_flag("--no-copy", no_copy, "generation distribution only");
  tr->add_flag("--quiet", quiet);

  auto* pr = app.add_subcommand("predict", "beam-search decode a question file");
  pr->add_option("--data", data_dir)->capture_default_str();
  pr->add_option("--checkpoint", ckpt)->required();
  pr->add_option("--input", input, "question TSV")->required();
  pr->add_option("--out", out_path)->required();
  pr->add_option("--beam", beam)->capture_default_str();
  pr->add_flag("--greedy", greedy, "equivalent to --beam 1");

  auto* rc = app.add_subcommand("recover", "look-up-table condition-value recovery");
  rc->add_option("--pred", pred_path)->required();
  rc->add_option("--lookup", lookup_stem)->required();
  rc->add_option("--out", out_path)->required();

  auto* ex = app.add_subcommand("execute", "run SQL against the generated database");
  ex->add_option("--db", db_dir)->required();
  ex->add_option("--sql", sql);
  ex->add_option("--pred", pred_path);

  auto* ev = app.add_subcommand("evaluate", "score predictions against gold SQL");
  ev->add_option("--pred", pred_path)->required();
  ev->add_option("--gold", gold_path)->required();
  ev->add_option("--db", db_dir)->required();
  ev->add_option("--out", out_stem, "report stem");
  ev->add_flag("--recover", recover, "also score after value recovery");
  ev->add_option("--lookup", lookup_stem);

  auto* ad = app.add_subcommand("attention-dump", "per-step source attention for one question");
  ad->add_option("--data", data_dir)->capture_default_str();
  ad->add_option("--checkpoint", ckpt)->required();
  ad->add_option("--question", question)->required();
  ad->add_option("--beam", beam)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(data_dir, seed, patients, pairs, policy);
    if (bv->parsed()) return cmd_build_vocab(data_dir, min_freq);
    if (tr->parsed()) {
      if (!config_path.empty()) {
        const uint64_t cli_seed = tcfg.seed;
        const int cli_epochs = tcfg.epochs;
        const int cli_embed = tcfg.embed_dim, cli_hidden = tcfg.hidden;
        TrainConfig file_cfg = load_train_config(config_path);
        // explicit flags win over the config file
        if (tr->count("--seed")) file_cfg.seed = cli_seed;
        if (tr->count("--epochs")) file_cfg.epochs = cli_epochs;
        if (tr->count("--embed")) file_cfg.embed_dim = cli_embed;
        if (tr->count("--hidden")) file_cfg.hidden = cli_hidden;
        tcfg = file_cfg;
      }
      return cmd_train(data_dir, out_dir, tcfg, no_temporal, no_dynamic, no_copy, quiet);
    }
    if (pr->parsed()) return cmd_predict(data_dir, ckpt, input, out_path, beam, greedy);
    if (rc->parsed()) return cmd_recover(pred_path, lookup_stem, out_path);
    if (ex->parsed()) return cmd_execute(db_dir, sql, pred_path);
    if (ev->parsed()) return cmd_evaluate(pred_path, gold_path, db_dir, out_stem, recover, lookup_stem);
    if (ad->parsed()) return cmd_attention_dump(data_dir, ckpt, question, beam);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
