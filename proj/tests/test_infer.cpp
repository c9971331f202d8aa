#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "q2sql/infer.hpp"
#include "q2sql/rng.hpp"

using namespace q2sql;

namespace {

Vocab toy_vocab() {
  std::vector<std::vector<std::string>> corpus = {
      {"aa", "bb", "cc", "dd", "ee", "ff"}};
  return build_vocab(corpus, {}, 1);
}

ModelConfig toy_config(const Vocab& v) {
  ModelConfig cfg;
  cfg.vocab_size = v.size();
  cfg.embed_dim = 8;
  cfg.hidden = 16;
  return cfg;
}

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
  return a.ids < b.ids;
}

// Exhaustive enumeration of every decode path up to max_len steps, with the
// same conventions as the beam: pad and bos are never emitted, eos ends a
// hypothesis, and paths still open at max_len count as results.
void enumerate(const ParamStore& ps, const ModelConfig& cfg, const Vocab& vocab,
               const EncoderState& enc, const std::vector<int>& src_ids,
               const DecoderState& state, Hypothesis hyp, int max_len,
               std::vector<Hypothesis>& out) {
  if (static_cast<int>(hyp.ids.size()) == max_len) {
    out.push_back(hyp);
    return;
  }
  const int prev = hyp.ids.empty() ? vocab.bos : hyp.ids.back();
  DecoderState next = state;
  StepDistribution dist = decode_step(ps, cfg, prev, next, enc, src_ids);
  for (int tok = 0; tok < cfg.vocab_size; ++tok) {
    if (tok == vocab.pad || tok == vocab.bos) continue;
    Hypothesis h = hyp;
    h.log_prob += std::log(std::max(dist.mixed.v[static_cast<size_t>(tok)], 1e-12));
    if (tok == vocab.eos) {
      h.done = true;
      out.push_back(std::move(h));
    } else {
      h.ids.push_back(tok);
      enumerate(ps, cfg, vocab, enc, src_ids, next, std::move(h), max_len, out);
    }
  }
}

}  // namespace

TEST_CASE("beam of one is greedy decoding") {
  Vocab v = toy_vocab();
  ModelConfig cfg = toy_config(v);
  ParamStore ps = init_params(cfg, 11);
  QuestionEncoding q = encode_question({"aa", "bb", "cc"}, v);

  BeamConfig bc;
  bc.beam = 1;
  bc.max_len = 8;
  auto hyps = beam_search(ps, cfg, q, v, bc);
  REQUIRE(hyps.size() == 1);

  // reference: walk the greedy path over non-EOS tokens; the beam's answer
  // is the best of every greedy prefix closed with EOS and the open path
  EncoderState enc = encode(ps, cfg, q.ids);
  DecoderState state = initial_decoder_state(enc, static_cast<int>(q.ids.size()));
  std::vector<Hypothesis> candidates;
  Hypothesis open;
  int prev = v.bos;
  for (int t = 0; t < bc.max_len; ++t) {
    StepDistribution dist = decode_step(ps, cfg, prev, state, enc, q.ids);
    Hypothesis closed = open;
    closed.log_prob += std::log(dist.mixed.v[static_cast<size_t>(v.eos)]);
    closed.done = true;
    candidates.push_back(closed);
    int best = -1;
    double best_p = -1.0;
    for (int tok = 0; tok < cfg.vocab_size; ++tok) {
      if (tok == v.pad || tok == v.bos || tok == v.eos) continue;
      if (dist.mixed.v[static_cast<size_t>(tok)] > best_p) {
        best_p = dist.mixed.v[static_cast<size_t>(tok)];
        best = tok;
      }
    }
    open.ids.push_back(best);
    open.log_prob += std::log(best_p);
    prev = best;
  }
  candidates.push_back(open);
  std::stable_sort(candidates.begin(), candidates.end(), better);
  CHECK(hyps[0].ids == candidates[0].ids);
  CHECK(hyps[0].log_prob == doctest::Approx(candidates[0].log_prob).epsilon(1e-12));
  CHECK(hyps[0].step_attention.size() == hyps[0].ids.size());
}

TEST_CASE("beam results are sorted, bounded, and deterministic") {
  Vocab v = toy_vocab();
  ModelConfig cfg = toy_config(v);
  ParamStore ps = init_params(cfg, 3);
  QuestionEncoding q = encode_question({"dd", "ee"}, v);

  BeamConfig bc;
  bc.beam = 4;
  bc.max_len = 5;
  auto hyps = beam_search(ps, cfg, q, v, bc);
  REQUIRE(!hyps.empty());
  CHECK(hyps.size() <= 4);
  for (size_t i = 1; i < hyps.size(); ++i) CHECK(hyps[i - 1].log_prob >= hyps[i].log_prob);

  auto again = beam_search(ps, cfg, q, v, bc);
  REQUIRE(again.size() == hyps.size());
  for (size_t i = 0; i < hyps.size(); ++i) {
    CHECK(again[i].ids == hyps[i].ids);
    CHECK(again[i].log_prob == hyps[i].log_prob);
  }
}

TEST_CASE("beam of five finds the exhaustive argmax at short horizons") {
  Vocab v = toy_vocab();
  ModelConfig cfg = toy_config(v);
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    ParamStore ps = init_params(cfg, seed);
    QuestionEncoding q = encode_question({"aa", "cc", "ff"}, v);

    BeamConfig bc;
    bc.beam = 5;
    bc.max_len = 3;
    auto hyps = beam_search(ps, cfg, q, v, bc);

    EncoderState enc = encode(ps, cfg, q.ids);
    std::vector<Hypothesis> all;
    enumerate(ps, cfg, v, enc, q.ids,
              initial_decoder_state(enc, static_cast<int>(q.ids.size())), Hypothesis{},
              bc.max_len, all);
    std::stable_sort(all.begin(), all.end(), better);
    REQUIRE(!all.empty());
    CHECK(hyps[0].ids == all[0].ids);
    CHECK(hyps[0].log_prob == doctest::Approx(all[0].log_prob).epsilon(1e-12));
  }
}

TEST_CASE("placeholder replacement prefers out-of-vocabulary source positions") {
  Vocab v = toy_vocab();
  QuestionEncoding q;
  q.surface = {"aa", "bb", "zzz"};
  q.ids = {v.id("aa"), v.id("bb"), v.ph};
  q.oov_positions = {{2, "zzz"}};

  Hypothesis hyp;
  hyp.ids = {v.id("cc"), v.ph, v.id("dd")};
  hyp.step_attention = {Mat(3, 1, {0.3, 0.3, 0.4}), Mat(3, 1, {0.2, 0.7, 0.1}),
                        Mat(3, 1, {0.4, 0.4, 0.2})};
  // position 1 has the largest weight but is in-vocabulary; the single
  // out-of-vocabulary position wins
  auto out = replace_placeholders(hyp, v, q);
  CHECK(out == std::vector<std::string>{"cc", "zzz", "dd"});

  // two out-of-vocabulary positions: masked argmax picks the heavier one
  q.oov_positions = {{0, "aa"}, {2, "zzz"}};
  hyp.step_attention[1] = Mat(3, 1, {0.1, 0.7, 0.2});
  CHECK(replace_placeholders(hyp, v, q)[1] == "zzz");

  // no out-of-vocabulary positions: plain argmax over all source tokens
  q.oov_positions.clear();
  CHECK(replace_placeholders(hyp, v, q)[1] == "bb");

  // without placeholders the surface tokens come straight from the vocab
  Hypothesis plain;
  plain.ids = {v.id("ee"), v.id("ff")};
  plain.step_attention = {Mat(3, 1, {1, 0, 0}), Mat(3, 1, {1, 0, 0})};
  CHECK(replace_placeholders(plain, v, q) == std::vector<std::string>{"ee", "ff"});
}

TEST_CASE("accumulated attention spans average and renormalize") {
  Hypothesis hyp;
  hyp.ids = {5, 6};
  hyp.step_attention = {Mat(3, 1, {0.2, 0.3, 0.5}), Mat(3, 1, {0.6, 0.2, 0.2})};

  Mat one = accumulate_span(hyp, 0, 1);
  CHECK(one.v[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(one.v[2] == doctest::Approx(0.5).epsilon(1e-12));

  Mat two = accumulate_span(hyp, 0, 2);
  CHECK(two.v[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(two.v[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(two.v[2] == doctest::Approx(0.35).epsilon(1e-12));

  CHECK_THROWS(accumulate_span(hyp, 1, 1));
  CHECK_THROWS(accumulate_span(hyp, 0, 3));
}

TEST_CASE("condition attention aligns value tokens of a parsed hypothesis") {
  const std::string sql =
      "select demographic.\"name\" from demographic where demographic.\"diagnosis\" = \"flu\" "
      "and demographic.\"age\" > \"50\"";
  const auto sql_tokens = tokenize(sql);
  Vocab v = build_vocab({sql_tokens}, {}, 1);

  QuestionEncoding q;
  q.surface = {"aa", "bb", "cc"};
  q.ids = {v.ph, v.ph, v.ph};

  Hypothesis hyp;
  for (const auto& tok : sql_tokens) {
    hyp.ids.push_back(v.id(tok));
    REQUIRE(hyp.ids.back() >= 0);
    hyp.step_attention.push_back(Mat(3, 1, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
  }
  // distinctive attention at the two value positions ("flu" at 7, "50" at 11)
  hyp.step_attention[7] = Mat(3, 1, {0.5, 0.3, 0.2});
  hyp.step_attention[11] = Mat(3, 1, {0.1, 0.1, 0.8});

  auto conds = condition_attention(hyp, v);
  REQUIRE(conds.size() == 2);
  CHECK(conds[0].cond.value == "flu");
  CHECK(conds[0].weights.v[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(conds[1].cond.value == "50");
  CHECK(conds[1].weights.v[2] == doctest::Approx(0.8).epsilon(1e-12));

  const std::string report = attention_report(hyp, v, q);
  CHECK(report.find("condition: demographic.\"diagnosis\" = \"flu\"") != std::string::npos);
  CHECK(report.find("0.8000") != std::string::npos);

  // unparseable output falls back to the per-step table
  Hypothesis junk;
  junk.ids = {v.id("from"), v.id("where")};
  junk.step_attention = {Mat(3, 1, {1, 0, 0}), Mat(3, 1, {0, 1, 0})};
  CHECK(condition_attention(junk, v).empty());
  CHECK(attention_report(junk, v, q).find("step\ttoken") != std::string::npos);
}
