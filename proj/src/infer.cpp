#include "q2sql/infer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace q2sql {

namespace {

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
  return a.ids < b.ids;
}

struct LiveHyp {
  Hypothesis hyp;
  DecoderState state;
};

}  // namespace

std::vector<Hypothesis> beam_search(const ParamStore& ps, const ModelConfig& cfg,
                                    const QuestionEncoding& question, const Vocab& vocab,
                                    const BeamConfig& bc) {
  if (question.ids.empty()) throw std::invalid_argument("beam_search: empty question");
  if (bc.beam < 1) throw std::invalid_argument("beam_search: beam must be positive");
  const EncoderState enc = encode(ps, cfg, question.ids);
  const int src_len = static_cast<int>(question.ids.size());

  std::vector<LiveHyp> live;
  live.push_back({Hypothesis{}, initial_decoder_state(enc, src_len)});
  std::vector<Hypothesis> finished;

  for (int t = 0; t < bc.max_len && !live.empty(); ++t) {
    struct Expansion {
      Hypothesis hyp;
      DecoderState state;
    };
    std::vector<Expansion> expansions;
    for (auto& lh : live) {
      const int prev = lh.hyp.ids.empty() ? vocab.bos : lh.hyp.ids.back();
      DecoderState state = lh.state;
      StepDistribution dist = decode_step(ps, cfg, prev, state, enc, question.ids);

      // top `beam` continuations of this hypothesis
      std::vector<int> cand(static_cast<size_t>(cfg.vocab_size));
      for (int i = 0; i < cfg.vocab_size; ++i) cand[static_cast<size_t>(i)] = i;
      std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
        return dist.mixed.v[static_cast<size_t>(a)] > dist.mixed.v[static_cast<size_t>(b)];
      });
      // the EOS continuation is always scored: a short finished hypothesis
      // can out-rank every longer one, so it must never be pruned away
      int taken = 0;
      for (int tok : cand) {
        if (tok == vocab.pad || tok == vocab.bos) continue;
        if (tok != vocab.eos && taken >= bc.beam) continue;
        Expansion ex;
        ex.hyp = lh.hyp;
        ex.hyp.log_prob += std::log(std::max(dist.mixed.v[static_cast<size_t>(tok)], 1e-12));
        if (tok == vocab.eos) {
          ex.hyp.done = true;
        } else {
          ex.hyp.ids.push_back(tok);
          ex.hyp.step_attention.push_back(dist.copy_weights);
          ex.state = state;
          ++taken;
        }
        expansions.push_back(std::move(ex));
      }
    }

    std::stable_sort(expansions.begin(), expansions.end(),
                     [](const Expansion& a, const Expansion& b) { return better(a.hyp, b.hyp); });
    live.clear();
    for (auto& ex : expansions) {
      if (ex.hyp.done) {
        if (finished.size() < static_cast<size_t>(bc.beam) * 4)
          finished.push_back(std::move(ex.hyp));
      } else if (live.size() < static_cast<size_t>(bc.beam)) {
        live.push_back({std::move(ex.hyp), std::move(ex.state)});
      }
      if (live.size() >= static_cast<size_t>(bc.beam) &&
          finished.size() >= static_cast<size_t>(bc.beam))
        break;
    }
    // stop once no live hypothesis can beat the current best finished one
    if (!finished.empty() && !live.empty()) {
      double best_finished = finished[0].log_prob;
      for (const auto& h : finished) best_finished = std::max(best_finished, h.log_prob);
      bool any_viable = false;
      for (const auto& lh : live)
        if (lh.hyp.log_prob > best_finished) any_viable = true;
      if (!any_viable && finished.size() >= static_cast<size_t>(bc.beam)) break;
    }
  }

  // hypotheses still open at max_len count as results too
  for (auto& lh : live) finished.push_back(std::move(lh.hyp));
  std::stable_sort(finished.begin(), finished.end(), better);
  if (finished.size() > static_cast<size_t>(bc.beam)) finished.resize(static_cast<size_t>(bc.beam));
  if (finished.empty()) throw std::runtime_error("beam_search: no hypotheses produced");
  return finished;
}

std::vector<std::string> replace_placeholders(const Hypothesis& hyp, const Vocab& vocab,
                                              const QuestionEncoding& question) {
  std::vector<std::string> out;
  for (size_t t = 0; t < hyp.ids.size(); ++t) {
    const int tok = hyp.ids[t];
    if (tok != vocab.ph) {
      out.push_back(vocab.token(tok));
      continue;
    }
    const Mat& alpha = hyp.step_attention[t];
    // prefer positions whose source token is outside the vocabulary
    int best = -1;
    double best_w = -1.0;
    for (const auto& [pos, surface] : question.oov_positions) {
      (void)surface;
      if (alpha.v[static_cast<size_t>(pos)] > best_w) {
        best_w = alpha.v[static_cast<size_t>(pos)];
        best = pos;
      }
    }
    if (best < 0) {
      for (int j = 0; j < alpha.rows; ++j) {
        if (alpha.v[static_cast<size_t>(j)] > best_w) {
          best_w = alpha.v[static_cast<size_t>(j)];
          best = j;
        }
      }
    }
    out.push_back(question.surface[static_cast<size_t>(best)]);
  }
  return out;
}

std::string attention_table(const Hypothesis& hyp, const Vocab& vocab,
                            const QuestionEncoding& question) {
  std::ostringstream os;
  os << "step\ttoken";
  for (const auto& s : question.surface) os << "\t" << s;
  os << "\n";
  for (size_t t = 0; t < hyp.ids.size(); ++t) {
    os << (t + 1) << "\t" << vocab.token(hyp.ids[t]);
    const Mat& alpha = hyp.step_attention[t];
    char buf[32];
    for (int j = 0; j < alpha.rows; ++j) {
      std::snprintf(buf, sizeof(buf), "%.4f", alpha.v[static_cast<size_t>(j)]);
      os << "\t" << buf;
    }
    os << "\n";
  }
  return os.str();
}

Mat accumulate_span(const Hypothesis& hyp, int begin, int end) {
  if (begin < 0 || end > static_cast<int>(hyp.step_attention.size()) || begin >= end)
    throw std::invalid_argument("accumulate_span: bad range");
  Mat acc = hyp.step_attention[static_cast<size_t>(begin)];
  for (int t = begin + 1; t < end; ++t)
    add_inplace(acc, hyp.step_attention[static_cast<size_t>(t)]);
  double z = 0.0;
  for (double x : acc.v) z += x;
  for (double& x : acc.v) x /= z;
  return acc;
}

std::vector<ConditionAttention> condition_attention(const Hypothesis& hyp, const Vocab& vocab) {
  std::vector<std::string> tokens;
  for (int id : hyp.ids) tokens.push_back(vocab.token(id));
  auto q = parse_sql(tokens);
  if (!q) return {};

  std::vector<ConditionAttention> out;
  // canonical form: conditions sit after "where" as col op value [and ...],
  // with each value serialized as a single quoted token
  size_t at = 0;
  while (at < tokens.size() && tokens[at] != "where") ++at;
  ++at;  // first condition column
  for (const Condition& cond : q->conditions) {
    const size_t value_pos = at + 2;
    if (value_pos >= tokens.size()) break;
    ConditionAttention ca;
    ca.cond = cond;
    ca.weights = accumulate_span(hyp, static_cast<int>(value_pos),
                                 static_cast<int>(value_pos) + 1);
    out.push_back(std::move(ca));
    at = value_pos + 2;  // skip "and"
  }
  return out;
}

std::string attention_report(const Hypothesis& hyp, const Vocab& vocab,
                             const QuestionEncoding& question) {
  const auto conds = condition_attention(hyp, vocab);
  if (conds.empty()) return attention_table(hyp, vocab, question);
  std::ostringstream os;
  char buf[32];
  for (const auto& ca : conds) {
    os << "condition: " << ca.cond.table << ".\"" << ca.cond.column << "\" " << ca.cond.op << " \""
       << ca.cond.value << "\"\n";
    for (int j = 0; j < ca.weights.rows; ++j) {
      std::snprintf(buf, sizeof(buf), "%.4f", ca.weights.v[static_cast<size_t>(j)]);
      os << "  " << question.surface[static_cast<size_t>(j)] << "\t" << buf << "\n";
    }
  }
  return os.str();
}

}  // namespace q2sql
