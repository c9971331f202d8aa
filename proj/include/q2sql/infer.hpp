#pragma once

#include <string>
#include <vector>

#include "q2sql/model.hpp"
#include "q2sql/sql.hpp"
#include "q2sql/text.hpp"

namespace q2sql {

struct Hypothesis {
  std::vector<int> ids;            // generated tokens, no BOS, EOS stripped
  double log_prob = 0.0;
  bool done = false;
  std::vector<Mat> step_attention; // copy attention per generated token, J x 1
};

struct BeamConfig {
  int beam = 5;
  int max_len = kMaxTargetLen;
};

// Returns hypotheses sorted best-first. Ordering: higher log-prob first,
// then shorter output, then lexicographically smaller id sequence.
std::vector<Hypothesis> beam_search(const ParamStore& ps, const ModelConfig& cfg,
                                    const QuestionEncoding& question, const Vocab& vocab,
                                    const BeamConfig& bc = {});

// Swaps each placeholder token for the source token whose attention weight
// at that step is largest, preferring out-of-vocabulary source positions.
std::vector<std::string> replace_placeholders(const Hypothesis& hyp, const Vocab& vocab,
                                              const QuestionEncoding& question);

// Human-readable table of the per-step source attention for one hypothesis:
// one row per generated token, one column per source token.
std::string attention_table(const Hypothesis& hyp, const Vocab& vocab,
                            const QuestionEncoding& question);

// Attention summed over output steps [begin, end) and renormalized to 1.
Mat accumulate_span(const Hypothesis& hyp, int begin, int end);

struct ConditionAttention {
  Condition cond;
  Mat weights;  // renormalized accumulated attention over source positions
};

// Accumulated attention per condition-value span of the parsed output.
// Empty when the hypothesis does not parse as SQL.
std::vector<ConditionAttention> condition_attention(const Hypothesis& hyp, const Vocab& vocab);

// Per-condition (source token, weight) tables when the output parses,
// otherwise the per-step table.
std::string attention_report(const Hypothesis& hyp, const Vocab& vocab,
                             const QuestionEncoding& question);

}  // namespace q2sql
