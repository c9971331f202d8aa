#pragma once

#include <string>
#include <vector>

#include "q2sql/matrix.hpp"
#include "q2sql/optim.hpp"
#include "q2sql/tape.hpp"
#include "q2sql/text.hpp"

namespace q2sql {

struct ModelConfig {
  int vocab_size = 0;
  int embed_dim = 128;
  int hidden = 256;  // decoder hidden; encoder runs hidden/2 per direction
  bool no_temporal = false;  // temporal normalization replaced by plain softmax
  bool no_dynamic = false;   // decoder-side context forced to zero
  bool no_copy = false;      // generation switch forced to 1

  int enc_dir() const { return hidden / 2; }
};

// Uniform(-0.1, 0.1) init from the given seed; LSTM forget-gate biases 1.
ParamStore init_params(const ModelConfig& cfg, uint64_t seed);
ModelConfig config_from_params(const ParamStore& ps);
void write_config_meta(ParamStore& ps, const ModelConfig& cfg);

// ---- plain (tape-free) forward path, used by beam search ----

struct EncoderState {
  Mat hidden_seq;  // 2u x J, column j is h^e_j
  Mat h0, c0;      // bridged decoder initial state
};

struct DecoderState {
  Mat h, c;
  Mat exp_score_sum;           // running sum of exp(raw scores), J x 1
  int step = 0;                // number of completed steps
  std::vector<Mat> past_hidden;
};

struct StepDistribution {
  Mat p_vocab;       // V x 1
  double p_gen = 1;  // generation switch
  Mat copy_weights;  // J x 1 attention over source positions
  Mat mixed;         // V x 1 final distribution
};

EncoderState encode(const ParamStore& ps, const ModelConfig& cfg, const std::vector<int>& src_ids);

// One decoding step; appends to the state's histories.
StepDistribution decode_step(const ParamStore& ps, const ModelConfig& cfg, int prev_token,
                             DecoderState& state, const EncoderState& enc,
                             const std::vector<int>& src_ids);

DecoderState initial_decoder_state(const EncoderState& enc, int src_len);

// individual pieces, shared between the plain and tape paths' tests
Mat align_scores(const Mat& hidden_seq, const Mat& w_align, const Mat& h_dec);
Mat temporal_weights(const Mat& scores, const Mat& exp_score_sum, int step, bool plain_softmax);
Mat dynamic_context(const Mat& h_dec, const std::vector<Mat>& past_hidden, const Mat& w_align_dec);
Mat vocab_distribution(const ParamStore& ps, const Mat& z_enc, const Mat& z_dec, const Mat& h_dec);
double copy_switch(const ParamStore& ps, const Mat& z_enc, const Mat& h_dec, const Mat& prev_emb);
Mat mix_distribution(const Mat& p_vocab, double p_gen, const Mat& copy_weights,
                     const std::vector<int>& src_ids, int vocab_size);

// ---- tape path, used by training and gradient checks ----

struct TapeModel {
  ModelConfig cfg;
  std::vector<Var> leaves;  // ParamStore order
  const Var& p(const ParamStore& ps, const std::string& name) const;
};

TapeModel bind_params(Tape& tape, const ParamStore& ps, bool needs_grad);

struct TapeRollout {
  Var loss;                      // summed over steps
  std::vector<Var> step_mixed;   // V x 1 per step
  std::vector<Var> step_alpha;   // J x 1 per step
  std::vector<Var> step_alpha_dyn;  // (t-1) x 1, empty Var for t=1
  std::vector<Var> step_pvocab;
  std::vector<Var> step_pgen;
};

// Teacher-forced forward over target_ids (BOS ... EOS); loss is
// -sum_t log P(gold_t) with probabilities floored at 1e-12.
TapeRollout teacher_forced_rollout(Tape& tape, const ParamStore& ps, const TapeModel& model,
                                   const QuestionEncoding& question,
                                   const std::vector<int>& target_ids);

// Forward-only loss value (no gradient bookkeeping needed by callers).
double example_loss(const ParamStore& ps, const ModelConfig& cfg, const QuestionEncoding& question,
                    const std::vector<int>& target_ids);

}  // namespace q2sql
