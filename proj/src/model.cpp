#include "q2sql/model.hpp"

#include <cmath>
#include <stdexcept>

#include "q2sql/rng.hpp"

namespace q2sql {

// gate layout: [input; forget; output; candidate]

ParamStore init_params(const ModelConfig& cfg, uint64_t seed) {
  if (cfg.vocab_size <= 0 || cfg.embed_dim <= 0 || cfg.hidden <= 0 || cfg.hidden % 2 != 0)
    throw std::invalid_argument("init_params: bad config");
  const int d = cfg.embed_dim, h = cfg.hidden, u = cfg.enc_dir();
  Rng rng(seed);
  ParamStore ps;
  auto add = [&](const std::string& name, int r, int c) {
    Mat m(r, c);
    for (double& x : m.v) x = rng.uniform(-0.1, 0.1);
    ps.add(name, std::move(m));
  };
  add("emb", cfg.vocab_size, d);
  for (const char* dir : {"enc.fwd", "enc.bwd"}) {
    add(std::string(dir) + ".wx", 4 * u, d);
    add(std::string(dir) + ".wh", 4 * u, u);
    add(std::string(dir) + ".b", 4 * u, 1);
    Mat& b = ps[std::string(dir) + ".b"];
    for (int i = u; i < 2 * u; ++i) b.v[static_cast<size_t>(i)] = 1.0;
  }
  add("bridge.wh", h, h);
  add("bridge.bh", h, 1);
  add("bridge.wc", h, h);
  add("bridge.bc", h, 1);
  add("dec.wx", 4 * h, d);
  add("dec.wh", 4 * h, h);
  add("dec.b", 4 * h, 1);
  {
    Mat& b = ps["dec.b"];
    for (int i = h; i < 2 * h; ++i) b.v[static_cast<size_t>(i)] = 1.0;
  }
  add("att.enc.w", h, h);
  add("att.dec.w", h, h);
  add("out.wz", h, 3 * h);
  add("out.bz", h, 1);
  add("out.wd2v", d, h);
  add("out.bd2v", d, 1);
  add("gen.w", 1, 2 * h + d);
  add("gen.b", 1, 1);
  write_config_meta(ps, cfg);
  return ps;
}

void write_config_meta(ParamStore& ps, const ModelConfig& cfg) {
  ps.meta["vocab_size"] = std::to_string(cfg.vocab_size);
  ps.meta["embed_dim"] = std::to_string(cfg.embed_dim);
  ps.meta["hidden"] = std::to_string(cfg.hidden);
  ps.meta["no_temporal"] = cfg.no_temporal ? "1" : "0";
  ps.meta["no_dynamic"] = cfg.no_dynamic ? "1" : "0";
  ps.meta["no_copy"] = cfg.no_copy ? "1" : "0";
}

ModelConfig config_from_params(const ParamStore& ps) {
  ModelConfig cfg;
  auto get = [&ps](const std::string& key) {
    auto it = ps.meta.find(key);
    if (it == ps.meta.end()) throw std::runtime_error("checkpoint missing meta key " + key);
    return it->second;
  };
  cfg.vocab_size = std::stoi(get("vocab_size"));
  cfg.embed_dim = std::stoi(get("embed_dim"));
  cfg.hidden = std::stoi(get("hidden"));
  cfg.no_temporal = get("no_temporal") == "1";
  cfg.no_dynamic = get("no_dynamic") == "1";
  cfg.no_copy = get("no_copy") == "1";
  return cfg;
}

// ---------- plain path ----------

namespace {

Mat emb_col(const Mat& emb, int token) {
  Mat out(emb.cols, 1);
  for (int j = 0; j < emb.cols; ++j) out.v[static_cast<size_t>(j)] = emb.at(token, j);
  return out;
}

Mat concat_vecs(const std::vector<const Mat*>& xs) {
  int rows = 0;
  for (const Mat* x : xs) rows += x->rows;
  Mat out(rows, 1);
  int at = 0;
  for (const Mat* x : xs)
    for (int i = 0; i < x->rows; ++i) out.v[static_cast<size_t>(at++)] = x->v[static_cast<size_t>(i)];
  return out;
}

void lstm_step(const Mat& wx, const Mat& wh, const Mat& b, const Mat& x, Mat& h, Mat& c) {
  const int u = h.rows;
  Mat gates;
  kernels::matmul(wx, x, gates);
  kernels::matmul_acc(wh, h, gates);
  add_inplace(gates, b);
  Mat nh(u, 1), nc(u, 1);
  for (int i = 0; i < u; ++i) {
    const double gi = 1.0 / (1.0 + std::exp(-gates.v[static_cast<size_t>(i)]));
    const double gf = 1.0 / (1.0 + std::exp(-gates.v[static_cast<size_t>(u + i)]));
    const double go = 1.0 / (1.0 + std::exp(-gates.v[static_cast<size_t>(2 * u + i)]));
    const double gg = std::tanh(gates.v[static_cast<size_t>(3 * u + i)]);
    nc.v[static_cast<size_t>(i)] = gf * c.v[static_cast<size_t>(i)] + gi * gg;
    nh.v[static_cast<size_t>(i)] = go * std::tanh(nc.v[static_cast<size_t>(i)]);
  }
  h = std::move(nh);
  c = std::move(nc);
}

}  // namespace

EncoderState encode(const ParamStore& ps, const ModelConfig& cfg, const std::vector<int>& src_ids) {
  const int J = static_cast<int>(src_ids.size());
  if (J == 0) throw std::invalid_argument("encode: empty input");
  const int u = cfg.enc_dir();
  const Mat& emb = ps["emb"];

  std::vector<Mat> fwd(static_cast<size_t>(J)), bwd(static_cast<size_t>(J));
  Mat h(u, 1), c(u, 1);
  for (int j = 0; j < J; ++j) {
    Mat x = emb_col(emb, src_ids[static_cast<size_t>(j)]);
    lstm_step(ps["enc.fwd.wx"], ps["enc.fwd.wh"], ps["enc.fwd.b"], x, h, c);
    fwd[static_cast<size_t>(j)] = h;
  }
  Mat fwd_c_last = c;
  h = Mat(u, 1);
  c = Mat(u, 1);
  for (int j = J - 1; j >= 0; --j) {
    Mat x = emb_col(emb, src_ids[static_cast<size_t>(j)]);
    lstm_step(ps["enc.bwd.wx"], ps["enc.bwd.wh"], ps["enc.bwd.b"], x, h, c);
    bwd[static_cast<size_t>(j)] = h;
  }
  Mat bwd_c_first = c;

  EncoderState enc;
  enc.hidden_seq = Mat(2 * u, J);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < u; ++i) {
      enc.hidden_seq.at(i, j) = fwd[static_cast<size_t>(j)].v[static_cast<size_t>(i)];
      enc.hidden_seq.at(u + i, j) = bwd[static_cast<size_t>(j)].v[static_cast<size_t>(i)];
    }

  Mat hcat = concat_vecs({&fwd[static_cast<size_t>(J - 1)], &bwd[0]});
  Mat ccat = concat_vecs({&fwd_c_last, &bwd_c_first});
  Mat t;
  kernels::matmul(ps["bridge.wh"], hcat, t);
  add_inplace(t, ps["bridge.bh"]);
  for (double& x : t.v) x = std::tanh(x);
  enc.h0 = std::move(t);
  Mat t2;
  kernels::matmul(ps["bridge.wc"], ccat, t2);
  add_inplace(t2, ps["bridge.bc"]);
  for (double& x : t2.v) x = std::tanh(x);
  enc.c0 = std::move(t2);
  return enc;
}

DecoderState initial_decoder_state(const EncoderState& enc, int src_len) {
  DecoderState st;
  st.h = enc.h0;
  st.c = enc.c0;
  st.exp_score_sum = Mat(src_len, 1);
  return st;
}

Mat align_scores(const Mat& hidden_seq, const Mat& w_align, const Mat& h_dec) {
  Mat wh;
  kernels::matmul(w_align, h_dec, wh);
  Mat s;
  kernels::matmul_tn(hidden_seq, wh, s);
  return s;
}

Mat temporal_weights(const Mat& scores, const Mat& exp_score_sum, int step, bool plain_softmax) {
  if (plain_softmax) return softmax_vec(scores);
  Mat st(scores.rows, 1);
  if (step == 1) {
    for (int j = 0; j < scores.rows; ++j) st.v[static_cast<size_t>(j)] = std::exp(scores.v[static_cast<size_t>(j)]);
  } else {
    for (int j = 0; j < scores.rows; ++j)
      st.v[static_cast<size_t>(j)] =
          std::exp(scores.v[static_cast<size_t>(j)]) / exp_score_sum.v[static_cast<size_t>(j)];
  }
  double z = 0.0;
  for (double x : st.v) z += x;
  for (double& x : st.v) x /= z;
  return st;
}

Mat dynamic_context(const Mat& h_dec, const std::vector<Mat>& past_hidden, const Mat& w_align_dec) {
  if (past_hidden.empty()) return Mat(h_dec.rows, 1);
  Mat wh;
  kernels::matmul(w_align_dec, h_dec, wh);
  Mat s(static_cast<int>(past_hidden.size()), 1);
  for (size_t t = 0; t < past_hidden.size(); ++t) s.v[t] = dot(past_hidden[t], wh);
  Mat a = softmax_vec(s);
  Mat z(h_dec.rows, 1);
  for (size_t t = 0; t < past_hidden.size(); ++t) add_inplace(z, past_hidden[t], a.v[t]);
  return z;
}

Mat vocab_distribution(const ParamStore& ps, const Mat& z_enc, const Mat& z_dec, const Mat& h_dec) {
  Mat zcat = concat_vecs({&z_enc, &z_dec, &h_dec});
  Mat htld;
  kernels::matmul(ps["out.wz"], zcat, htld);
  add_inplace(htld, ps["out.bz"]);
  Mat proj;
  kernels::matmul(ps["out.wd2v"], htld, proj);
  add_inplace(proj, ps["out.bd2v"]);
  Mat logits;
  kernels::matmul(ps["emb"], proj, logits);
  return softmax_vec(logits);
}

double copy_switch(const ParamStore& ps, const Mat& z_enc, const Mat& h_dec, const Mat& prev_emb) {
  Mat cat = concat_vecs({&z_enc, &h_dec, &prev_emb});
  double z = dot(ps["gen.w"], cat) + ps["gen.b"].v[0];
  return 1.0 / (1.0 + std::exp(-z));
}

Mat mix_distribution(const Mat& p_vocab, double p_gen, const Mat& copy_weights,
                     const std::vector<int>& src_ids, int vocab_size) {
  Mat mixed(vocab_size, 1);
  for (int i = 0; i < vocab_size; ++i) mixed.v[static_cast<size_t>(i)] = p_gen * p_vocab.v[static_cast<size_t>(i)];
  for (size_t j = 0; j < src_ids.size(); ++j)
    mixed.v[static_cast<size_t>(src_ids[j])] += (1.0 - p_gen) * copy_weights.v[j];
  return mixed;
}

StepDistribution decode_step(const ParamStore& ps, const ModelConfig& cfg, int prev_token,
                             DecoderState& state, const EncoderState& enc,
                             const std::vector<int>& src_ids) {
  const Mat x = emb_col(ps["emb"], prev_token);
  lstm_step(ps["dec.wx"], ps["dec.wh"], ps["dec.b"], x, state.h, state.c);
  const int t = state.step + 1;

  Mat s = align_scores(enc.hidden_seq, ps["att.enc.w"], state.h);
  StepDistribution out;
  out.copy_weights = temporal_weights(s, state.exp_score_sum, t, cfg.no_temporal);
  Mat z_enc;
  kernels::matmul(enc.hidden_seq, out.copy_weights, z_enc);
  Mat z_dec = cfg.no_dynamic ? Mat(cfg.hidden, 1)
                             : dynamic_context(state.h, state.past_hidden, ps["att.dec.w"]);
  out.p_vocab = vocab_distribution(ps, z_enc, z_dec, state.h);
  out.p_gen = cfg.no_copy ? 1.0 : copy_switch(ps, z_enc, state.h, x);
  out.mixed = cfg.no_copy
                  ? out.p_vocab
                  : mix_distribution(out.p_vocab, out.p_gen, out.copy_weights, src_ids,
                                     cfg.vocab_size);

  for (int j = 0; j < s.rows; ++j)
    state.exp_score_sum.v[static_cast<size_t>(j)] += std::exp(s.v[static_cast<size_t>(j)]);
  state.past_hidden.push_back(state.h);
  ++state.step;
  return out;
}

// ---------- tape path ----------

const Var& TapeModel::p(const ParamStore& ps, const std::string& name) const {
  int i = ps.index_of(name);
  if (i < 0) throw std::invalid_argument("TapeModel: no parameter " + name);
  return leaves[static_cast<size_t>(i)];
}

TapeModel bind_params(Tape& tape, const ParamStore& ps, bool needs_grad) {
  TapeModel m;
  m.cfg = config_from_params(ps);
  for (const Mat& mat : ps.mats) m.leaves.push_back(tape.leaf(mat, needs_grad));
  return m;
}

namespace {

struct TapeLstm {
  Var wx, wh, b;
  int units;
};

void lstm_step_tape(Tape& t, const TapeLstm& cell, const Var& x, Var& h, Var& c) {
  const int u = cell.units;
  Var gates = t.add(t.add(t.matmul(cell.wx, x), t.matmul(cell.wh, h)), cell.b);
  Var gi = t.sigmoid_(t.slice_rows(gates, 0, u));
  Var gf = t.sigmoid_(t.slice_rows(gates, u, 2 * u));
  Var go = t.sigmoid_(t.slice_rows(gates, 2 * u, 3 * u));
  Var gg = t.tanh_(t.slice_rows(gates, 3 * u, 4 * u));
  c = t.add(t.mul(gf, c), t.mul(gi, gg));
  h = t.mul(go, t.tanh_(c));
}

}  // namespace

TapeRollout teacher_forced_rollout(Tape& t, const ParamStore& ps, const TapeModel& m,
                                   const QuestionEncoding& question,
                                   const std::vector<int>& target_ids) {
  const ModelConfig& cfg = m.cfg;
  const int J = static_cast<int>(question.ids.size());
  if (J == 0) throw std::invalid_argument("teacher_forced_rollout: empty question");
  if (target_ids.size() < 2) throw std::invalid_argument("teacher_forced_rollout: target too short");
  const int u = cfg.enc_dir();
  const Var& emb = m.p(ps, "emb");

  // encoder
  TapeLstm fwd{m.p(ps, "enc.fwd.wx"), m.p(ps, "enc.fwd.wh"), m.p(ps, "enc.fwd.b"), u};
  TapeLstm bwdc{m.p(ps, "enc.bwd.wx"), m.p(ps, "enc.bwd.wh"), m.p(ps, "enc.bwd.b"), u};
  std::vector<Var> x(static_cast<size_t>(J));
  for (int j = 0; j < J; ++j) x[static_cast<size_t>(j)] = t.row_as_col(emb, question.ids[static_cast<size_t>(j)]);
  std::vector<Var> hf(static_cast<size_t>(J)), hb(static_cast<size_t>(J));
  Var h = t.zeros(u, 1), c = t.zeros(u, 1);
  for (int j = 0; j < J; ++j) {
    lstm_step_tape(t, fwd, x[static_cast<size_t>(j)], h, c);
    hf[static_cast<size_t>(j)] = h;
  }
  Var fwd_c_last = c;
  h = t.zeros(u, 1);
  c = t.zeros(u, 1);
  for (int j = J - 1; j >= 0; --j) {
    lstm_step_tape(t, bwdc, x[static_cast<size_t>(j)], h, c);
    hb[static_cast<size_t>(j)] = h;
  }
  Var bwd_c_first = c;

  std::vector<Var> henc_cols(static_cast<size_t>(J));
  for (int j = 0; j < J; ++j)
    henc_cols[static_cast<size_t>(j)] = t.concat_rows({hf[static_cast<size_t>(j)], hb[static_cast<size_t>(j)]});
  Var henc = t.concat_cols(henc_cols);

  Var hd = t.tanh_(t.affine(m.p(ps, "bridge.wh"),
                            t.concat_rows({hf[static_cast<size_t>(J - 1)], hb[0]}), m.p(ps, "bridge.bh")));
  Var cd = t.tanh_(t.affine(m.p(ps, "bridge.wc"), t.concat_rows({fwd_c_last, bwd_c_first}),
                            m.p(ps, "bridge.bc")));

  // decoder
  TapeLstm dec{m.p(ps, "dec.wx"), m.p(ps, "dec.wh"), m.p(ps, "dec.b"), cfg.hidden};
  Var exp_sum;  // running sum of exp scores, set after step 1
  std::vector<Var> past;
  TapeRollout out;
  Var total = t.zeros(1, 1);

  const int steps = static_cast<int>(target_ids.size()) - 1;
  for (int step = 1; step <= steps; ++step) {
    const int prev = target_ids[static_cast<size_t>(step - 1)];
    const int gold = target_ids[static_cast<size_t>(step)];
    Var xe = t.row_as_col(emb, prev);
    lstm_step_tape(t, dec, xe, hd, cd);

    Var s = t.matmul_tn(henc, t.matmul(m.p(ps, "att.enc.w"), hd));
    Var alpha;
    if (cfg.no_temporal) {
      alpha = t.softmax(s);
    } else {
      Var es = t.exp_(s);
      Var stemp = (step == 1) ? es : t.div(es, exp_sum);
      alpha = t.div_by(stemp, t.sum(stemp));
      exp_sum = (step == 1) ? es : t.add(exp_sum, es);
    }
    Var z_enc = t.matmul(henc, alpha);

    Var z_dec;
    Var alpha_dyn;
    if (cfg.no_dynamic || past.empty()) {
      z_dec = t.zeros(cfg.hidden, 1);
    } else {
      Var dmat = t.concat_cols(past);
      alpha_dyn = t.softmax(t.matmul_tn(dmat, t.matmul(m.p(ps, "att.dec.w"), hd)));
      z_dec = t.matmul(dmat, alpha_dyn);
    }

    Var htld = t.affine(m.p(ps, "out.wz"), t.concat_rows({z_enc, z_dec, hd}), m.p(ps, "out.bz"));
    Var logits = t.matmul(emb, t.affine(m.p(ps, "out.wd2v"), htld, m.p(ps, "out.bd2v")));
    Var p_vocab = t.softmax(logits);

    Var mixed, p_gen;
    if (cfg.no_copy) {
      mixed = p_vocab;
    } else {
      p_gen = t.sigmoid_(t.affine(m.p(ps, "gen.w"), t.concat_rows({z_enc, hd, xe}),
                                  m.p(ps, "gen.b")));
      Var p_ptr = t.scatter_sum(alpha, question.ids, cfg.vocab_size);
      mixed = t.add(t.scale_by(p_vocab, p_gen),
                    t.scale_by(p_ptr, t.scalar_affine(p_gen, -1.0, 1.0)));
    }

    total = t.add(total, t.log_(t.pick(mixed, gold), 1e-12));
    past.push_back(hd);

    out.step_mixed.push_back(mixed);
    out.step_alpha.push_back(alpha);
    out.step_alpha_dyn.push_back(alpha_dyn);
    out.step_pvocab.push_back(p_vocab);
    out.step_pgen.push_back(p_gen);
  }
  out.loss = t.scalar_affine(total, -1.0, 0.0);
  return out;
}

double example_loss(const ParamStore& ps, const ModelConfig& cfg, const QuestionEncoding& question,
                    const std::vector<int>& target_ids) {
  (void)cfg;
  Tape t;
  TapeModel m = bind_params(t, ps, false);
  return teacher_forced_rollout(t, ps, m, question, target_ids).loss->val.v[0];
}

}  // namespace q2sql
