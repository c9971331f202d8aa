#pragma once

#include <string>
#include <vector>

#include "q2sql/model.hpp"
#include "q2sql/optim.hpp"
#include "q2sql/text.hpp"

namespace q2sql {

struct TrainConfig {
  int embed_dim = 128;
  int hidden = 256;
  double lr = 0.0005;
  int lr_decay_every = 2;     // epochs
  double lr_decay_factor = 0.8;
  double clip_norm = 2.0;
  int batch = 16;
  int epochs = 20;
  uint64_t seed = 1;
};

// flat key=value text; unknown keys are an error
TrainConfig load_train_config(const std::string& path);

struct Example {
  QuestionEncoding question;
  std::vector<int> target;  // BOS ... EOS
};

struct QaPairText {
  std::string question;
  std::string sql;
};

// one record per line: question <TAB> gold SQL
std::vector<QaPairText> load_pairs(const std::string& path);
void save_pairs(const std::vector<QaPairText>& pairs, const std::string& path);

std::vector<Example> encode_dataset(const std::vector<QaPairText>& pairs, const Vocab& vocab);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  int best_epoch = 0;
  double best_dev_loss = 0.0;
  std::vector<EpochMetrics> history;
};

double nll_loss_value(const std::vector<Mat>& step_distributions, const std::vector<int>& gold_ids);

double lr_at_epoch(const TrainConfig& cfg, int epoch);  // 1-based

// Teacher-forced training; writes ckpt_epoch<N> and best checkpoints plus
// metrics.tsv under out_dir. Deterministic for a fixed seed.
TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                  ParamStore& params, const TrainConfig& cfg, const std::string& out_dir,
                  bool quiet = false);

double dataset_loss(const ParamStore& ps, const ModelConfig& cfg,
                    const std::vector<Example>& examples);

}  // namespace q2sql
