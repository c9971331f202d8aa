#include "q2sql/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "q2sql/rng.hpp"

namespace q2sql {

TrainConfig load_train_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path);
  TrainConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "embed_dim") cfg.embed_dim = std::stoi(val);
    else if (key == "hidden") cfg.hidden = std::stoi(val);
    else if (key == "lr") cfg.lr = std::stod(val);
    else if (key == "lr_decay_every") cfg.lr_decay_every = std::stoi(val);
    else if (key == "lr_decay_factor") cfg.lr_decay_factor = std::stod(val);
    else if (key == "clip_norm") cfg.clip_norm = std::stod(val);
    else if (key == "batch") cfg.batch = std::stoi(val);
    else if (key == "epochs") cfg.epochs = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key " + key);
  }
  return cfg;
}

std::vector<QaPairText> load_pairs(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read dataset " + path);
  std::vector<QaPairText> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("dataset line lacks tab: " + line);
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

void save_pairs(const std::vector<QaPairText>& pairs, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write dataset " + path);
  for (const auto& p : pairs) f << p.question << "\t" << p.sql << "\n";
}

std::vector<Example> encode_dataset(const std::vector<QaPairText>& pairs, const Vocab& vocab) {
  std::vector<Example> out;
  for (const auto& p : pairs) {
    Example ex;
    ex.question = encode_question(tokenize(p.question), vocab);
    ex.target = encode_target(tokenize(p.sql), vocab);
    out.push_back(std::move(ex));
  }
  return out;
}

double nll_loss_value(const std::vector<Mat>& step_distributions, const std::vector<int>& gold_ids) {
  if (step_distributions.size() != gold_ids.size())
    throw std::invalid_argument("nll_loss: one distribution per gold token expected");
  double loss = 0.0;
  for (size_t t = 0; t < gold_ids.size(); ++t)
    loss -= std::log(std::max(step_distributions[t].v[static_cast<size_t>(gold_ids[t])], 1e-12));
  return loss;
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  const int decays = (epoch - 1) / cfg.lr_decay_every;
  return cfg.lr * std::pow(cfg.lr_decay_factor, decays);
}

double dataset_loss(const ParamStore& ps, const ModelConfig& cfg,
                    const std::vector<Example>& examples) {
  double total = 0.0;
  for (const auto& ex : examples) total += example_loss(ps, cfg, ex.question, ex.target);
  return total / static_cast<double>(examples.size());
}

TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                  ParamStore& params, const TrainConfig& cfg, const std::string& out_dir,
                  bool quiet) {
  if (train_set.empty() || dev_set.empty())
    throw std::invalid_argument("train: empty dataset");
  const ModelConfig mcfg = config_from_params(params);

  // group examples of similar source length into batches
  std::vector<int> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return train_set[static_cast<size_t>(a)].question.ids.size() <
           train_set[static_cast<size_t>(b)].question.ids.size();
  });
  std::vector<std::vector<int>> batches;
  for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch))
    batches.emplace_back(order.begin() + static_cast<long>(at),
                         order.begin() + static_cast<long>(std::min(at + static_cast<size_t>(cfg.batch), order.size())));

  AdamState adam;
  adam.init(params);
  long step = 0;
  TrainResult result;
  result.best_dev_loss = std::numeric_limits<double>::infinity();
  Rng shuffler(cfg.seed);

  std::ofstream metrics(out_dir + "/metrics.tsv");
  if (!metrics) throw std::runtime_error("cannot write metrics under " + out_dir);
  metrics << "epoch\ttrain_loss\tdev_loss\tlr\n";

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg, epoch);
    shuffler.shuffle(batches);
    double epoch_loss = 0.0;
    for (const auto& batch : batches) {
      Tape tape;
      TapeModel model = bind_params(tape, params, true);
      Var total;
      for (int idx : batch) {
        const Example& ex = train_set[static_cast<size_t>(idx)];
        Var loss = teacher_forced_rollout(tape, params, model, ex.question, ex.target).loss;
        total = total ? tape.add(total, loss) : loss;
        epoch_loss += loss->val.v[0];
      }
      Var mean_loss = tape.scalar_affine(total, 1.0 / static_cast<double>(batch.size()), 0.0);
      tape.backward(mean_loss);

      std::vector<Mat> grads;
      grads.reserve(model.leaves.size());
      for (const auto& leaf : model.leaves) {
        if (leaf->grad.rows == 0) leaf->grad = Mat(leaf->val.rows, leaf->val.cols);
        grads.push_back(std::move(leaf->grad));
      }
      clip_global_norm(grads, cfg.clip_norm);
      adam_step(params, grads, adam, ++step, lr);
    }

    const double train_loss = epoch_loss / static_cast<double>(train_set.size());
    const double dev_loss = dataset_loss(params, mcfg, dev_set);
    result.history.push_back({epoch, train_loss, dev_loss, lr});
    metrics << epoch << "\t" << train_loss << "\t" << dev_loss << "\t" << lr << "\n";
    metrics.flush();
    if (!quiet)
      std::fprintf(stderr, "epoch %d  train_loss %.4f  dev_loss %.4f  lr %.6g\n", epoch,
                   train_loss, dev_loss, lr);

    char name[64];
    std::snprintf(name, sizeof(name), "/ckpt_epoch%d", epoch);
    save_checkpoint(params, out_dir + name);
    if (dev_loss < result.best_dev_loss) {
      result.best_dev_loss = dev_loss;
      result.best_epoch = epoch;
      save_checkpoint(params, out_dir + "/best");
    }
  }
  return result;
}

}  // namespace q2sql
