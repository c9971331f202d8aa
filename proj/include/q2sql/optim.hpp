#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "q2sql/matrix.hpp"

namespace q2sql {

// Named, ordered set of trainable matrices. Order is the checkpoint
// manifest order.
struct ParamStore {
  std::vector<std::string> names;
  std::vector<Mat> mats;
  std::map<std::string, std::string> meta;

  int add(const std::string& name, Mat m);
  int index_of(const std::string& name) const;  // -1 if absent
  Mat& operator[](const std::string& name);
  const Mat& operator[](const std::string& name) const;
  size_t count() const { return mats.size(); }
};

// If the global L2 norm of grads exceeds max_norm, scale all of them by
// max_norm / norm. Returns the pre-clip norm.
double clip_global_norm(std::vector<Mat>& grads, double max_norm);

struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void init(const ParamStore& params);
};

// Bias-corrected Adam update, step counted from 1.
void adam_step(ParamStore& params, const std::vector<Mat>& grads, AdamState& state, long step,
               double lr);

// Checkpoint: <path>.manifest (text: meta lines then "name rows cols") plus
// <path>.bin (per-parameter float32 little-endian arrays in manifest order).
void save_checkpoint(const ParamStore& params, const std::string& path_stem);
ParamStore load_checkpoint(const std::string& path_stem);

}  // namespace q2sql
