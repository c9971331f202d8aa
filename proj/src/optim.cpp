#include "q2sql/optim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace q2sql {

int ParamStore::add(const std::string& name, Mat m) {
  if (index_of(name) >= 0) throw std::invalid_argument("ParamStore: duplicate name " + name);
  names.push_back(name);
  mats.push_back(std::move(m));
  return static_cast<int>(mats.size()) - 1;
}

int ParamStore::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

Mat& ParamStore::operator[](const std::string& name) {
  int i = index_of(name);
  if (i < 0) throw std::invalid_argument("ParamStore: no parameter " + name);
  return mats[i];
}

const Mat& ParamStore::operator[](const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw std::invalid_argument("ParamStore: no parameter " + name);
  return mats[i];
}

double clip_global_norm(std::vector<Mat>& grads, double max_norm) {
  if (max_norm <= 0.0) throw std::invalid_argument("clip_global_norm: max_norm must be positive");
  double sq = 0.0;
  for (const Mat& g : grads) sq += l2_norm_sq(g);
  double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (Mat& g : grads)
      for (double& x : g.v) x *= scale;
  }
  return norm;
}

void AdamState::init(const ParamStore& params) {
  m.clear();
  v.clear();
  for (const Mat& p : params.mats) {
    m.emplace_back(p.rows, p.cols);
    v.emplace_back(p.rows, p.cols);
  }
}

void adam_step(ParamStore& params, const std::vector<Mat>& grads, AdamState& st, long step,
               double lr) {
  if (step < 1) throw std::invalid_argument("adam_step: step must be >= 1");
  if (grads.size() != params.mats.size() || st.m.size() != params.mats.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(step));
  for (size_t k = 0; k < params.mats.size(); ++k) {
    Mat& p = params.mats[k];
    const Mat& g = grads[k];
    if (!p.same_shape(g)) throw std::invalid_argument("adam_step: gradient shape mismatch");
    for (size_t i = 0; i < p.v.size(); ++i) {
      double& m = st.m[k].v[i];
      double& v = st.v[k].v[i];
      m = st.beta1 * m + (1.0 - st.beta1) * g.v[i];
      v = st.beta2 * v + (1.0 - st.beta2) * g.v[i] * g.v[i];
      p.v[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + st.eps);
    }
  }
}

void save_checkpoint(const ParamStore& params, const std::string& stem) {
  std::ofstream mf(stem + ".manifest");
  if (!mf) throw std::runtime_error("cannot write " + stem + ".manifest");
  mf << "# q2sql-checkpoint v1\n";
  for (const auto& [k, v] : params.meta) mf << "# meta " << k << " " << v << "\n";
  for (size_t i = 0; i < params.names.size(); ++i)
    mf << params.names[i] << " " << params.mats[i].rows << " " << params.mats[i].cols << "\n";
  mf.close();

  std::ofstream bf(stem + ".bin", std::ios::binary);
  if (!bf) throw std::runtime_error("cannot write " + stem + ".bin");
  std::vector<float> buf;
  for (const Mat& m : params.mats) {
    buf.resize(m.v.size());
    for (size_t i = 0; i < m.v.size(); ++i) buf[i] = static_cast<float>(m.v[i]);
    bf.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
}

ParamStore load_checkpoint(const std::string& stem) {
  std::ifstream mf(stem + ".manifest");
  if (!mf) throw std::runtime_error("cannot read " + stem + ".manifest");
  ParamStore ps;
  std::string line;
  std::vector<std::pair<int, int>> shapes;
  while (std::getline(mf, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tag, key;
      if (ss >> tag && tag == "meta" && ss >> key) {
        std::string val;
        std::getline(ss, val);
        if (!val.empty() && val[0] == ' ') val.erase(0, 1);
        ps.meta[key] = val;
      }
      continue;
    }
    std::istringstream ss(line);
    std::string name;
    int r = 0, c = 0;
    if (!(ss >> name >> r >> c) || r <= 0 || c <= 0)
      throw std::runtime_error("malformed manifest line: " + line);
    ps.names.push_back(name);
    shapes.emplace_back(r, c);
  }
  if (ps.names.empty()) throw std::runtime_error("empty checkpoint manifest: " + stem);

  std::ifstream bf(stem + ".bin", std::ios::binary);
  if (!bf) throw std::runtime_error("cannot read " + stem + ".bin");
  for (auto [r, c] : shapes) {
    std::vector<float> buf(static_cast<size_t>(r) * c);
    bf.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!bf) throw std::runtime_error("checkpoint binary truncated: " + stem);
    Mat m(r, c);
    for (size_t i = 0; i < buf.size(); ++i) m.v[i] = static_cast<double>(buf[i]);
    ps.mats.push_back(std::move(m));
  }
  char extra;
  if (bf.read(&extra, 1)) throw std::runtime_error("checkpoint binary has trailing bytes: " + stem);
  return ps;
}

}  // namespace q2sql
