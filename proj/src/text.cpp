#include "q2sql/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace q2sql {

static bool is_sep_punct(char c) {
  return c == '.' || c == ',' || c == '?' || c == '!' || c == '(' || c == ')';
}

std::vector<std::string> tokenize(const std::string& text) {
  std::string lower;
  lower.reserve(text.size());
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  // whitespace split, but double-quoted spans never split
  std::vector<std::string> raw;
  std::string cur;
  bool in_quote = false;
  for (char c : lower) {
    if (c == '"') {
      in_quote = !in_quote;
      cur.push_back(c);
    } else if (!in_quote && std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        raw.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) raw.push_back(cur);

  // peel leading/trailing punctuation
  std::vector<std::string> out;
  for (const std::string& tok : raw) {
    size_t b = 0, e = tok.size();
    std::vector<char> lead, trail;
    while (b < e && is_sep_punct(tok[b])) lead.push_back(tok[b++]);
    while (e > b && is_sep_punct(tok[e - 1]) && tok[e - 1] != '"') trail.push_back(tok[--e]);
    for (char c : lead) out.emplace_back(1, c);
    if (e > b) out.push_back(tok.substr(b, e - b));
    for (auto it = trail.rbegin(); it != trail.rend(); ++it) out.emplace_back(1, *it);
  }
  return out;
}

bool Vocab::is_schema(int id) const {
  return std::find(schema_ids.begin(), schema_ids.end(), id) != schema_ids.end();
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus,
                  const std::vector<std::string>& schema_tokens, int min_freq) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::map<std::string, long> freq;
  std::vector<std::string> order;  // first-appearance order keeps construction deterministic
  for (const auto& seq : corpus)
    for (const auto& tok : seq) {
      auto [it, inserted] = freq.try_emplace(tok, 0);
      if (inserted) order.push_back(tok);
      ++it->second;
    }

  Vocab v;
  auto add = [&v](const std::string& tok) {
    if (v.token_to_id.count(tok)) return v.token_to_id[tok];
    int id = v.size();
    v.id_to_token.push_back(tok);
    v.token_to_id[tok] = id;
    return id;
  };
  v.pad = add(kPadToken);
  v.bos = add(kBosToken);
  v.eos = add(kEosToken);
  v.ph = add(kPhToken);
  for (const auto& tok : schema_tokens) v.schema_ids.push_back(add(tok));
  for (const auto& tok : order)
    if (freq[tok] >= min_freq) add(tok);
  return v;
}

void save_vocab(const Vocab& v, const std::string& stem) {
  std::ofstream f(stem + ".vocab");
  if (!f) throw std::runtime_error("cannot write " + stem + ".vocab");
  for (const auto& tok : v.id_to_token) f << tok << "\n";
  std::ofstream s(stem + ".schema");
  if (!s) throw std::runtime_error("cannot write " + stem + ".schema");
  for (int id : v.schema_ids) s << id << "\n";
}

Vocab load_vocab(const std::string& stem) {
  std::ifstream f(stem + ".vocab");
  if (!f) throw std::runtime_error("cannot read " + stem + ".vocab");
  Vocab v;
  std::string line;
  while (std::getline(f, line)) {
    v.token_to_id[line] = v.size();
    v.id_to_token.push_back(line);
  }
  v.pad = v.id(kPadToken);
  v.bos = v.id(kBosToken);
  v.eos = v.id(kEosToken);
  v.ph = v.id(kPhToken);
  if (v.pad < 0 || v.bos < 0 || v.eos < 0 || v.ph < 0)
    throw std::runtime_error("vocab file missing special tokens: " + stem);
  std::ifstream s(stem + ".schema");
  if (!s) throw std::runtime_error("cannot read " + stem + ".schema");
  while (std::getline(s, line))
    if (!line.empty()) v.schema_ids.push_back(std::stoi(line));
  return v;
}

QuestionEncoding encode_question(const std::vector<std::string>& tokens, const Vocab& v) {
  QuestionEncoding enc;
  const int n = std::min<int>(static_cast<int>(tokens.size()), kMaxSourceLen);
  for (int j = 0; j < n; ++j) {
    enc.surface.push_back(tokens[static_cast<size_t>(j)]);
    int id = v.id(tokens[static_cast<size_t>(j)]);
    if (id < 0) {
      enc.ids.push_back(v.ph);
      enc.oov_positions[j] = tokens[static_cast<size_t>(j)];
    } else {
      enc.ids.push_back(id);
    }
  }
  return enc;
}

std::vector<int> encode_target(const std::vector<std::string>& tokens, const Vocab& v) {
  std::vector<int> ids;
  ids.push_back(v.bos);
  const int n = std::min<int>(static_cast<int>(tokens.size()), kMaxTargetLen);
  for (int t = 0; t < n; ++t) {
    int id = v.id(tokens[static_cast<size_t>(t)]);
    ids.push_back(id < 0 ? v.ph : id);
  }
  ids.push_back(v.eos);
  return ids;
}

std::vector<std::string> decode_ids(const std::vector<int>& ids, const Vocab& v) {
  std::vector<std::string> out;
  for (int id : ids) out.push_back(v.token(id));
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

}  // namespace q2sql
