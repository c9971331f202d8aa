#pragma once

#include <map>
#include <string>
#include <vector>

namespace q2sql {

// Deterministic tokenizer: lowercase, whitespace split, leading/trailing
// punctuation (. , ? ! ( )) separated, double-quoted spans kept as one
// token including the quotes. A quoted span glued to preceding text
// (table."column") stays part of that token.
std::vector<std::string> tokenize(const std::string& text);

struct Vocab {
  std::vector<std::string> id_to_token;
  std::map<std::string, int> token_to_id;
  std::vector<int> schema_ids;  // template keywords, table names, headers

  int pad = -1, bos = -1, eos = -1, ph = -1;

  int id(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? -1 : it->second;
  }
  const std::string& token(int id) const { return id_to_token[static_cast<size_t>(id)]; }
  int size() const { return static_cast<int>(id_to_token.size()); }
  bool is_schema(int id) const;
};

inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kBosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kPhToken = "[PH]";

// Built from the training split only. Tokens with frequency >= min_freq
// are kept; schema tokens are force-included and recorded in schema_ids.
Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus,
                  const std::vector<std::string>& schema_tokens, int min_freq = 5);

void save_vocab(const Vocab& v, const std::string& path_stem);
Vocab load_vocab(const std::string& path_stem);

struct QuestionEncoding {
  std::vector<int> ids;                  // length J <= 30; OOV positions hold the PH id
  std::map<int, std::string> oov_positions;  // position -> surface token (X - V)
  std::vector<std::string> surface;      // original tokens after truncation (the set X)
};

inline constexpr int kMaxSourceLen = 30;
inline constexpr int kMaxTargetLen = 30;

QuestionEncoding encode_question(const std::vector<std::string>& tokens, const Vocab& v);

// BOS ... EOS framing; OOV target tokens become PH so the loss stays on V.
std::vector<int> encode_target(const std::vector<std::string>& tokens, const Vocab& v);

std::vector<std::string> decode_ids(const std::vector<int>& ids, const Vocab& v);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace q2sql
