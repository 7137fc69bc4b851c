// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "kggan/error.hpp"
#include "kggan/hash.hpp"

namespace kggan {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t token_bucket(std::string_view token, std::size_t dim) {
  return static_cast<std::size_t>(fnv1a64(token) % dim);
}

std::vector<double> embed_text(std::string_view description, std::size_t dim) {
  require(dim >= 1, ErrorKind::kConfig, "embedding dimension must be positive");
  const auto tokens = tokenize(description);
  const bool has_alpha = std::any_of(tokens.begin(), tokens.end(), [](const std::string& t) {
    return std::any_of(t.begin(), t.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
  });
  require(has_alpha, ErrorKind::kContract, "embed_text: description has no alphabetic token");

  std::vector<double> counts(dim, 0.0);
  for (const auto& t : tokens) counts[token_bucket(t, dim)] += 1.0;
  const double max_count = *std::max_element(counts.begin(), counts.end());
  const double scale = 1.0 / (1.0 + max_count);
  for (double& c : counts) c *= scale;
  return counts;
}

SemanticEmbedding category_embedding(int category_id, std::span<const std::string> descriptions, std::size_t dim) {
  require(!descriptions.empty(), ErrorKind::kContract, "category_embedding: no descriptions");
  SemanticEmbedding e;
  e.category_id = category_id;
  e.vector.assign(dim, 0.0);
  for (const auto& d : descriptions) {
    const auto v = embed_text(d, dim);
    for (std::size_t i = 0; i < dim; ++i) e.vector[i] += v[i];
  }
  const double n = static_cast<double>(descriptions.size());
  for (double& x : e.vector) x = std::clamp(x / n, 0.0, 1.0);
  return e;
}

OneHot one_hot(std::size_t index, std::size_t n) {
  require(index < n, ErrorKind::kContract,
          "one_hot: index " + std::to_string(index) + " out of range for n = " + std::to_string(n));
  OneHot h;
  h.index = index;
  h.vector.assign(n, 0.0);
  h.vector[index] = 1.0;
  return h;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::kDimension, "cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace kggan
