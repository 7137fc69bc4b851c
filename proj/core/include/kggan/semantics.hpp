// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kggan {

inline constexpr std::size_t kDefaultEmbeddingDim = 64;

/// Per-category semantic vector with entries in [0, 1].
struct SemanticEmbedding {
  int category_id = 0;
  std::vector<double> vector;
};

struct OneHot {
  std::size_t index = 0;
  std::vector<double> vector;
};

/// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Bucket of a token: FNV-1a 64 of its bytes modulo dim.
std::size_t token_bucket(std::string_view token, std::size_t dim);

/// Hashed bag of words: bucket counts scaled by 1 / (1 + max count). The
/// result already lies in [0, 1), so the range mapping is the identity.
std::vector<double> embed_text(std::string_view description, std::size_t dim = kDefaultEmbeddingDim);

/// Mean of embed_text over the descriptions, clamped to [0, 1].
SemanticEmbedding category_embedding(int category_id, std::span<const std::string> descriptions,
                                     std::size_t dim = kDefaultEmbeddingDim);

OneHot one_hot(std::size_t index, std::size_t n);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// category_id -> embedding, ordered by id.
using EmbeddingTable = std::map<int, SemanticEmbedding>;

}  // namespace kggan
