// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#include "kggan/rng.hpp"

#include <sstream>

#include "kggan/error.hpp"

namespace kggan {

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::deserialize(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  require(!in.fail(), ErrorKind::kIo, "corrupt random-engine state");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  // splitmix64 finalizer over the combined word.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace kggan
