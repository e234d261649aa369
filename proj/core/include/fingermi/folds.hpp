#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fingermi {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified k-fold split. Each class's indices are shuffled by `seed` and
/// dealt round-robin, so every test fold holds floor or ceil of n_c/k trials of
/// class c and the test folds partition [0, labels.size()). Both index lists
/// are returned sorted. Throws ValueError for k < 2 or a class with fewer than
/// k members.
std::vector<Fold> stratified_kfold(std::span<const std::uint8_t> labels, std::size_t k = 5,
                                   std::uint64_t seed = 0);

}  // namespace fingermi
