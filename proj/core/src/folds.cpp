#include "fingermi/folds.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "fingermi/error.hpp"
#include "fingermi/random.hpp"

namespace fingermi {

std::vector<Fold> stratified_kfold(std::span<const std::uint8_t> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValueError("stratified_kfold: k must be at least 2, got " + std::to_string(k));
  std::map<std::uint8_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.empty()) throw ValueError("stratified_kfold: no labels");
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      throw ValueError("stratified_kfold: class " + std::to_string(label) + " has " +
                       std::to_string(members.size()) + " trials, fewer than k=" + std::to_string(k));
    }
  }

  Pcg32 rng(seed);
  std::vector<std::size_t> fold_of(labels.size());
  std::size_t offset = 0;  // rotates the deal so leftover trials spread across folds
  for (auto& [label, members] : by_class) {
    shuffle(std::span(members), rng);
    for (std::size_t j = 0; j < members.size(); ++j) fold_of[members[j]] = (offset + j) % k;
    offset = (offset + members.size()) % k;
  }

  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? folds[f].test : folds[f].train).push_back(i);
  }
  return folds;
}

}  // namespace fingermi
