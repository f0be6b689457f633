#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wits/annotations.hpp"
#include "wits/cascade.hpp"

namespace wits {

// All samplers return indices into the caller's pool and are deterministic
// functions of their seed (own Fisher-Yates over counter-based streams, no
// standard-library distributions).

// Exactly per_class indices of each label, drawn without replacement,
// output order shuffled. Throws DataError naming the class that is short.
std::vector<size_t> balanced_sample(const std::vector<EngagementLabel>& labels,
                                    size_t per_class, uint64_t seed);

// Per-class counts proportional to the pool's class ratio via
// largest-remainder rounding; counts differ from exact proportionality by
// less than one per class.
std::vector<size_t> stratified_sample(const std::vector<EngagementLabel>& labels,
                                      size_t total, uint64_t seed);

struct SubjectSplit {
  std::string subject_id;
  std::vector<size_t> train_pool;       // every frame of the other subjects
  std::vector<size_t> test_pool;        // balanced sample from the held subject
  std::vector<size_t> validation_pool;  // every frame of the held subject
  bool degenerate = false;  // held subject lacks one class; test pool empty
};

// Hold-one-subject-out split drawn from one lecture only, so subjects that
// reappear in later lectures are not inadvertently repeated. Indices refer
// to the full `records` vector.
SubjectSplit hold_one_subject_out(const std::vector<AnnotationRecord>& records,
                                  const std::vector<EngagementLabel>& labels,
                                  const std::string& subject_id, uint64_t seed,
                                  int lecture_id = 1);

// Distinct subject ids present in the given lecture, sorted.
std::vector<std::string> subjects_in_lecture(
    const std::vector<AnnotationRecord>& records, int lecture_id = 1);

}  // namespace wits
