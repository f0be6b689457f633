#include "wits/sampling.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "wits/errors.hpp"
#include "wits/rng.hpp"

namespace wits {

namespace {

std::array<std::vector<size_t>, 2> split_by_class(
    const std::vector<EngagementLabel>& labels) {
  std::array<std::vector<size_t>, 2> by_class;
  for (size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<size_t>(labels[i])].push_back(i);
  }
  return by_class;
}

std::vector<size_t> draw_and_mix(std::array<std::vector<size_t>, 2>& by_class,
                                 const size_t counts[2], uint64_t seed,
                                 const char* tag) {
  std::vector<size_t> out;
  out.reserve(counts[0] + counts[1]);
  for (int c = 0; c < 2; ++c) {
    StreamRng rng(stream_key(seed, tag, static_cast<uint64_t>(c)));
    rng.shuffle(by_class[c]);
    out.insert(out.end(), by_class[c].begin(), by_class[c].begin() + counts[c]);
  }
  StreamRng mix(stream_key(seed, tag, 2));
  mix.shuffle(out);
  return out;
}

}  // namespace

std::vector<size_t> balanced_sample(const std::vector<EngagementLabel>& labels,
                                    size_t per_class, uint64_t seed) {
  auto by_class = split_by_class(labels);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < per_class) {
      throw DataError(std::string("balanced_sample: class '") +
                      std::string(to_string(static_cast<EngagementLabel>(c))) +
                      "' has " + std::to_string(by_class[c].size()) +
                      " items, need " + std::to_string(per_class));
    }
  }
  size_t counts[2] = {per_class, per_class};
  return draw_and_mix(by_class, counts, seed, "balanced");
}

std::vector<size_t> stratified_sample(const std::vector<EngagementLabel>& labels,
                                      size_t total, uint64_t seed) {
  if (total > labels.size()) {
    throw DataError("stratified_sample: requested " + std::to_string(total) +
                    " items from a pool of " + std::to_string(labels.size()));
  }
  auto by_class = split_by_class(labels);
  const size_t n = labels.size();

  // Largest-remainder (Hamilton) apportionment over the two classes.
  size_t counts[2];
  double remainders[2];
  size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    double quota = n == 0 ? 0.0
                          : static_cast<double>(total) *
                                static_cast<double>(by_class[c].size()) /
                                static_cast<double>(n);
    counts[c] = static_cast<size_t>(quota);
    remainders[c] = quota - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  while (assigned < total) {
    int pick = (remainders[0] >= remainders[1]) ? 0 : 1;
    if (counts[pick] >= by_class[pick].size()) pick = 1 - pick;
    counts[pick] += 1;
    remainders[pick] = -1.0;
    ++assigned;
  }
  size_t counts_arr[2] = {counts[0], counts[1]};
  return draw_and_mix(by_class, counts_arr, seed, "stratified");
}

std::vector<std::string> subjects_in_lecture(
    const std::vector<AnnotationRecord>& records, int lecture_id) {
  std::set<std::string> subjects;
  for (const auto& r : records) {
    if (r.lecture_id == lecture_id) subjects.insert(r.subject_id);
  }
  return {subjects.begin(), subjects.end()};
}

SubjectSplit hold_one_subject_out(const std::vector<AnnotationRecord>& records,
                                  const std::vector<EngagementLabel>& labels,
                                  const std::string& subject_id, uint64_t seed,
                                  int lecture_id) {
  if (labels.size() != records.size()) {
    throw DataError("hold_one_subject_out: labels/records size mismatch");
  }
  SubjectSplit split;
  split.subject_id = subject_id;

  std::array<std::vector<size_t>, 2> held_by_class;
  bool found = false;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].lecture_id != lecture_id) continue;
    if (records[i].subject_id == subject_id) {
      found = true;
      split.validation_pool.push_back(i);
      held_by_class[static_cast<size_t>(labels[i])].push_back(i);
    } else {
      split.train_pool.push_back(i);
    }
  }
  if (!found) {
    throw DataError("hold_one_subject_out: unknown subject '" + subject_id +
                    "' in lecture " + std::to_string(lecture_id));
  }

  size_t per_class = std::min(held_by_class[0].size(), held_by_class[1].size());
  if (per_class == 0) {
    split.degenerate = true;  // no balanced test possible for this subject
    return split;
  }
  size_t counts[2] = {per_class, per_class};
  split.test_pool = draw_and_mix(held_by_class, counts,
                                 stream_key(seed, "holdout", hash_string(subject_id)),
                                 "subject_test");
  return split;
}

}  // namespace wits
