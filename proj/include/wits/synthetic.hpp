#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wits/annotations.hpp"

namespace wits {

// Class-conditional texture statistics: a rendered crop is an oriented
// sinusoidal grating plus a vertical brightness ramp and a chromatic
// (warm/cool) bias, all drawn around the class mean.
struct TextureParams {
  double orientation_deg = 0.0;
  double frequency = 6.0;   // grating cycles per crop
  double gradient = 0.0;    // vertical brightness ramp amplitude
  double warmth = 0.0;      // +red/-blue channel bias
};

struct SyntheticConfig {
  int subjects = 10;
  int frames_per_subject = 200;
  int crop_size = 64;
  int lecture_id = 1;
  uint64_t seed = 1;

  // 0 = class textures disjoint, 1 = indistinguishable. Overlap widens the
  // per-sample jitter of orientation/frequency/gradient around the class
  // means and shrinks the chromatic separation.
  double overlap = 0.25;

  // Per-frame probability that a subject's engagement state flips. Frames
  // inside one state segment share texture parameters (slow phase drift
  // only), which makes short sequences temporally redundant.
  double state_flip_prob = 0.05;
  double interested_start_prob = 0.55;
  double laptop_probability = 0.0;

  double noise_sigma = 0.03;

  TextureParams interested{30.0, 5.0, 0.18, 0.10};
  TextureParams not_interested{120.0, 9.0, -0.18, -0.10};

  // Virtual lecture-hall frame that the per-subject bboxes live in.
  int frame_width = 1280;
  int frame_height = 720;
};

struct SyntheticResult {
  std::vector<AnnotationRecord> annotations;
  CropStore store;
};

// Procedurally renders a labelled dataset. Crops land in <out_dir>/crops.
// Every per-subject stream is keyed by (seed, subject), so generation may
// run subjects in parallel and still match sequential output byte for byte.
SyntheticResult generate_synthetic(const SyntheticConfig& config,
                                   const std::string& out_dir);

// Non-overlapping windows of k consecutive same-subject frames that share a
// cascade label (strictly increasing frame indices). Returned as index
// groups into `records`; the group's label is the shared label.
std::vector<std::vector<size_t>> build_cube_groups(
    const std::vector<AnnotationRecord>& records,
    const std::vector<EngagementLabel>& labels, int k);

}  // namespace wits
