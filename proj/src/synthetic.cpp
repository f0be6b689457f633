#include "wits/synthetic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wits/cascade.hpp"
#include "wits/errors.hpp"
#include "wits/rng.hpp"

namespace fs = std::filesystem;

namespace wits {

namespace {

constexpr double kPi = 3.141592653589793;

struct SubjectAppearance {
  double base_brightness;
  double amplitude;
  double phase;
  BBox bbox;
};

SubjectAppearance subject_appearance(const SyntheticConfig& cfg, int subject) {
  StreamRng rng(stream_key(cfg.seed, "subject", static_cast<uint64_t>(subject)));
  SubjectAppearance ap;
  ap.base_brightness = 0.40 + 0.12 * rng.uniform(-1.0, 1.0);
  ap.amplitude = 0.22 + 0.04 * rng.uniform(-1.0, 1.0);
  ap.phase = rng.uniform(0.0, 2.0 * kPi);

  // Fixed seat in the virtual lecture hall, jittered a little.
  const int cols = 5;
  int col = subject % cols;
  int row = subject / cols;
  int cell_w = cfg.frame_width / cols;
  int rows = (cfg.subjects + cols - 1) / cols;
  int cell_h = cfg.frame_height / std::max(rows, 1);
  int bw = std::min(cell_w * 3 / 5, cfg.frame_width - 2);
  int bh = std::min(cell_h * 3 / 5, cfg.frame_height - 2);
  int jx = static_cast<int>(rng.bounded(std::max(1, cell_w - bw - 2)));
  int jy = static_cast<int>(rng.bounded(std::max(1, cell_h - bh - 2)));
  ap.bbox = {col * cell_w + 1 + jx, row * cell_h + 1 + jy, bw, bh};
  ap.bbox.x = std::min(ap.bbox.x, cfg.frame_width - bw - 1);
  ap.bbox.y = std::min(ap.bbox.y, cfg.frame_height - bh - 1);
  return ap;
}

ActionFlags sample_actions_for_state(StreamRng& rng, bool interested,
                                     Posture& posture, HeadPose& head) {
  ActionFlags a;
  if (interested) {
    double u = rng.uniform01();
    if (u < 0.35) {
      a.writing = true;
    } else if (u < 0.40) {
      a.raised_hand = true;
    }
    // An accepted sample can legitimately carry rejection triggers.
    if ((a.writing || a.raised_hand) && rng.uniform01() < 0.15) {
      a.talking = true;
    }
    double up = rng.uniform01();
    posture = up < 0.6 ? Posture::Upright
                       : (up < 0.8 ? Posture::LeaningForward : Posture::LeaningBack);
    double uh = rng.uniform01();
    head = uh < 0.7 ? HeadPose::Forward
                    : (uh < 0.8 ? HeadPose::ModerateLeft
                                : (uh < 0.9 ? HeadPose::ModerateRight : HeadPose::OnDesk));
  } else {
    posture = Posture::Upright;
    head = HeadPose::Forward;
    // Draw one primary trigger, occasionally a second.
    int n_triggers = rng.uniform01() < 0.3 ? 2 : 1;
    for (int t = 0; t < n_triggers; ++t) {
      switch (rng.bounded(10)) {
        case 0: a.cellphone = true; break;
        case 1: a.talking = true; break;
        case 2: a.yawning = true; break;
        case 3: a.head_on_desk = true; break;
        case 4: posture = Posture::LeaningLeft; break;
        case 5: posture = Posture::LeaningRight; break;
        case 6: head = HeadPose::FarLeft; break;
        case 7: head = HeadPose::FarRight; break;
        case 8: head = HeadPose::Up; break;
        case 9: head = HeadPose::BelowDesk; break;
      }
    }
  }
  return a;
}

struct SegmentTexture {
  double orientation_rad;
  double frequency;
  double gradient;
  double warmth;
  double phase;
};

SegmentTexture segment_texture(const SyntheticConfig& cfg, int subject, int segment,
                               bool interested) {
  StreamRng rng(stream_key(cfg.seed, "texture", static_cast<uint64_t>(subject),
                           static_cast<uint64_t>(segment)));
  const TextureParams& mean = interested ? cfg.interested : cfg.not_interested;
  const double o = cfg.overlap;
  SegmentTexture t;
  t.orientation_rad =
      (mean.orientation_deg + o * 180.0 * rng.uniform(-1.0, 1.0)) * kPi / 180.0;
  t.frequency = std::max(1.0, mean.frequency + o * 8.0 * rng.uniform(-1.0, 1.0));
  t.gradient = mean.gradient + o * 0.4 * rng.uniform(-1.0, 1.0);
  t.warmth = mean.warmth * (1.0 - 0.5 * o) + 0.04 * o * rng.uniform(-1.0, 1.0);
  t.phase = rng.uniform(0.0, 2.0 * kPi);
  return t;
}

ImageU8 render_crop(const SyntheticConfig& cfg, const SubjectAppearance& ap,
                    const SegmentTexture& tex, int frame_in_segment,
                    uint64_t noise_key) {
  const int s = cfg.crop_size;
  ImageF img(s, s, 3);
  StreamRng noise(noise_key);
  const double phase = ap.phase + tex.phase + 0.15 * frame_in_segment;
  const double co = std::cos(tex.orientation_rad);
  const double si = std::sin(tex.orientation_rad);
  const double noise_amp = cfg.noise_sigma * 1.732;  // matches sigma for uniform
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      double proj = (x * co + y * si) / s;
      double wave = std::sin(2.0 * kPi * tex.frequency * proj + phase);
      double base = ap.base_brightness + ap.amplitude * wave +
                    tex.gradient * (static_cast<double>(y) / s - 0.5);
      double r = base + tex.warmth + noise_amp * noise.uniform(-1.0, 1.0);
      double g = base + noise_amp * noise.uniform(-1.0, 1.0);
      double b = base - tex.warmth + noise_amp * noise.uniform(-1.0, 1.0);
      img.at(y, x, 0) = static_cast<float>(r);
      img.at(y, x, 1) = static_cast<float>(g);
      img.at(y, x, 2) = static_cast<float>(b);
    }
  }
  return to_u8(img);
}

std::string subject_name(int subject) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "s%02d", subject);
  return buf;
}

}  // namespace

SyntheticResult generate_synthetic(const SyntheticConfig& cfg,
                                   const std::string& out_dir) {
  if (cfg.subjects <= 0 || cfg.frames_per_subject <= 0 || cfg.crop_size <= 0) {
    throw DataError("generate_synthetic: counts and crop size must be positive");
  }
  if (cfg.overlap < 0.0 || cfg.overlap > 1.0) {
    throw DataError("generate_synthetic: overlap must be in [0, 1]");
  }
  fs::create_directories(out_dir);
  CropStore store = CropStore::create(out_dir + "/crops", cfg.crop_size);

  std::vector<std::vector<AnnotationRecord>> per_subject(cfg.subjects);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int s = 0; s < cfg.subjects; ++s) {
    SubjectAppearance ap = subject_appearance(cfg, s);
    StreamRng behavior(stream_key(cfg.seed, "behavior", static_cast<uint64_t>(s)));
    std::string name = subject_name(s);

    bool interested = behavior.uniform01() < cfg.interested_start_prob;
    int segment = 0;
    int frame_in_segment = 0;
    std::vector<AnnotationRecord>& recs = per_subject[s];
    recs.reserve(cfg.frames_per_subject);

    for (int f = 0; f < cfg.frames_per_subject; ++f) {
      if (f > 0 && behavior.uniform01() < cfg.state_flip_prob) {
        interested = !interested;
        ++segment;
        frame_in_segment = 0;
      }

      AnnotationRecord rec;
      rec.lecture_id = cfg.lecture_id;
      rec.subject_id = name;
      rec.frame_index = f;
      rec.bbox = ap.bbox;
      rec.actions = sample_actions_for_state(behavior, interested, rec.posture, rec.head);
      if (cfg.laptop_probability > 0.0 &&
          behavior.uniform01() < cfg.laptop_probability) {
        rec.actions.laptop = true;
      }
      assert((cascade_classify(rec.actions, rec.posture, rec.head) ==
              EngagementLabel::Interested) == interested);

      SegmentTexture tex = segment_texture(cfg, s, segment, interested);
      uint64_t noise_key = stream_key(cfg.seed, "noise", static_cast<uint64_t>(s),
                                      static_cast<uint64_t>(f));
      ImageU8 crop = render_crop(cfg, ap, tex, frame_in_segment, noise_key);
      write_png(store.crop_path(rec.lecture_id, name, f), crop);

      recs.push_back(std::move(rec));
      ++frame_in_segment;
    }
  }

  SyntheticResult result{std::vector<AnnotationRecord>{}, std::move(store)};
  for (int s = 0; s < cfg.subjects; ++s) {
    for (auto& rec : per_subject[s]) result.annotations.push_back(std::move(rec));
  }
  result.store.set_count(result.annotations.size());
  result.store.write_manifest();
  return result;
}

std::vector<std::vector<size_t>> build_cube_groups(
    const std::vector<AnnotationRecord>& records,
    const std::vector<EngagementLabel>& labels, int k) {
  if (k <= 0) throw DataError("build_cube_groups: k must be positive");
  if (labels.size() != records.size()) {
    throw DataError("build_cube_groups: labels/records size mismatch");
  }
  // Order records per (lecture, subject) by frame index.
  std::map<std::pair<int, std::string>, std::vector<size_t>> by_subject;
  for (size_t i = 0; i < records.size(); ++i) {
    by_subject[{records[i].lecture_id, records[i].subject_id}].push_back(i);
  }
  std::vector<std::vector<size_t>> groups;
  for (auto& [key, idx] : by_subject) {
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return records[a].frame_index < records[b].frame_index;
    });
    size_t run_start = 0;
    for (size_t i = 0; i <= idx.size(); ++i) {
      bool run_breaks =
          i == idx.size() || (i > run_start && labels[idx[i]] != labels[idx[run_start]]);
      if (run_breaks) {
        // Emit non-overlapping windows of k within the same-label run.
        for (size_t w = run_start; w + k <= i; w += k) {
          groups.emplace_back(idx.begin() + w, idx.begin() + w + k);
        }
        run_start = i;
      }
    }
  }
  return groups;
}

}  // namespace wits
