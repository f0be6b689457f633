#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wits/cascade.hpp"
#include "wits/image.hpp"

namespace wits {

struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const BBox&) const = default;
};

// One student-frame's behavior annotations plus identity and location.
struct AnnotationRecord {
  int lecture_id = 0;
  std::string subject_id;
  int64_t frame_index = 0;
  BBox bbox;
  ActionFlags actions;
  Posture posture = Posture::Upright;
  HeadPose head = HeadPose::Forward;

  bool operator==(const AnnotationRecord&) const = default;
};

struct LoadOptions {
  // Records with laptop=true are dropped by default: only one subject ever
  // used one and that subject is excluded from the experiments.
  bool exclude_laptop = true;
};

// JSON-Lines ingestion with validation: schema and enum checks, duplicate
// (lecture_id, subject_id, frame_index) rejection. Errors carry the 1-based
// line number.
std::vector<AnnotationRecord> load_annotations(const std::string& path,
                                               const LoadOptions& opts = {});
std::vector<AnnotationRecord> parse_annotations(const std::string& text,
                                                const LoadOptions& opts = {});

// Canonical one-line serialization (fixed field order); load followed by
// save is byte-idempotent.
std::string annotation_to_json_line(const AnnotationRecord& rec);
void save_annotations(const std::string& path,
                      const std::vector<AnnotationRecord>& records);

// Directory of {lecture}_{subject}_{frame}.png crops plus a manifest.
class CropStore {
 public:
  // Opens an existing store (reads crops/manifest.json).
  static CropStore open(const std::string& dir);
  // Creates an empty store rooted at dir with the given crop size.
  static CropStore create(const std::string& dir, int crop_size);

  const std::string& dir() const { return dir_; }
  int crop_size() const { return crop_size_; }
  size_t count() const { return count_; }

  std::string crop_path(int lecture_id, const std::string& subject_id,
                        int64_t frame_index) const;

  // Loads a crop as float RGB in [0,1]; throws DataError when missing.
  ImageF load(int lecture_id, const std::string& subject_id,
              int64_t frame_index) const;

  void store(int lecture_id, const std::string& subject_id, int64_t frame_index,
             const ImageU8& crop);

  // Used by generators that write crops through crop_path() directly.
  void set_count(size_t n) { count_ = n; }

  void write_manifest() const;

 private:
  std::string dir_;
  int crop_size_ = 0;
  size_t count_ = 0;
};

}  // namespace wits
