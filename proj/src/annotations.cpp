#include "wits/annotations.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "wits/errors.hpp"

namespace fs = std::filesystem;

namespace wits {

namespace {

using json = nlohmann::ordered_json;

AnnotationRecord record_from_json(const json& j, size_t line_no) {
  auto fail = [line_no](const std::string& msg) -> void {
    throw DataError("annotations line " + std::to_string(line_no) + ": " + msg);
  };

  static const std::set<std::string> known_keys = {
      "lecture_id", "subject_id", "frame_index", "bbox", "actions", "posture",
      "head_pose"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known_keys.count(it.key())) fail("unknown key '" + it.key() + "'");
  }
  for (const auto& k : known_keys) {
    if (!j.contains(k)) fail("missing key '" + k + "'");
  }

  AnnotationRecord rec;
  try {
    rec.lecture_id = j.at("lecture_id").get<int>();
    rec.subject_id = j.at("subject_id").get<std::string>();
    rec.frame_index = j.at("frame_index").get<int64_t>();
    const auto& bbox = j.at("bbox");
    if (!bbox.is_array() || bbox.size() != 4) fail("bbox must be [x, y, w, h]");
    rec.bbox = {bbox[0].get<int>(), bbox[1].get<int>(), bbox[2].get<int>(),
                bbox[3].get<int>()};
    const auto& actions = j.at("actions");
    for (auto it = actions.begin(); it != actions.end(); ++it) {
      bool known = false;
      for (auto name : kActionFieldNames) known |= it.key() == name;
      if (!known) fail("unknown action '" + it.key() + "'");
      if (!it.value().is_boolean()) fail("action '" + it.key() + "' must be a bool");
    }
    auto flag = [&](const char* name) {
      return actions.contains(name) && actions.at(name).get<bool>();
    };
    rec.actions.writing = flag("writing");
    rec.actions.cellphone = flag("cellphone");
    rec.actions.laptop = flag("laptop");
    rec.actions.talking = flag("talking");
    rec.actions.raised_hand = flag("raised_hand");
    rec.actions.yawning = flag("yawning");
    rec.actions.head_on_desk = flag("head_on_desk");
    rec.posture = posture_from_string(j.at("posture").get<std::string>());
    rec.head = head_pose_from_string(j.at("head_pose").get<std::string>());
  } catch (const DataError& e) {
    fail(e.what());
  } catch (const json::exception& e) {
    fail(e.what());
  }

  if (rec.frame_index < 0) fail("frame_index must be non-negative");
  if (rec.bbox.x < 0 || rec.bbox.y < 0 || rec.bbox.w <= 0 || rec.bbox.h <= 0) {
    fail("bbox must have non-negative origin and positive size");
  }
  return rec;
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(const std::string& text,
                                                const LoadOptions& opts) {
  std::vector<AnnotationRecord> records;
  std::set<std::tuple<int, std::string, int64_t>> seen;

  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("annotations line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    AnnotationRecord rec = record_from_json(j, line_no);
    auto key = std::make_tuple(rec.lecture_id, rec.subject_id, rec.frame_index);
    if (!seen.insert(key).second) {
      throw DataError("annotations line " + std::to_string(line_no) +
                      ": duplicate record key (" + std::to_string(rec.lecture_id) +
                      ", " + rec.subject_id + ", " + std::to_string(rec.frame_index) +
                      ")");
    }
    if (opts.exclude_laptop && rec.actions.laptop) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path,
                                               const LoadOptions& opts) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open annotations file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_annotations(buf.str(), opts);
}

std::string annotation_to_json_line(const AnnotationRecord& rec) {
  json j;
  j["lecture_id"] = rec.lecture_id;
  j["subject_id"] = rec.subject_id;
  j["frame_index"] = rec.frame_index;
  j["bbox"] = {rec.bbox.x, rec.bbox.y, rec.bbox.w, rec.bbox.h};
  json actions;
  actions["writing"] = rec.actions.writing;
  actions["cellphone"] = rec.actions.cellphone;
  actions["laptop"] = rec.actions.laptop;
  actions["talking"] = rec.actions.talking;
  actions["raised_hand"] = rec.actions.raised_hand;
  actions["yawning"] = rec.actions.yawning;
  actions["head_on_desk"] = rec.actions.head_on_desk;
  j["actions"] = actions;
  j["posture"] = std::string(to_string(rec.posture));
  j["head_pose"] = std::string(to_string(rec.head));
  return j.dump();
}

void save_annotations(const std::string& path,
                      const std::vector<AnnotationRecord>& records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + path);
  for (const auto& rec : records) {
    f << annotation_to_json_line(rec) << '\n';
  }
  if (!f) throw DataError("write failed: " + path);
}

std::string CropStore::crop_path(int lecture_id, const std::string& subject_id,
                                 int64_t frame_index) const {
  return dir_ + "/" + std::to_string(lecture_id) + "_" + subject_id + "_" +
         std::to_string(frame_index) + ".png";
}

CropStore CropStore::open(const std::string& dir) {
  std::ifstream f(dir + "/manifest.json");
  if (!f) throw DataError("crop store manifest not found in: " + dir);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw DataError("bad crop store manifest: " + std::string(e.what()));
  }
  CropStore store;
  store.dir_ = dir;
  store.crop_size_ = j.at("crop_size").get<int>();
  store.count_ = j.at("count").get<size_t>();
  return store;
}

CropStore CropStore::create(const std::string& dir, int crop_size) {
  if (crop_size <= 0) throw DataError("crop size must be positive");
  fs::create_directories(dir);
  CropStore store;
  store.dir_ = dir;
  store.crop_size_ = crop_size;
  store.count_ = 0;
  return store;
}

ImageF CropStore::load(int lecture_id, const std::string& subject_id,
                       int64_t frame_index) const {
  std::string path = crop_path(lecture_id, subject_id, frame_index);
  if (!fs::exists(path)) throw DataError("missing crop: " + path);
  ImageU8 img = read_png(path);
  if (img.width != crop_size_ || img.height != crop_size_) {
    throw DataError("crop size mismatch: " + path);
  }
  if (img.channels != 3) throw DataError("crop must be RGB: " + path);
  return to_float(img);
}

void CropStore::store(int lecture_id, const std::string& subject_id,
                      int64_t frame_index, const ImageU8& crop) {
  if (crop.width != crop_size_ || crop.height != crop_size_ || crop.channels != 3) {
    throw DataError("crop geometry does not match store configuration");
  }
  write_png(crop_path(lecture_id, subject_id, frame_index), crop);
  ++count_;
}

void CropStore::write_manifest() const {
  json j;
  j["crop_size"] = crop_size_;
  j["count"] = count_;
  std::ofstream f(dir_ + "/manifest.json", std::ios::binary);
  if (!f) throw DataError("cannot write crop store manifest in: " + dir_);
  f << j.dump(2) << '\n';
}

}  // namespace wits
