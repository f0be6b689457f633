#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wits {

// Per-frame multi-label action annotations. Any subset may be true at once.
struct ActionFlags {
  bool writing = false;
  bool cellphone = false;
  bool laptop = false;
  bool talking = false;
  bool raised_hand = false;
  bool yawning = false;
  bool head_on_desk = false;

  bool operator==(const ActionFlags&) const = default;
};

enum class Posture : uint8_t {
  LeaningLeft,
  LeaningRight,
  LeaningBack,
  LeaningForward,
  Upright,
};
inline constexpr int kPostureCount = 5;

enum class HeadPose : uint8_t {
  FarLeft,
  FarRight,
  ModerateLeft,
  ModerateRight,
  BelowDesk,
  OnDesk,
  Up,
  Forward,
};
inline constexpr int kHeadPoseCount = 8;

enum class EngagementLabel : uint8_t { NotInterested = 0, Interested = 1 };

// Names of the individual rules, used for per-rule firing statistics.
// Order matters: it is the attribution precedence (acceptance rules first,
// then rejection rules in listing order, then the engaged default).
enum class CascadeRule : uint8_t {
  AcceptWriting,
  AcceptRaisedHand,
  RejectCellphone,
  RejectHeadOnDesk,
  RejectYawning,
  RejectTalking,
  RejectLeaningLeft,
  RejectLeaningRight,
  RejectFarLeft,
  RejectFarRight,
  RejectUp,
  RejectBelowDesk,
  DefaultInterested,
};
inline constexpr int kCascadeRuleCount = 13;

std::string_view cascade_rule_name(CascadeRule rule);

// The observational checklist. Stage 1 accepts on writing / raised hand,
// stage 2 rejects on any disengagement trigger, stage 3 defaults to engaged.
EngagementLabel cascade_classify(const ActionFlags& actions, Posture posture,
                                 HeadPose head);

// Same decision, but also reports which rule decided the sample (the first
// rule to fire in attribution order).
struct CascadeDecision {
  EngagementLabel label;
  CascadeRule rule;
};
CascadeDecision cascade_classify_attributed(const ActionFlags& actions,
                                            Posture posture, HeadPose head);

// Exhaustive enumeration of the 2^7 x 5 x 8 = 5,120 input triples in
// lexicographic order (action bits fastest-varying field first, then
// posture, then head pose).
struct CascadeEntry {
  ActionFlags actions;
  Posture posture;
  HeadPose head;
  EngagementLabel label;
};
std::vector<CascadeEntry> cascade_truth_table();

// Bit packing used by the truth table: bit i of `bits` is field i in
// declaration order (writing, cellphone, laptop, talking, raised_hand,
// yawning, head_on_desk).
ActionFlags actions_from_bits(uint32_t bits);
uint32_t actions_to_bits(const ActionFlags& a);

// snake_case string mappings used by the annotation schema.
std::string_view to_string(Posture p);
std::string_view to_string(HeadPose h);
std::string_view to_string(EngagementLabel l);
Posture posture_from_string(std::string_view s);
HeadPose head_pose_from_string(std::string_view s);
EngagementLabel label_from_string(std::string_view s);

inline constexpr std::array<std::string_view, 7> kActionFieldNames = {
    "writing", "cellphone", "laptop",       "talking",
    "raised_hand", "yawning", "head_on_desk"};

}  // namespace wits
