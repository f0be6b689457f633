#include "wits/cascade.hpp"

#include "wits/errors.hpp"

namespace wits {

EngagementLabel cascade_classify(const ActionFlags& actions, Posture posture,
                                 HeadPose head) {
  // Stage 1: explicit acceptance beats everything else.
  if (actions.writing || actions.raised_hand) return EngagementLabel::Interested;

  // Stage 2: any rejection trigger marks the sample as not interested.
  if (actions.cellphone || actions.head_on_desk || actions.yawning || actions.talking) {
    return EngagementLabel::NotInterested;
  }
  if (posture == Posture::LeaningLeft || posture == Posture::LeaningRight) {
    return EngagementLabel::NotInterested;
  }
  if (head == HeadPose::FarLeft || head == HeadPose::FarRight ||
      head == HeadPose::Up || head == HeadPose::BelowDesk) {
    return EngagementLabel::NotInterested;
  }

  // Stage 3: passed every weak rule, labelled as engaged.
  return EngagementLabel::Interested;
}

CascadeDecision cascade_classify_attributed(const ActionFlags& actions,
                                            Posture posture, HeadPose head) {
  if (actions.writing) return {EngagementLabel::Interested, CascadeRule::AcceptWriting};
  if (actions.raised_hand) {
    return {EngagementLabel::Interested, CascadeRule::AcceptRaisedHand};
  }
  if (actions.cellphone) {
    return {EngagementLabel::NotInterested, CascadeRule::RejectCellphone};
  }
  if (actions.head_on_desk) {
    return {EngagementLabel::NotInterested, CascadeRule::RejectHeadOnDesk};
  }
  if (actions.yawning) return {EngagementLabel::NotInterested, CascadeRule::RejectYawning};
  if (actions.talking) return {EngagementLabel::NotInterested, CascadeRule::RejectTalking};
  if (posture == Posture::LeaningLeft) {
    return {EngagementLabel::NotInterested, CascadeRule::RejectLeaningLeft};
  }
  if (posture == Posture::LeaningRight) {
    return {EngagementLabel::NotInterested, CascadeRule::RejectLeaningRight};
  }
  if (head == HeadPose::FarLeft) {
    return {EngagementLabel::NotInterested, CascadeRule::RejectFarLeft};
  }
  if (head == HeadPose::FarRight) {
    return {EngagementLabel::NotInterested, CascadeRule::RejectFarRight};
  }
  if (head == HeadPose::Up) return {EngagementLabel::NotInterested, CascadeRule::RejectUp};
  if (head == HeadPose::BelowDesk) {
    return {EngagementLabel::NotInterested, CascadeRule::RejectBelowDesk};
  }
  return {EngagementLabel::Interested, CascadeRule::DefaultInterested};
}

ActionFlags actions_from_bits(uint32_t bits) {
  ActionFlags a;
  a.writing = bits & 1u;
  a.cellphone = bits & 2u;
  a.laptop = bits & 4u;
  a.talking = bits & 8u;
  a.raised_hand = bits & 16u;
  a.yawning = bits & 32u;
  a.head_on_desk = bits & 64u;
  return a;
}

uint32_t actions_to_bits(const ActionFlags& a) {
  return (a.writing ? 1u : 0) | (a.cellphone ? 2u : 0) | (a.laptop ? 4u : 0) |
         (a.talking ? 8u : 0) | (a.raised_hand ? 16u : 0) | (a.yawning ? 32u : 0) |
         (a.head_on_desk ? 64u : 0);
}

std::vector<CascadeEntry> cascade_truth_table() {
  std::vector<CascadeEntry> table;
  table.reserve(128 * kPostureCount * kHeadPoseCount);
  for (uint32_t bits = 0; bits < 128; ++bits) {
    ActionFlags actions = actions_from_bits(bits);
    for (int p = 0; p < kPostureCount; ++p) {
      for (int h = 0; h < kHeadPoseCount; ++h) {
        Posture posture = static_cast<Posture>(p);
        HeadPose head = static_cast<HeadPose>(h);
        table.push_back({actions, posture, head, cascade_classify(actions, posture, head)});
      }
    }
  }
  return table;
}

std::string_view cascade_rule_name(CascadeRule rule) {
  switch (rule) {
    case CascadeRule::AcceptWriting: return "accept_writing";
    case CascadeRule::AcceptRaisedHand: return "accept_raised_hand";
    case CascadeRule::RejectCellphone: return "reject_cellphone";
    case CascadeRule::RejectHeadOnDesk: return "reject_head_on_desk";
    case CascadeRule::RejectYawning: return "reject_yawning";
    case CascadeRule::RejectTalking: return "reject_talking";
    case CascadeRule::RejectLeaningLeft: return "reject_leaning_left";
    case CascadeRule::RejectLeaningRight: return "reject_leaning_right";
    case CascadeRule::RejectFarLeft: return "reject_far_left";
    case CascadeRule::RejectFarRight: return "reject_far_right";
    case CascadeRule::RejectUp: return "reject_up";
    case CascadeRule::RejectBelowDesk: return "reject_below_desk";
    case CascadeRule::DefaultInterested: return "default_interested";
  }
  return "unknown";
}

std::string_view to_string(Posture p) {
  switch (p) {
    case Posture::LeaningLeft: return "leaning_left";
    case Posture::LeaningRight: return "leaning_right";
    case Posture::LeaningBack: return "leaning_back";
    case Posture::LeaningForward: return "leaning_forward";
    case Posture::Upright: return "upright";
  }
  return "unknown";
}

std::string_view to_string(HeadPose h) {
  switch (h) {
    case HeadPose::FarLeft: return "far_left";
    case HeadPose::FarRight: return "far_right";
    case HeadPose::ModerateLeft: return "moderate_left";
    case HeadPose::ModerateRight: return "moderate_right";
    case HeadPose::BelowDesk: return "below_desk";
    case HeadPose::OnDesk: return "on_desk";
    case HeadPose::Up: return "up";
    case HeadPose::Forward: return "forward";
  }
  return "unknown";
}

std::string_view to_string(EngagementLabel l) {
  return l == EngagementLabel::Interested ? "interested" : "not_interested";
}

Posture posture_from_string(std::string_view s) {
  if (s == "leaning_left") return Posture::LeaningLeft;
  if (s == "leaning_right") return Posture::LeaningRight;
  if (s == "leaning_back") return Posture::LeaningBack;
  if (s == "leaning_forward") return Posture::LeaningForward;
  if (s == "upright") return Posture::Upright;
  throw DataError("unknown posture: " + std::string(s));
}

HeadPose head_pose_from_string(std::string_view s) {
  if (s == "far_left") return HeadPose::FarLeft;
  if (s == "far_right") return HeadPose::FarRight;
  if (s == "moderate_left") return HeadPose::ModerateLeft;
  if (s == "moderate_right") return HeadPose::ModerateRight;
  if (s == "below_desk") return HeadPose::BelowDesk;
  if (s == "on_desk") return HeadPose::OnDesk;
  if (s == "up") return HeadPose::Up;
  if (s == "forward") return HeadPose::Forward;
  throw DataError("unknown head pose: " + std::string(s));
}

EngagementLabel label_from_string(std::string_view s) {
  if (s == "interested") return EngagementLabel::Interested;
  if (s == "not_interested") return EngagementLabel::NotInterested;
  throw DataError("unknown engagement label: " + std::string(s));
}

}  // namespace wits
