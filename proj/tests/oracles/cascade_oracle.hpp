#pragma once

#include "wits/cascade.hpp"

// Independent brute-force rule evaluator, written directly from the rule
// list before the staged implementation existed. Kept deliberately naive:
// one flat expression per decision, no shared helpers with the library.
namespace wits::test {

inline bool oracle_interested(const ActionFlags& a, Posture p, HeadPose h) {
  bool accepted = false;
  bool rejected = false;

  if (a.writing == true) accepted = true;
  if (a.raised_hand == true) accepted = true;

  if (a.cellphone == true) rejected = true;
  if (a.head_on_desk == true) rejected = true;
  if (a.yawning == true) rejected = true;
  if (a.talking == true) rejected = true;
  if (p == Posture::LeaningLeft) rejected = true;
  if (p == Posture::LeaningRight) rejected = true;
  if (h == HeadPose::FarLeft) rejected = true;
  if (h == HeadPose::FarRight) rejected = true;
  if (h == HeadPose::Up) rejected = true;
  if (h == HeadPose::BelowDesk) rejected = true;

  if (accepted) {
    return true;  // acceptance is checked first
  }
  if (rejected) {
    return false;
  }
  return true;  // never accepted or rejected -> engaged
}

}  // namespace wits::test
