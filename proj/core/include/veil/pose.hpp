// Copyright 2026 The Veil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace veil {

/// Camera pose: position in meters, heading in radians, and a circular
/// sector field of view.
struct Pose {
  double x = 0;
  double y = 0;
  double heading = 0;
  double fov_angle = std::numbers::pi / 3;
  double range = 15.0;
};

/// Sector test, boundary inclusive; a point at the viewer position counts
/// as visible regardless of heading.
inline bool in_fov(const Pose& viewer, double px, double py) {
  if (!(viewer.fov_angle > 0 && viewer.fov_angle < 2 * std::numbers::pi))
    throw std::invalid_argument("field of view outside (0, 2*pi)");
  if (!(viewer.range > 0)) throw std::invalid_argument("range must be positive");
  double dx = px - viewer.x, dy = py - viewer.y;
  double dist = std::hypot(dx, dy);
  if (dist > viewer.range) return false;
  if (dist == 0) return true;
  double off = std::remainder(std::atan2(dy, dx) - viewer.heading, 2 * std::numbers::pi);
  return std::abs(off) <= viewer.fov_angle / 2;
}

}  // namespace veil
