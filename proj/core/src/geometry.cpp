#include "ale2fluid/geometry.hpp"

#include <stdexcept>

namespace ale2fluid {

std::string to_string(MotionDirection d) {
  return d == MotionDirection::Vertical ? "vertical" : "horizontal";
}

MotionDirection parse_motion_direction(const std::string& s) {
  if (s == "vertical") return MotionDirection::Vertical;
  if (s == "horizontal") return MotionDirection::Horizontal;
  throw std::invalid_argument("unknown motion direction: " + s);
}

}  // namespace ale2fluid
