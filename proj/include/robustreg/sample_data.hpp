#pragma once

#include "robustreg/types.hpp"

#include <string>
#include <vector>

namespace robustreg {

// Per-country cigarette consumption (1930) and male lung-cancer deaths per
// million (1950). The USA row combines high consumption with a low death
// rate and acts as the classic bad leverage point.
inline Dataset cigarette_dataset() {
  const std::vector<std::string> labels = {
      "Australia", "Canada", "Denmark",     "Finland", "Great Britain",
      "Iceland",   "Netherlands", "Norway", "Sweden",  "Switzerland",
      "USA"};
  Matrix x(11, 1);
  x << 480, 500, 380, 1100, 1100, 230, 490, 250, 300, 510, 1300;
  Vector y(11);
  y << 180, 150, 170, 350, 460, 60, 240, 90, 110, 250, 200;
  return Dataset(x, y, true, labels);
}

}  // namespace robustreg
