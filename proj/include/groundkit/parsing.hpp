#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "groundkit/types.hpp"

namespace groundkit::eval {

// Coordinate space of model-emitted coordinates. Always declared
// explicitly by the caller, never sniffed from the data.
enum class CoordSpace { Pixel, Unit, Milli };

std::optional<CoordSpace> coord_space_from_string(const std::string& s);
const char* to_string(CoordSpace cs);

Point scale_to_pixels(const Point& p, CoordSpace cs, double image_w, double image_h);

// Extracts a coordinate pair "(x, y)" or "[x, y]" from rollout text and
// scales it into pixel space. Models often narrate intermediate points;
// by convention the last pair is the answer (set last_pair=false for the
// first-pair convention). Returns nullopt when no pair is found; the
// caller decides the penalty.
std::optional<Point> parse_prediction(std::string_view raw, CoordSpace cs,
                                      double image_w, double image_h,
                                      bool last_pair = true);

} // namespace groundkit::eval
