#include "groundkit/parsing.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace groundkit::eval {

std::optional<CoordSpace> coord_space_from_string(const std::string& s) {
    if (s == "pixel") return CoordSpace::Pixel;
    if (s == "unit") return CoordSpace::Unit;
    if (s == "milli") return CoordSpace::Milli;
    return std::nullopt;
}

const char* to_string(CoordSpace cs) {
    switch (cs) {
        case CoordSpace::Pixel: return "pixel";
        case CoordSpace::Unit: return "unit";
        case CoordSpace::Milli: return "milli";
    }
    return "?";
}

Point scale_to_pixels(const Point& p, CoordSpace cs, double image_w, double image_h) {
    switch (cs) {
        case CoordSpace::Unit: return {p.u * image_w, p.v * image_h};
        case CoordSpace::Milli: return {p.u * image_w / 1000.0, p.v * image_h / 1000.0};
        case CoordSpace::Pixel: break;
    }
    return p;
}

namespace {

bool parse_number(std::string_view s, std::size_t& pos, double& out) {
    std::size_t start = pos;
    if (start < s.size() && (s[start] == '-' || s[start] == '+')) ++start;
    std::size_t end = start;
    bool digits = false, dot = false, exp = false;
    while (end < s.size()) {
        char c = s[end];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = true;
            ++end;
        } else if (c == '.' && !dot && !exp) {
            dot = true;
            ++end;
        } else if ((c == 'e' || c == 'E') && digits && !exp) {
            exp = true;
            ++end;
            if (end < s.size() && (s[end] == '-' || s[end] == '+')) ++end;
        } else {
            break;
        }
    }
    if (!digits) return false;
    auto res = std::from_chars(s.data() + pos, s.data() + end, out);
    if (res.ec != std::errc()) return false;
    pos = end;
    return true;
}

void skip_spaces(std::string_view s, std::size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
}

} // namespace

std::optional<Point> parse_prediction(std::string_view raw, CoordSpace cs,
                                      double image_w, double image_h, bool last_pair) {
    std::optional<Point> found;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char open = raw[i];
        if (open != '(' && open != '[') continue;
        char close = open == '(' ? ')' : ']';
        std::size_t pos = i + 1;
        skip_spaces(raw, pos);
        double x, y;
        if (!parse_number(raw, pos, x)) continue;
        skip_spaces(raw, pos);
        if (pos >= raw.size() || raw[pos] != ',') continue;
        ++pos;
        skip_spaces(raw, pos);
        if (!parse_number(raw, pos, y)) continue;
        skip_spaces(raw, pos);
        if (pos >= raw.size() || raw[pos] != close) continue;
        found = scale_to_pixels({x, y}, cs, image_w, image_h);
        if (!last_pair) return found;
        i = pos; // resume after the closing bracket
    }
    return found;
}

} // namespace groundkit::eval
