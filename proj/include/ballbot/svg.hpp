#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "ballbot/sweep.hpp"

namespace ballbot::exp {

namespace detail {

// Fixed two-decimal formatting keeps the byte output deterministic.
inline std::string svg_num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

}  // namespace detail

// Polar scatter of a recovery sweep: recovered points in yellow, failures in
// purple, dashed rays along the three wheel directions, rings every 3 degrees
// of beta. alpha = 0 points east, angles grow counterclockwise.
inline std::string emit_svg_polar(const std::vector<RecoveryRecord>& records,
                                  const std::array<double, 3>& wheel_alphas,
                                  const std::string& title = "") {
    constexpr double size = 640.0;
    constexpr double cx = size / 2.0;
    constexpr double cy = size / 2.0;
    constexpr double plot_radius = 280.0;

    double beta_max_deg = 0.0;
    for (const auto& r : records) beta_max_deg = std::max(beta_max_deg, r.beta_deg);
    // round the outer ring up to the next multiple of 3 degrees, minimum 3;
    // the epsilon keeps values like 3.0000000000000004 on the 3-degree ring
    const double ring_max = std::max(3.0, std::ceil(beta_max_deg / 3.0 - 1e-9) * 3.0);
    const double scale = plot_radius / ring_max;

    auto px = [&](double alpha, double beta_deg) {
        return std::pair<double, double>{cx + scale * beta_deg * std::cos(alpha),
                                         cy - scale * beta_deg * std::sin(alpha)};
    };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
         "viewBox=\"0 0 640 640\">\n";
    s += "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    if (!title.empty())
        s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"16\">" + title + "</text>\n";

    // beta rings with degree labels
    for (double b = 3.0; b <= ring_max + 1e-9; b += 3.0) {
        s += "<circle cx=\"" + detail::svg_num(cx) + "\" cy=\"" + detail::svg_num(cy) + "\" r=\"" +
             detail::svg_num(scale * b) + "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + detail::svg_num(cx + 4.0) + "\" y=\"" +
             detail::svg_num(cy - scale * b - 4.0) +
             "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#888888\">" +
             std::to_string(static_cast<int>(std::lround(b))) + "&#176;</text>\n";
    }

    // wheel-direction rays
    for (const double wa : wheel_alphas) {
        const auto [x, y] = px(wa, ring_max);
        s += "<line x1=\"" + detail::svg_num(cx) + "\" y1=\"" + detail::svg_num(cy) + "\" x2=\"" +
             detail::svg_num(x) + "\" y2=\"" + detail::svg_num(y) +
             "\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
    }

    for (const auto& r : records) {
        const auto [x, y] = px(r.alpha_deg / kRadToDeg, r.beta_deg);
        const char* color = r.recovered ? "#f2c200" : "#5e3c99";
        s += "<circle cx=\"" + detail::svg_num(x) + "\" cy=\"" + detail::svg_num(y) +
             "\" r=\"4\" fill=\"" + std::string(color) + "\"/>\n";
    }

    s += "</svg>\n";
    return s;
}

}  // namespace ballbot::exp
