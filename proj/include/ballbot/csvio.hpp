#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "ballbot/ddpg.hpp"
#include "ballbot/episode.hpp"
#include "ballbot/errors.hpp"

namespace ballbot::exp {

inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Shortest round-trip decimal form, locale-independent.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("not a number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline constexpr const char* kEpisodeCsvHeader =
    "t,phi_x,phi_y,dphi_x,dphi_y,beta_deg,w1,w2,w3,u_fb_x,u_fb_y,u_rl_x,u_rl_y";

inline std::string episode_to_csv(const sim::EpisodeLog& log) {
    std::string out(kEpisodeCsvHeader);
    out.push_back('\n');
    for (const auto& row : log.rows) {
        out += format_double(row.t);
        out.push_back(',');
        out += format_double(row.phi_x);
        out.push_back(',');
        out += format_double(row.phi_y);
        out.push_back(',');
        out += format_double(row.dphi_x);
        out.push_back(',');
        out += format_double(row.dphi_y);
        out.push_back(',');
        out += format_double(row.beta * kRadToDeg);
        out.push_back(',');
        out += format_double(row.wheel_speeds[0]);
        out.push_back(',');
        out += format_double(row.wheel_speeds[1]);
        out.push_back(',');
        out += format_double(row.wheel_speeds[2]);
        out.push_back(',');
        out += format_double(row.cmd.u_fb_x);
        out.push_back(',');
        out += format_double(row.cmd.u_fb_y);
        out.push_back(',');
        out += format_double(row.cmd.u_rl_x);
        out.push_back(',');
        out += format_double(row.cmd.u_rl_y);
        out.push_back('\n');
    }
    return out;
}

inline constexpr const char* kCurveCsvHeader = "episode,return,steps,critic_loss,actor_objective";

inline std::string curve_to_csv(const std::vector<ddpg::EpisodeStats>& curve) {
    std::string out(kCurveCsvHeader);
    out.push_back('\n');
    for (const auto& e : curve) {
        out += std::to_string(e.episode);
        out.push_back(',');
        out += format_double(e.ret);
        out.push_back(',');
        out += std::to_string(e.steps);
        out.push_back(',');
        out += format_double(e.mean_critic_loss);
        out.push_back(',');
        out += format_double(e.mean_actor_objective);
        out.push_back('\n');
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace ballbot::exp
