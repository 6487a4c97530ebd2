#pragma once

#include <chrono>
#include <ctime>
#include <json.hpp>
#include <string>
#include <vector>

#include "ballbot/csvio.hpp"
#include "ballbot/rng.hpp"
#include "ballbot/version.hpp"

namespace ballbot::exp {

// Reproducibility record written next to every run's outputs: the exact
// config snapshot, seed, and a checksum for each emitted file.
class RunManifest {
  public:
    RunManifest(std::string command, std::uint64_t seed, std::string config_snapshot)
        : command_(std::move(command)), seed_(seed), config_(std::move(config_snapshot)),
          started_(now_iso8601()) {}

    // Registers an already-written output file; the checksum is FNV-1a 64 of
    // the file bytes.
    void add_output(const std::string& path) {
        const std::string bytes = read_text_file(path);
        char hex[17];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a(bytes.data(), bytes.size())));
        outputs_.push_back({path, std::string(hex), bytes.size()});
    }

    void write(const std::string& path) const {
        nlohmann::json j;
        j["tool"] = "ballbot";
        j["version"] = kVersion;
        j["command"] = command_;
        j["seed"] = seed_;
        j["config"] = config_;
        j["started"] = started_;
        j["finished"] = now_iso8601();
        auto arr = nlohmann::json::array();
        for (const auto& o : outputs_)
            arr.push_back({{"path", o.path}, {"fnv1a64", o.checksum}, {"bytes", o.bytes}});
        j["outputs"] = arr;
        write_text_file(path, j.dump(2) + "\n");
    }

  private:
    struct Output {
        std::string path;
        std::string checksum;
        std::size_t bytes;
    };

    static std::string now_iso8601() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::string command_;
    std::uint64_t seed_;
    std::string config_;
    std::string started_;
    std::vector<Output> outputs_;
};

}  // namespace ballbot::exp
