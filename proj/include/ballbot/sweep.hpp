#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ballbot/csvio.hpp"
#include "ballbot/episode.hpp"
#include "ballbot/pool.hpp"
#include "ballbot/rng.hpp"

namespace ballbot::exp {

// Grid of static initial tilts, radians internally, degrees at the CLI and
// file boundary.
struct SweepGrid {
    std::vector<double> alphas;  // rad, in [0, 2pi)
    std::vector<double> betas;   // rad, strictly increasing

    void validate() const {
        if (alphas.empty() || betas.empty()) throw ConfigError("sweep grid must be non-empty");
        for (double a : alphas)
            if (a < 0.0 || a >= 2.0 * std::numbers::pi)
                throw ConfigError("sweep alpha out of [0, 360) degrees");
        for (std::size_t i = 1; i < betas.size(); ++i)
            if (!(betas[i] > betas[i - 1])) throw ConfigError("sweep betas must be strictly increasing");
    }

    // Default grid: alpha 0..350 deg step 10, beta 1..15 deg step 0.5.
    static SweepGrid from_config(const KeyedConfig& cfg) {
        constexpr double deg = std::numbers::pi / 180.0;
        SweepGrid g;
        const double a0 = cfg.get_double("sweep_alpha_start_deg", 0.0);
        const double astep = cfg.get_double("sweep_alpha_step_deg", 10.0);
        const long acount = cfg.get_int("sweep_alpha_count", 36);
        const double b0 = cfg.get_double("sweep_beta_start_deg", 1.0);
        const double bstep = cfg.get_double("sweep_beta_step_deg", 0.5);
        const long bcount = cfg.get_int("sweep_beta_count", 29);
        for (long i = 0; i < acount; ++i) g.alphas.push_back((a0 + astep * i) * deg);
        for (long i = 0; i < bcount; ++i) g.betas.push_back((b0 + bstep * i) * deg);
        g.validate();
        return g;
    }
};

// Degrees throughout: this type lives at the file/CLI boundary, and the
// degree values round-trip the CSV encoding exactly.
struct RecoveryRecord {
    double alpha_deg = 0.0;
    double beta_deg = 0.0;
    bool recovered = false;
    double time = 0.0;  // settle time when recovered, fall time or horizon otherwise (s)
    double max_beta_deg = 0.0;
    bool aborted = false;

    friend bool operator==(const RecoveryRecord&, const RecoveryRecord&) = default;
};

struct SweepSummary {
    int recovered_count = 0;
    // per alpha (deg): largest beta (deg) in the grid that recovered, 0 when none did
    std::vector<std::pair<double, double>> max_recoverable;
};

// Fresh controller per episode; compound controllers carry per-episode state.
using ControllerFactory = std::function<sim::Controller()>;

// One episode per grid point, zero initial rates. Points run in parallel;
// each gets a seed derived from the master seed and its coordinates, and
// results land in grid order, so scheduling never shows in the output.
// Episode failures become aborted records instead of ending the sweep.
inline std::vector<RecoveryRecord> sweep_recovery(const SweepGrid& grid, const sim::SimCfg& cfg,
                                                  const ControllerFactory& make_controller,
                                                  std::uint64_t seed, WorkerPool* pool = nullptr) {
    grid.validate();
    const std::size_t n_beta = grid.betas.size();
    std::vector<RecoveryRecord> records(grid.alphas.size() * n_beta);

    auto run_point = [&](int idx) {
        const double alpha = grid.alphas[static_cast<std::size_t>(idx) / n_beta];
        const double beta = grid.betas[static_cast<std::size_t>(idx) % n_beta];
        RecoveryRecord rec;
        rec.alpha_deg = alpha * kRadToDeg;
        rec.beta_deg = beta * kRadToDeg;
        try {
            const sim::EpisodeLog log = sim::run_episode(cfg, make_controller(),
                                                         sim::make_attitude(alpha, beta),
                                                         derive_seed(seed, alpha, beta));
            rec.recovered = log.recovered;
            rec.time = log.end_time;
            rec.max_beta_deg = log.max_beta * kRadToDeg;
            rec.aborted = log.aborted;
        } catch (const std::exception&) {
            rec.aborted = true;
        }
        records[static_cast<std::size_t>(idx)] = rec;
    };

    const int total = static_cast<int>(records.size());
    if (pool) {
        pool->run(total, run_point);
    } else {
        for (int i = 0; i < total; ++i) run_point(i);
    }
    return records;
}

inline SweepSummary summarize(const SweepGrid& grid, const std::vector<RecoveryRecord>& records) {
    SweepSummary s;
    std::map<double, double> best;
    for (double a : grid.alphas) best[a * kRadToDeg] = 0.0;
    for (const auto& r : records) {
        if (!r.recovered) continue;
        ++s.recovered_count;
        best[r.alpha_deg] = std::max(best[r.alpha_deg], r.beta_deg);
    }
    s.max_recoverable.assign(best.begin(), best.end());
    return s;
}

inline constexpr const char* kRecordCsvHeader = "alpha_deg,beta_deg,recovered,time_s,max_beta_deg";

inline std::string records_to_csv(const std::vector<RecoveryRecord>& records) {
    std::string out(kRecordCsvHeader);
    out.push_back('\n');
    for (const auto& r : records) {
        out += format_double(r.alpha_deg);
        out.push_back(',');
        out += format_double(r.beta_deg);
        out.push_back(',');
        out += r.recovered ? "1" : "0";
        out.push_back(',');
        out += format_double(r.time);
        out.push_back(',');
        out += format_double(r.max_beta_deg);
        out.push_back('\n');
    }
    return out;
}

inline std::vector<RecoveryRecord> records_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kRecordCsvHeader)
        throw ConfigError("unexpected recovery-record CSV header");
    std::vector<RecoveryRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw ConfigError("malformed recovery-record CSV row: " + line);
        RecoveryRecord r;
        r.alpha_deg = parse_double(fields[0]);
        r.beta_deg = parse_double(fields[1]);
        r.recovered = fields[2] == "1";
        r.time = parse_double(fields[3]);
        r.max_beta_deg = parse_double(fields[4]);
        records.push_back(r);
    }
    return records;
}

// Piecewise-linear, periodic-in-alpha interpolation of the per-direction
// recovery limit measured from a sweep. Used to pick training initial states
// around the feedback controller's boundary.
class RecoveryBoundary {
  public:
    RecoveryBoundary(std::vector<double> alphas, std::vector<double> limits)
        : alphas_(std::move(alphas)), limits_(std::move(limits)) {
        if (alphas_.size() != limits_.size() || alphas_.empty())
            throw ConfigError("boundary needs matching non-empty alpha/limit lists");
    }

    static RecoveryBoundary from_summary(const SweepSummary& s) {
        std::vector<double> alphas;
        std::vector<double> limits;
        for (const auto& [a_deg, b_deg] : s.max_recoverable) {
            alphas.push_back(a_deg / kRadToDeg);
            limits.push_back(b_deg / kRadToDeg);
        }
        return RecoveryBoundary(std::move(alphas), std::move(limits));
    }

    double limit(double alpha) const {
        const double two_pi = 2.0 * std::numbers::pi;
        double a = std::fmod(alpha, two_pi);
        if (a < 0.0) a += two_pi;
        const std::size_t n = alphas_.size();
        if (n == 1) return limits_[0];
        // find the segment [alphas_[i], alphas_[i+1]) containing a, wrapping
        std::size_t hi = std::lower_bound(alphas_.begin(), alphas_.end(), a) - alphas_.begin();
        const std::size_t lo = (hi == 0 || hi == n) ? n - 1 : hi - 1;
        hi = (hi == n) ? 0 : hi;
        double a_lo = alphas_[lo];
        double a_hi = alphas_[hi];
        double x = a;
        if (a_hi <= a_lo) {  // wrapped segment
            a_hi += two_pi;
            if (x < a_lo) x += two_pi;
        }
        const double t = (x - a_lo) / (a_hi - a_lo);
        return limits_[lo] + t * (limits_[hi] - limits_[lo]);
    }

  private:
    std::vector<double> alphas_;
    std::vector<double> limits_;
};

}  // namespace ballbot::exp
