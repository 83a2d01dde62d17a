#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "wlsim/common.hpp"

namespace wlsim {

// Outcome of one decay/bound verification: the fitted exponential, the target
// it is held against, and the hypothesis gates that were evaluated before the
// verdict. `PreconditionUnmet` marks scenarios outside a theorem's hypotheses
// (a gate, not a failure of the theorem).
struct SyncReport {
    enum class Status { Pass, Fail, PreconditionUnmet };

    std::string observable;
    int pair_i = -1, pair_j = -1;  // -1 when not pairwise
    double fitted_rate = 0.0;
    double amplitude = 0.0;
    double residual = 0.0;
    double target_rate = 0.0;
    double window_t0 = 0.0, window_t1 = 0.0;
    Status status = Status::Fail;
    bool below_floor = false;
    std::map<std::string, bool> hypothesis;
    std::string note;
    cx alpha_limit{0.0, 0.0};  // observed correlation limit, when applicable
    bool has_alpha = false;

    bool passed() const { return status == Status::Pass; }
};

inline const char* to_string(SyncReport::Status s) {
    switch (s) {
        case SyncReport::Status::Pass: return "pass";
        case SyncReport::Status::Fail: return "fail";
        case SyncReport::Status::PreconditionUnmet: return "precondition_unmet";
    }
    return "?";
}

inline nlohmann::json to_json(const SyncReport& r) {
    nlohmann::json j;
    j["observable"] = r.observable;
    if (r.pair_i >= 0) j["pair"] = {r.pair_i + 1, r.pair_j + 1};
    j["fitted_rate"] = r.fitted_rate;
    j["target_rate"] = r.target_rate;
    j["amplitude"] = r.amplitude;
    j["residual"] = r.residual;
    j["window"] = {r.window_t0, r.window_t1};
    j["pass"] = to_string(r.status);
    j["below_floor"] = r.below_floor;
    j["hypothesis_flags"] = r.hypothesis;
    if (r.has_alpha) j["alpha_limit"] = {r.alpha_limit.real(), r.alpha_limit.imag()};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

}  // namespace wlsim
