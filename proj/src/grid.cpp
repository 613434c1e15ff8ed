#include "smdp/environments.hpp"

namespace smdp {

namespace {

const char* kDirName[4] = {"left", "right", "up", "down"};

/// Neighbour of s in direction a, or s itself at a wall.
StateId neighbour(std::size_t d, StateId s, std::size_t a) {
    const std::size_t row = s / d, col = s % d;
    switch (a) {
    case kLeft: return col > 0 ? s - 1 : s;
    case kRight: return col + 1 < d ? s + 1 : s;
    case kUp: return row > 0 ? s - d : s;
    default: return row + 1 < d ? s + d : s;
    }
}

/// Cells between s and the wall in direction a.
std::size_t wall_distance(std::size_t d, StateId s, std::size_t a) {
    const std::size_t row = s / d, col = s % d;
    switch (a) {
    case kLeft: return col;
    case kRight: return d - 1 - col;
    case kUp: return row;
    default: return d - 1 - row;
    }
}

OptionSet grid_options(const GridConfig& c, bool interruptible) {
    check_grid_config(c);
    const std::size_t d = c.d, n = d * d, target = grid_target(d);
    OptionSet set;
    set.num_base_states = n;
    for (StateId s = 0; s < n; ++s) {
        if (s == target) {
            OptionSpec reset;
            reset.initiation = {s};
            reset.termination.assign(n, 1.0);
            reset.termination[target] = 0.0;
            reset.policy.assign(n, kNoAction);
            reset.policy[target] = 0;
            reset.label = "reset";
            set.options.push_back(std::move(reset));
            continue;
        }
        for (std::size_t a = 0; a < 4; ++a) {
            OptionSpec o;
            o.initiation = {s};
            o.termination.assign(n, 0.0);
            o.policy.assign(n, kNoAction);
            o.label = std::to_string(s) + ":" + kDirName[a];
            const std::size_t len = std::min(c.m, wall_distance(d, s, a));
            o.policy[s] = a;
            if (len == 0) {
                // bumping into the wall: one step, back where it started
                o.termination[s] = 1.0;
            } else {
                StateId x = s;
                for (std::size_t k = 1; k <= len; ++k) {
                    x = neighbour(d, x, a);
                    if (interruptible) o.termination[x] = 1.0 / static_cast<double>(len - k + 1);
                    else o.termination[x] = k == len ? 1.0 : 0.0;
                    if (k < len) o.policy[x] = a;
                }
            }
            set.options.push_back(std::move(o));
        }
    }
    return set;
}

} // namespace

StateId grid_target(std::size_t d) { return d * d - 1; }

void check_grid_config(const GridConfig& c) {
    if (c.d < 2) throw ValidationError("grid side must be at least 2");
    if (c.m < 1 || c.m >= c.d) throw ValidationError("option length must satisfy 1 <= m < d");
    if (!(c.r_max > 0.0)) throw ValidationError("grid reward must be positive");
}

MdpModel build_grid_mdp(const GridConfig& c) {
    if (c.d < 2) throw ValidationError("grid side must be at least 2");
    if (!(c.r_max > 0.0)) throw ValidationError("grid reward must be positive");
    const std::size_t d = c.d, n = d * d, target = grid_target(d);
    std::vector<std::vector<ActionEntry>> actions(n);
    for (StateId s = 0; s < n; ++s) {
        if (s == target) {
            ActionEntry e;
            e.label = "reset";
            const double p = 1.0 / static_cast<double>(n - 1);
            for (StateId t = 0; t < n; ++t)
                if (t != target) e.outcomes.push_back({t, p, Dirac{c.r_max}, Dirac{1.0}});
            actions[s].push_back(std::move(e));
            continue;
        }
        for (std::size_t a = 0; a < 4; ++a) {
            ActionEntry e;
            e.label = kDirName[a];
            e.outcomes.push_back({neighbour(d, s, a), 1.0, Dirac{0.0}, Dirac{1.0}});
            actions[s].push_back(std::move(e));
        }
    }
    SmdpModel m(std::move(actions), ModelBounds{c.r_max, 1.0, 1.0});
    m.set_tail(BoundedTail{1.0, 1.0});
    require_valid(m);
    return MdpModel(std::move(m));
}

OptionSet build_grid_options(const GridConfig& c) { return grid_options(c, true); }

OptionSet build_grid_deterministic_options(const GridConfig& c) { return grid_options(c, false); }

} // namespace smdp
