#include "motil/link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "motil/errors.hpp"

namespace motil {

namespace {

struct ActiveTrack {
    int id = 0;
    double x = 0.0, y = 0.0;
    int last_frame = 0;
    std::vector<TrackPoint> points;
};

struct Pair {
    int old_idx;   // into eligible
    int spot_idx;  // into frame spots
    double dist_sq;
};

// Exact minimum-cost assignment over one subnet by depth-first enumeration.
// Cost: squared displacement per matched pair, squared search radius per
// unmatched old particle. Assumes subnet_old.size() <= exact cap.
class SubnetSolver {
public:
    SubnetSolver(const std::vector<int>& subnet_old,
                 const std::vector<std::vector<Pair>>& pairs_by_old,
                 const std::vector<double>& radius_sq)
        : old_(subnet_old), pairs_by_old_(pairs_by_old), radius_sq_(radius_sq) {
        assignment_.assign(old_.size(), -1);
        best_assignment_ = assignment_;
    }

    // Returns spot index per subnet-old position, -1 for unmatched.
    std::vector<int> solve() {
        best_cost_ = std::numeric_limits<double>::infinity();
        dfs(0, 0.0);
        return best_assignment_;
    }

private:
    void dfs(std::size_t pos, double cost) {
        if (cost >= best_cost_) return;
        if (pos == old_.size()) {
            best_cost_ = cost;
            best_assignment_ = assignment_;
            return;
        }
        const int o = old_[pos];
        for (const Pair& p : pairs_by_old_[static_cast<std::size_t>(o)]) {
            if (taken_.count(p.spot_idx)) continue;
            taken_.insert(p.spot_idx);
            assignment_[pos] = p.spot_idx;
            dfs(pos + 1, cost + p.dist_sq);
            taken_.erase(p.spot_idx);
        }
        assignment_[pos] = -1;
        dfs(pos + 1, cost + radius_sq_[static_cast<std::size_t>(o)]);
    }

    const std::vector<int>& old_;
    const std::vector<std::vector<Pair>>& pairs_by_old_;
    const std::vector<double>& radius_sq_;
    std::vector<int> assignment_;
    std::vector<int> best_assignment_;
    double best_cost_ = 0.0;
    std::set<int> taken_;
};

} // namespace

std::vector<Trajectory> link_spots(const std::vector<Spot>& spots,
                                   const LinkParams& params) {
    if (params.search_range <= 0.0) throw ParamError("search_range must be positive");
    if (params.memory < 0) throw ParamError("memory must be >= 0");

    // Group by frame, preserving input order within a frame.
    std::map<int, std::vector<Spot>> by_frame;
    for (const auto& s : spots) by_frame[s.frame].push_back(s);

    std::vector<ActiveTrack> active;
    std::vector<Trajectory> finished;
    int next_id = 0;

    auto retire = [&](ActiveTrack& t) {
        Trajectory traj;
        traj.particle_id = t.id;
        traj.points = std::move(t.points);
        traj.source = TrackSource::crocker_grier;
        finished.push_back(std::move(traj));
    };

    for (auto& [frame, frame_spots] : by_frame) {
        // Partition actives into eligible candidates and expired tracks.
        std::vector<ActiveTrack> eligible;
        for (auto& t : active) {
            if (frame - t.last_frame <= params.memory + 1) {
                eligible.push_back(std::move(t));
            } else {
                retire(t);
            }
        }
        active.clear();

        const int n_old = static_cast<int>(eligible.size());
        const int n_new = static_cast<int>(frame_spots.size());

        // Feasible pairs within each candidate's own search radius.
        std::vector<double> radius_sq(static_cast<std::size_t>(n_old));
        std::vector<std::vector<Pair>> pairs_by_old(static_cast<std::size_t>(n_old));
        for (int i = 0; i < n_old; ++i) {
            const double r =
                params.search_range * (frame - eligible[static_cast<std::size_t>(i)].last_frame);
            radius_sq[static_cast<std::size_t>(i)] = r * r;
            for (int j = 0; j < n_new; ++j) {
                const double dx = frame_spots[static_cast<std::size_t>(j)].x -
                                  eligible[static_cast<std::size_t>(i)].x;
                const double dy = frame_spots[static_cast<std::size_t>(j)].y -
                                  eligible[static_cast<std::size_t>(i)].y;
                const double d2 = dx * dx + dy * dy;
                if (d2 <= radius_sq[static_cast<std::size_t>(i)])
                    pairs_by_old[static_cast<std::size_t>(i)].push_back({i, j, d2});
            }
        }

        // Connected subnets over the bipartite feasibility graph.
        std::vector<std::vector<int>> olds_by_spot(static_cast<std::size_t>(n_new));
        for (int i = 0; i < n_old; ++i) {
            for (const Pair& p : pairs_by_old[static_cast<std::size_t>(i)]) {
                olds_by_spot[static_cast<std::size_t>(p.spot_idx)].push_back(i);
            }
        }
        std::vector<int> old_comp(static_cast<std::size_t>(n_old), -1);
        std::vector<int> new_comp(static_cast<std::size_t>(n_new), -1);
        int n_comp = 0;
        for (int i = 0; i < n_old; ++i) {
            if (old_comp[static_cast<std::size_t>(i)] != -1 ||
                pairs_by_old[static_cast<std::size_t>(i)].empty())
                continue;
            const int comp = n_comp++;
            std::vector<int> stack_old{i};
            while (!stack_old.empty()) {
                const int o = stack_old.back();
                stack_old.pop_back();
                if (old_comp[static_cast<std::size_t>(o)] != -1) continue;
                old_comp[static_cast<std::size_t>(o)] = comp;
                for (const Pair& p : pairs_by_old[static_cast<std::size_t>(o)]) {
                    if (new_comp[static_cast<std::size_t>(p.spot_idx)] != -1) continue;
                    new_comp[static_cast<std::size_t>(p.spot_idx)] = comp;
                    for (int o2 : olds_by_spot[static_cast<std::size_t>(p.spot_idx)]) {
                        if (old_comp[static_cast<std::size_t>(o2)] == -1)
                            stack_old.push_back(o2);
                    }
                }
            }
        }

        std::vector<int> spot_for_old(static_cast<std::size_t>(n_old), -1);
        for (int comp = 0; comp < n_comp; ++comp) {
            std::vector<int> subnet_old;
            for (int i = 0; i < n_old; ++i) {
                if (old_comp[static_cast<std::size_t>(i)] == comp) subnet_old.push_back(i);
            }
            if (static_cast<int>(subnet_old.size()) > params.subnet_hard_cap)
                throw LinkError("subnet of " + std::to_string(subnet_old.size()) +
                                " particles at frame " + std::to_string(frame) +
                                " exceeds the hard cap of " +
                                std::to_string(params.subnet_hard_cap));

            if (static_cast<int>(subnet_old.size()) <= params.subnet_exact_cap) {
                SubnetSolver solver(subnet_old, pairs_by_old, radius_sq);
                const std::vector<int> assignment = solver.solve();
                for (std::size_t k = 0; k < subnet_old.size(); ++k) {
                    spot_for_old[static_cast<std::size_t>(subnet_old[k])] = assignment[k];
                }
            } else {
                // Greedy nearest-neighbour fallback for oversize subnets.
                std::vector<Pair> all_pairs;
                for (int o : subnet_old) {
                    const auto& ps = pairs_by_old[static_cast<std::size_t>(o)];
                    all_pairs.insert(all_pairs.end(), ps.begin(), ps.end());
                }
                std::sort(all_pairs.begin(), all_pairs.end(),
                          [](const Pair& a, const Pair& b) {
                              if (a.dist_sq != b.dist_sq) return a.dist_sq < b.dist_sq;
                              if (a.old_idx != b.old_idx) return a.old_idx < b.old_idx;
                              return a.spot_idx < b.spot_idx;
                          });
                std::vector<bool> spot_taken(static_cast<std::size_t>(n_new), false);
                for (const Pair& p : all_pairs) {
                    if (spot_for_old[static_cast<std::size_t>(p.old_idx)] != -1 ||
                        spot_taken[static_cast<std::size_t>(p.spot_idx)])
                        continue;
                    spot_for_old[static_cast<std::size_t>(p.old_idx)] = p.spot_idx;
                    spot_taken[static_cast<std::size_t>(p.spot_idx)] = true;
                }
            }
        }

        // Apply the assignment.
        std::vector<bool> spot_used(static_cast<std::size_t>(n_new), false);
        for (int i = 0; i < n_old; ++i) {
            auto& t = eligible[static_cast<std::size_t>(i)];
            const int j = spot_for_old[static_cast<std::size_t>(i)];
            if (j >= 0) {
                const Spot& s = frame_spots[static_cast<std::size_t>(j)];
                t.points.push_back({frame, s.x, s.y});
                t.x = s.x;
                t.y = s.y;
                t.last_frame = frame;
                spot_used[static_cast<std::size_t>(j)] = true;
            }
            active.push_back(std::move(t));
        }
        for (int j = 0; j < n_new; ++j) {
            if (spot_used[static_cast<std::size_t>(j)]) continue;
            const Spot& s = frame_spots[static_cast<std::size_t>(j)];
            ActiveTrack t;
            t.id = next_id++;
            t.x = s.x;
            t.y = s.y;
            t.last_frame = frame;
            t.points.push_back({frame, s.x, s.y});
            active.push_back(std::move(t));
        }
    }

    for (auto& t : active) retire(t);
    std::sort(finished.begin(), finished.end(),
              [](const Trajectory& a, const Trajectory& b) {
                  return a.particle_id < b.particle_id;
              });
    return finished;
}

std::vector<Trajectory> filter_tracks(std::vector<Trajectory> tracks, int min_length) {
    std::erase_if(tracks, [min_length](const Trajectory& t) {
        return static_cast<int>(t.points.size()) < min_length;
    });
    return tracks;
}

std::pair<std::vector<Trajectory>, DriftSeries> subtract_drift(
    std::vector<Trajectory> tracks) {
    if (tracks.empty()) throw EmptySample("subtract_drift: no tracks");

    int min_frame = tracks.front().points.front().frame;
    int max_frame = min_frame;
    for (const auto& t : tracks) {
        min_frame = std::min(min_frame, t.first_frame());
        max_frame = std::max(max_frame, t.last_frame());
    }
    const std::size_t span = static_cast<std::size_t>(max_frame - min_frame) + 1;

    // Mean displacement of co-present particles between consecutive frames.
    std::vector<std::array<double, 2>> sums(span, {0.0, 0.0});
    std::vector<int> counts(span, 0);
    for (const auto& t : tracks) {
        for (std::size_t k = 1; k < t.points.size(); ++k) {
            const auto& prev = t.points[k - 1];
            const auto& cur = t.points[k];
            if (cur.frame != prev.frame + 1) continue;
            const std::size_t idx = static_cast<std::size_t>(cur.frame - min_frame);
            sums[idx][0] += cur.x - prev.x;
            sums[idx][1] += cur.y - prev.y;
            counts[idx] += 1;
        }
    }

    DriftSeries drift;
    drift.first_frame = min_frame;
    drift.offsets.assign(span, {0.0, 0.0});
    for (std::size_t k = 1; k < span; ++k) {
        double ix = 0.0, iy = 0.0;
        if (counts[k] > 0) {
            ix = sums[k][0] / counts[k];
            iy = sums[k][1] / counts[k];
        }
        drift.offsets[k] = {drift.offsets[k - 1][0] + ix, drift.offsets[k - 1][1] + iy};
    }

    for (auto& t : tracks) {
        for (auto& p : t.points) {
            const auto& d = drift.at_frame(p.frame);
            p.x -= d[0];
            p.y -= d[1];
        }
    }
    return {std::move(tracks), std::move(drift)};
}

} // namespace motil
