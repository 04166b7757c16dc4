#ifndef MOTIL_LINK_HPP
#define MOTIL_LINK_HPP

#include <utility>
#include <vector>

#include "motil/locate.hpp"
#include "motil/trajectory.hpp"

namespace motil {

struct LinkParams {
    double search_range = 5.0; // max displacement, pixels per frame
    int memory = 3;            // frames a lost particle may stay relinkable
    int subnet_exact_cap = 8;  // exact assignment up to this many candidates
    int subnet_hard_cap = 200; // beyond this a LinkError is raised
};

// Links per-frame spots into trajectories. Frame-to-frame assignment
// minimises total squared displacement within the search radius; connected
// candidate subnets are solved exactly by enumeration up to
// subnet_exact_cap old particles and greedily above that. Particles missing
// for up to `memory` frames may relink within search_range x (gap + 1).
// Spots must be sorted by frame.
std::vector<Trajectory> link_spots(const std::vector<Spot>& spots,
                                   const LinkParams& params = {});

// Keeps tracks with at least min_length observed points; ids preserved.
std::vector<Trajectory> filter_tracks(std::vector<Trajectory> tracks,
                                      int min_length = 25);

// Removes the ensemble-average cumulative displacement from every track.
// The per-frame drift increment is the mean displacement of particles
// observed in both of two consecutive frames (zero when no particle is).
// Throws EmptySample when tracks is empty.
std::pair<std::vector<Trajectory>, DriftSeries> subtract_drift(
    std::vector<Trajectory> tracks);

} // namespace motil

#endif
