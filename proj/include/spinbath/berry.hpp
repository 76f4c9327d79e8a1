#pragma once

// Kinematic cone-loop experiment: a single classical spin precesses once
// about z under H_SB = -b.S while the coherence between the two levels of
// h(S) = S.sigma is carried along it.

#include "spinbath/propagate.hpp"

#include <cstddef>
#include <vector>

namespace spinbath {

struct ConeLoopResult {
    double theta = 0.0;
    std::size_t n_steps = 0;
    double phase = 0.0;     // arg of the geometric factor after one loop, in (-pi, pi]
    double analytic = 0.0;  // 2 pi (1 - cos theta) wrapped to (-pi, pi]
    double error = 0.0;     // |phase - analytic| on the circle
    double dynamical_phase = 0.0;
    double modulus_error = 0.0;
    std::vector<double> times;
    std::vector<double> profile;  // unwrapped open-path geometric phase
};

// Wraps to (-pi, pi].
double wrap_phase(double x);

ConeLoopResult run_cone_loop(double theta, std::size_t n_steps, std::size_t profile_points = 64);

}  // namespace spinbath
