#include "spinbath/berry.hpp"

#include <cmath>
#include <numbers>

namespace spinbath {

double wrap_phase(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(x, two_pi);
    if (y <= -std::numbers::pi) y += two_pi;
    if (y > std::numbers::pi) y -= two_pi;
    return y;
}

ConeLoopResult run_cone_loop(double theta, std::size_t n_steps, std::size_t profile_points) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) throw Error("cone angle must lie strictly between 0 and pi");
    if (n_steps < 1) throw Error("cone loop needs at least one step");

    Model model{qubit_isotropic(0.0, 1.0, 1), BathSpec::zeeman(Vec3(0.0, 0.0, 1.0), 1)};
    const SpinConfiguration start({Vec3(std::sin(theta), 0.0, std::cos(theta))});
    const double period = 2.0 * std::numbers::pi / model.bath.field.norm();
    const double dt = period / static_cast<double>(n_steps);

    ConeLoopResult r;
    r.theta = theta;
    r.n_steps = n_steps;
    ElementPropagator prop(model);
    // Element (upper, lower); its average surface is H_SB alone since E_+ + E_- = 0.
    TrajectoryState s = prop.start(start, 1, 0, 1.0);
    const std::size_t stride = std::max<std::size_t>(1, n_steps / std::max<std::size_t>(1, profile_points));
    for (std::size_t k = 0; k <= n_steps; ++k) {
        if (k % stride == 0 || k == n_steps) {
            r.times.push_back(s.time);
            r.profile.push_back(-s.geo_exponent.imag());
        }
        r.modulus_error = std::max(r.modulus_error, std::abs(std::abs(s.value()) - 1.0));
        if (k < n_steps) prop.step(s, dt);
    }
    r.phase = wrap_phase(std::arg(s.geometric_factor()));
    r.analytic = wrap_phase(2.0 * std::numbers::pi * (1.0 - std::cos(theta)));
    r.error = std::abs(wrap_phase(r.phase - r.analytic));
    r.dynamical_phase = s.dyn_phase;
    return r;
}

}  // namespace spinbath
