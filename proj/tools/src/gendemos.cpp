// Writes synthetic driving demonstrations: a straight run along +x with a
// trapezoidal speed profile, per-demo lateral sway, speed scaling and
// measurement noise drawn from a seeded generator.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>

#include "stlplan/lfd/io.hpp"

namespace {

struct Route {
  double x0 = 2.0;
  double x1 = 30.0;
  double y = 2.5;
  double duration = 20.0;
  double dt = 0.1;
  double ramp = 2.0;     // seconds spent accelerating and braking
  double sway = 0.15;    // lateral amplitude [m]
  double spread = 0.03;  // relative spread of the travelled distance
  double noise = 0.02;   // position noise [m]
  double heading_noise = 0.02;  // [rad]
};

stlplan::lfd::Demonstration make_demo(const Route& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double length = (r.x1 - r.x0) * (1.0 + r.spread * unit(rng));
  const double amp = r.sway * unit(rng);
  const double phase = std::numbers::pi * unit(rng);
  // v(t) = V min(1, t / ramp, (T - t) / ramp) travels V (T - ramp).
  const double V = length / (r.duration - r.ramp);
  const auto steps = static_cast<std::size_t>(std::lround(r.duration / r.dt));

  stlplan::lfd::Demonstration demo;
  demo.dt = r.dt;
  double x = r.x0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * r.dt;
    // Sway is a function of progress along the route, so the heading stays defined at rest.
    const double w = 2.0 * std::numbers::pi / length;
    const double y = r.y + amp * (std::sin(w * (x - r.x0) + phase) - std::sin(phase));
    const double alpha = std::atan(amp * w * std::cos(w * (x - r.x0) + phase));
    demo.states.push_back({x + r.noise * gauss(rng), y + r.noise * gauss(rng), alpha + r.heading_noise * gauss(rng)});
    const auto speed = [&](double s) { return V * std::max(0.0, std::min({1.0, s / r.ramp, (r.duration - s) / r.ramp})); };
    x += 0.5 * r.dt * (speed(t) + speed(t + r.dt));
  }
  return demo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic demonstrations"};
  Route route;
  int count = 4;
  std::uint64_t seed = 1;
  std::string out = "demos";
  app.add_option("--x0", route.x0, "Start x [m]");
  app.add_option("--x1", route.x1, "Nominal end x [m]");
  app.add_option("--y", route.y, "Lane centre y [m]");
  app.add_option("--duration", route.duration, "Demo length [s]");
  app.add_option("--dt", route.dt, "Sample period [s]");
  app.add_option("--ramp", route.ramp, "Acceleration and braking time [s]");
  app.add_option("--sway", route.sway, "Lateral sway amplitude [m]");
  app.add_option("--spread", route.spread, "Relative spread of travelled distance");
  app.add_option("--noise", route.noise, "Position noise stddev [m]");
  app.add_option("--heading-noise", route.heading_noise, "Heading noise stddev [rad]");
  app.add_option("-n,--count", count, "Number of demonstrations");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("-o,--out", out, "Output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < count; ++i) {
      const auto path = std::filesystem::path(out) / ("demo_" + std::to_string(i + 1) + ".csv");
      stlplan::lfd::write_demonstration_csv(path, make_demo(route, rng));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
