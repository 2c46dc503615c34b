#include "lldm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lldm/error.hpp"

namespace lldm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_two_pi(double x) {
  x = std::fmod(x, kTwoPi);
  if (x < 0.0) x += kTwoPi;
  if (x >= kTwoPi) x = 0.0;
  return x;
}

int state_of(double v) { return static_cast<int>(v); }

}  // namespace

const char* dynamics_name(DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::Kuramoto: return "kuramoto";
    case DynamicsKind::Fca: return "fca";
    case DynamicsKind::Ghm: return "ghm";
  }
  return "?";
}

DynamicsKind dynamics_from_name(const std::string& name) {
  if (name == "kuramoto") return DynamicsKind::Kuramoto;
  if (name == "fca") return DynamicsKind::Fca;
  if (name == "ghm") return DynamicsKind::Ghm;
  throw Error(ErrorKind::Argument, "unknown dynamics '" + name + "'");
}

DynamicsSpec DynamicsSpec::kuramoto(double coupling, double step_size, double sync_tol) {
  DynamicsSpec s;
  s.kind = DynamicsKind::Kuramoto;
  s.coupling = coupling;
  s.step_size = step_size;
  s.sync_tol = sync_tol;
  s.validate();
  return s;
}

DynamicsSpec DynamicsSpec::fca(int kappa) {
  DynamicsSpec s;
  s.kind = DynamicsKind::Fca;
  s.kappa = kappa;
  s.validate();
  return s;
}

DynamicsSpec DynamicsSpec::ghm(int kappa) {
  DynamicsSpec s;
  s.kind = DynamicsKind::Ghm;
  s.kappa = kappa;
  s.validate();
  return s;
}

void DynamicsSpec::validate() const {
  switch (kind) {
    case DynamicsKind::Kuramoto:
      require(step_size > 0.0, ErrorKind::Argument, "kuramoto: step size must be positive");
      require(sync_tol > 0.0, ErrorKind::Argument, "kuramoto: sync tolerance must be positive");
      break;
    case DynamicsKind::Fca:
      require(kappa >= 3, ErrorKind::Argument, "fca: kappa must be >= 3");
      break;
    case DynamicsKind::Ghm:
      require(kappa >= 2, ErrorKind::Argument, "ghm: kappa must be >= 2");
      break;
  }
}

void validate_config(const PhaseConfig& x, const DynamicsSpec& spec, std::uint32_t node_count) {
  require(x.size() == node_count, ErrorKind::Argument,
          "phase configuration has " + std::to_string(x.size()) + " entries for " +
              std::to_string(node_count) + " nodes");
  if (spec.discrete()) {
    for (double v : x) {
      require(v == std::floor(v) && v >= 0.0 && v < spec.kappa, ErrorKind::Data,
              "state " + std::to_string(v) + " outside 0.." + std::to_string(spec.kappa - 1));
    }
  } else {
    for (double v : x) {
      require(std::isfinite(v) && v >= 0.0 && v < kTwoPi, ErrorKind::Data,
              "kuramoto phase outside [0, 2pi)");
    }
  }
}

PhaseConfig step_kuramoto(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec) {
  validate_config(x, spec, g.node_count());
  const std::uint32_t n = g.node_count();
  PhaseConfig out(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    double drive = 0.0;
    for (std::uint32_t u : g.neighbors(v)) drive += std::sin(x[u] - x[v]);
    out[v] = wrap_two_pi(x[v] + spec.step_size * spec.coupling * drive);
  }
  return out;
}

PhaseConfig step_fca(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec) {
  validate_config(x, spec, g.node_count());
  const std::uint32_t n = g.node_count();
  const int kappa = spec.kappa;
  const int blink = blinking_color(kappa);
  PhaseConfig out(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    const int s = state_of(x[v]);
    bool hold = false;
    if (s > blink) {
      for (std::uint32_t u : g.neighbors(v)) {
        if (state_of(x[u]) == blink) {
          hold = true;
          break;
        }
      }
    }
    out[v] = hold ? s : (s + 1) % kappa;
  }
  return out;
}

PhaseConfig step_ghm(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec) {
  validate_config(x, spec, g.node_count());
  const std::uint32_t n = g.node_count();
  const int kappa = spec.kappa;
  PhaseConfig out(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    const int s = state_of(x[v]);
    if (s == 0) {
      bool excited = false;
      for (std::uint32_t u : g.neighbors(v)) {
        if (state_of(x[u]) == 1) {
          excited = true;
          break;
        }
      }
      out[v] = excited ? 1 : 0;
    } else {
      out[v] = (s + 1) % kappa;
    }
  }
  return out;
}

PhaseConfig step_dynamics(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec) {
  switch (spec.kind) {
    case DynamicsKind::Kuramoto: return step_kuramoto(g, x, spec);
    case DynamicsKind::Fca: return step_fca(g, x, spec);
    case DynamicsKind::Ghm: return step_ghm(g, x, spec);
  }
  throw Error(ErrorKind::Argument, "unknown dynamics kind");
}

Trajectory simulate(const Graph& g, const PhaseConfig& x0, const DynamicsSpec& spec, int steps) {
  require(steps >= 0, ErrorKind::Argument, "negative step count");
  validate_config(x0, spec, g.node_count());
  Trajectory traj;
  traj.spec = spec;
  traj.configs.reserve(static_cast<std::size_t>(steps) + 1);
  traj.configs.push_back(x0);
  for (int t = 0; t < steps; ++t)
    traj.configs.push_back(step_dynamics(g, traj.configs.back(), spec));
  return traj;
}

int blinking_color(int kappa) { return (kappa - 1) / 2; }

double circular_diameter(const PhaseConfig& x) {
  if (x.size() <= 1) return 0.0;
  PhaseConfig sorted(x);
  std::sort(sorted.begin(), sorted.end());
  double max_gap = sorted.front() + kTwoPi - sorted.back();
  for (std::size_t i = 1; i < sorted.size(); ++i)
    max_gap = std::max(max_gap, sorted[i] - sorted[i - 1]);
  return kTwoPi - max_gap;
}

bool is_synchronized(const PhaseConfig& x, const DynamicsSpec& spec) {
  if (x.empty()) return true;
  if (spec.discrete()) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
  }
  return circular_diameter(x) < spec.sync_tol;
}

bool is_concentrated(const PhaseConfig& x, const DynamicsSpec& spec) {
  if (x.empty()) return true;
  switch (spec.kind) {
    case DynamicsKind::Kuramoto:
      return circular_diameter(x) < std::numbers::pi;
    case DynamicsKind::Ghm:
      return is_synchronized(x, spec);
    case DynamicsKind::Fca: {
      // Occupied states must fit an interval of < kappa/2 consecutive
      // integers mod kappa; the window is kappa minus the largest circular
      // gap plus one.
      std::vector<int> states;
      states.reserve(x.size());
      for (double v : x) states.push_back(state_of(v));
      std::sort(states.begin(), states.end());
      states.erase(std::unique(states.begin(), states.end()), states.end());
      const int kappa = spec.kappa;
      int max_gap;
      if (states.size() == 1) {
        max_gap = kappa;
      } else {
        max_gap = states.front() + kappa - states.back();
        for (std::size_t i = 1; i < states.size(); ++i)
          max_gap = std::max(max_gap, states[i] - states[i - 1]);
      }
      const int window = kappa - max_gap + 1;
      return 2 * window < kappa;
    }
  }
  return false;
}

PhaseConfig random_config(const DynamicsSpec& spec, std::size_t n, Rng& rng) {
  PhaseConfig x(n);
  if (spec.discrete()) {
    for (auto& v : x) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(spec.kappa)));
  } else {
    for (auto& v : x) v = rng.uniform() * kTwoPi;
  }
  return x;
}

}  // namespace lldm
