#pragma once

#include <string>
#include <vector>

#include "lldm/graph.hpp"
#include "lldm/rng.hpp"

namespace lldm {

enum class DynamicsKind { Kuramoto, Fca, Ghm };

const char* dynamics_name(DynamicsKind kind);
DynamicsKind dynamics_from_name(const std::string& name);

// Oscillator model and its phase space. Kuramoto runs on the continuous
// circle [0, 2pi) with zero intrinsic frequencies (rotating frame); FCA and
// GHM run on the discrete circle Z/kappa.
struct DynamicsSpec {
  DynamicsKind kind = DynamicsKind::Kuramoto;
  int kappa = 0;           // FCA needs >= 3, GHM needs >= 2
  double coupling = 1.0;   // Kuramoto K
  double step_size = 0.05; // Kuramoto h
  double sync_tol = 1e-2;  // Kuramoto circular-diameter tolerance

  static DynamicsSpec kuramoto(double coupling = 1.0, double step_size = 0.05,
                               double sync_tol = 1e-2);
  static DynamicsSpec fca(int kappa = 5);
  static DynamicsSpec ghm(int kappa = 6);

  bool discrete() const { return kind != DynamicsKind::Kuramoto; }
  void validate() const;
};

// Per-node phases; reals in [0, 2pi) for Kuramoto, integers 0..kappa-1
// (stored as doubles) for FCA/GHM.
using PhaseConfig = std::vector<double>;

struct Trajectory {
  DynamicsSpec spec;
  std::vector<PhaseConfig> configs;  // configs[t] = X_t
};

void validate_config(const PhaseConfig& x, const DynamicsSpec& spec, std::uint32_t node_count);

// Synchronous one-step updates.
PhaseConfig step_kuramoto(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec);
PhaseConfig step_fca(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec);
PhaseConfig step_ghm(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec);
PhaseConfig step_dynamics(const Graph& g, const PhaseConfig& x, const DynamicsSpec& spec);

// Trajectory of length steps+1 with configs[0] = x0.
Trajectory simulate(const Graph& g, const PhaseConfig& x0, const DynamicsSpec& spec, int steps);

// FCA blinking color b(kappa) = floor((kappa-1)/2).
int blinking_color(int kappa);

// Length of the minimal arc covering all phases (2pi minus the largest
// circular gap); 0 for at most one node.
double circular_diameter(const PhaseConfig& x);

// All states equal for FCA/GHM; circular diameter < sync_tol for Kuramoto.
bool is_synchronized(const PhaseConfig& x, const DynamicsSpec& spec);

// Open half-circle confinement: diameter < pi (Kuramoto) or all occupied
// states inside < kappa/2 consecutive integers (FCA). GHM is defined as
// concentrated exactly when synchronized.
bool is_concentrated(const PhaseConfig& x, const DynamicsSpec& spec);

// I.i.d. uniform phases over the model's phase space.
PhaseConfig random_config(const DynamicsSpec& spec, std::size_t n, Rng& rng);

}  // namespace lldm
