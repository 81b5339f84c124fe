#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "dualprox/lp.hpp"

namespace dualprox {

struct GeneratorData {
  int bus = 0;      // internal bus index
  double cost = 0;  // $/MWh, linear
  double pmin = 0, pmax = 0;  // MW
};

struct BranchData {
  int from = 0, to = 0;
  double susceptance = 0;     // 1/x, per unit
  double fmin = 0, fmax = 0;  // MW
};

struct PowerNetwork {
  int n_bus = 0;
  double base_mva = 100.0;
  Vec base_demand;  // MW per bus
  std::vector<GeneratorData> gens;
  std::vector<BranchData> branches;
  int slack_bus = 0;

  double total_gen_capacity() const;
};

// Parses the MATPOWER table subset used here: mpc.baseMVA, mpc.bus, mpc.gen,
// mpc.branch, mpc.gencost. Comments and blank lines are tolerated.
// Out-of-service generators and branches are dropped. Genuinely quadratic
// costs are rejected; this formulation is linear.
PowerNetwork parse_matpower_case(const std::string& text);

struct PtdfMatrix {
  Matrix values;  // branches x buses, slack column identically zero
  int slack = 0;
};

PtdfMatrix compute_ptdf(const PowerNetwork& net);

struct DemandSample {
  Vec beta;  // MW per bus
  std::uint64_t id = 0;
  std::uint64_t seed = 0;
};

// Per-bus demand: base * alpha * eta_i with a shared global scaler alpha and
// small independent per-bus noise. alpha is redrawn (up to 100 times) until
// total demand fits within 95% of generation capacity.
DemandSample sample_demand(const PowerNetwork& net, std::uint64_t seed,
                           std::pair<double, double> global_range = {0.8, 1.2},
                           double local_noise = 0.05);

enum class VarKind { Generator, Flow };

struct VariableMap {
  std::vector<std::pair<VarKind, int>> entries;  // x index -> physical element
};

// Standard-form LP with x = [generation; flows]: one power-balance row and
// one flow-definition row per branch.
ParametricLpInstance to_standard_form(const PowerNetwork& net, const PtdfMatrix& ptdf,
                                      const DemandSample& sample, VariableMap* map = nullptr);

// Right-hand side only, for families sharing the same network.
Vec rhs_for_demand(const PowerNetwork& net, const PtdfMatrix& ptdf, const Vec& beta);

}  // namespace dualprox
