#pragma once

#include <trapflow/config.hpp>
#include <trapflow/stepper.hpp>

#include <string>

namespace trapflow {

/// Shortest decimal representation that round-trips to the same double
/// ("inf"/"nan" for non-finite values).
std::string format_double(double v);

/// Trajectory CSV with the fixed column order
/// t,E,E_rel,P,Q,l1_n,l1_p,linf_n,linf_p,linf_ntr,h2proxy_psi,min_n,min_p,min_ntr,max_ntr.
void write_trajectory_csv(const std::string& path, const TrajectoryLog& log);

/// Run summary JSON: fitted rate and r2, conservation drift, bound monitors,
/// equilibrium residuals, final norms, and the scenario's key parameters.
void write_run_summary_json(const std::string& path, const Scenario& scenario,
                            const TrajectoryLog& log);

/// Equilibrium summary JSON plus per-field CSV dumps (cell index, x[, y], value).
void write_equilibrium_output(const std::string& dir, const std::string& prefix,
                              const Grid& grid, const EquilibriumState& eq,
                              std::string& json_path_out);

struct SweepCase {
  double eps = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  bool fit_valid = false;
  std::string summary_path;
};

/// Combined sweep table (CSV) and summary (JSON) with the rate ratio.
void write_sweep_output(const std::string& dir, const std::string& prefix,
                        const std::vector<SweepCase>& cases, double uniformity_bound);

} // namespace trapflow
