#include <trapflow/output.hpp>

#include <trapflow/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace trapflow {

namespace {

using nlohmann::json;

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary); // binary keeps line endings fixed
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

json fit_to_json(const std::optional<DecayFit>& fit) {
  if (!fit) return json{{"valid", false}};
  return json{{"valid", true},
              {"rate", fit->rate},
              {"r2", fit->r_squared},
              {"intercept", fit->intercept},
              {"window", {fit->window_lo, fit->window_hi}},
              {"samples_used", fit->samples_used}};
}

json residuals_to_json(const EquilibriumResiduals& r) {
  return json{{"poisson_res", r.poisson_res},
              {"scalar_res", r.scalar_res},
              {"rn_res", r.rn_res},
              {"rp_res", r.rp_res},
              {"flux_res", r.flux_res}};
}

} // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::string& path, const TrajectoryLog& log) {
  std::ofstream out = open_for_write(path);
  out << "t,E,E_rel,P,Q,l1_n,l1_p,linf_n,linf_p,linf_ntr,h2proxy_psi,min_n,min_p,min_ntr,"
         "max_ntr\n";
  for (const TrajectorySample& s : log.samples) {
    const EntropyReport& r = s.report;
    out << format_double(s.t) << ',' << format_double(r.entropy) << ','
        << format_double(r.relative_entropy) << ',' << format_double(r.production) << ','
        << format_double(r.charge) << ',' << format_double(r.l1_n) << ','
        << format_double(r.l1_p) << ',' << format_double(r.linf_n) << ','
        << format_double(r.linf_p) << ',' << format_double(r.linf_ntr) << ','
        << format_double(r.h2proxy_psi) << ',' << format_double(r.min_n) << ','
        << format_double(r.min_p) << ',' << format_double(r.min_ntr) << ','
        << format_double(r.max_ntr) << '\n';
  }
}

void write_run_summary_json(const std::string& path, const Scenario& scenario,
                            const TrajectoryLog& log) {
  const auto& samples = log.samples;
  double drift = 0.0;
  double min_n = std::numeric_limits<double>::infinity();
  double min_p = min_n, min_ntr = min_n;
  double max_ntr = -min_n;
  double max_e_rel_increase = 0.0;
  const double q0 = samples.empty() ? 0.0 : samples.front().report.charge;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const EntropyReport& r = samples[i].report;
    drift = std::max(drift, std::abs(r.charge - q0));
    min_n = std::min(min_n, r.min_n);
    min_p = std::min(min_p, r.min_p);
    min_ntr = std::min(min_ntr, r.min_ntr);
    max_ntr = std::max(max_ntr, r.max_ntr);
    if (i > 0)
      max_e_rel_increase = std::max(
          max_e_rel_increase, r.relative_entropy - samples[i - 1].report.relative_entropy);
  }

  json summary;
  summary["rate"] = log.fit ? json(log.fit->rate) : json(nullptr);
  summary["r2"] = log.fit ? json(log.fit->r_squared) : json(nullptr);
  summary["fit"] = fit_to_json(log.fit);
  summary["drift"] = drift;
  summary["bounds"] = {{"min_n", min_n}, {"min_p", min_p}, {"min_ntr", min_ntr},
                       {"max_ntr", max_ntr}};
  summary["residuals"] = residuals_to_json(scenario.eq.residuals);
  if (!samples.empty()) {
    const EntropyReport& last = samples.back().report;
    summary["final"] = {{"t", samples.back().t},
                        {"E", last.entropy},
                        {"E_rel", last.relative_entropy},
                        {"l1_n", last.l1_n},
                        {"l1_p", last.l1_p},
                        {"linf_n", last.linf_n},
                        {"linf_p", last.linf_p},
                        {"linf_ntr", last.linf_ntr},
                        {"h1_psi", last.h1_psi},
                        {"h2proxy_psi", last.h2proxy_psi}};
    summary["e_rel_initial"] = samples.front().report.relative_entropy;
    summary["charge"] = {{"initial", q0}, {"final", samples.back().report.charge}};
  }
  summary["max_e_rel_increase"] = max_e_rel_increase;
  summary["neutralization_shift"] = scenario.doping_shift;
  summary["model"] = {{"eps", scenario.params.eps},
                      {"n0", scenario.params.n0},
                      {"p0", scenario.params.p0},
                      {"tau_n", scenario.params.tau_n},
                      {"tau_p", scenario.params.tau_p},
                      {"lambda", scenario.params.lambda}};
  summary["grid"] = {{"dim", scenario.grid.dim},
                     {"cells", {scenario.grid.nx(), scenario.grid.ny()}}};
  summary["n_star"] = scenario.eq.n_star;
  summary["p_star"] = scenario.eq.p_star;

  std::ofstream out = open_for_write(path);
  out << summary.dump(2) << '\n';
}

namespace {

void write_field_csv(const std::string& path, const Grid& grid, const std::vector<double>& f) {
  std::ofstream out = open_for_write(path);
  out << (grid.dim == 2 ? "cell,x,y,value\n" : "cell,x,value\n");
  for (int i = 0; i < grid.num_cells; ++i) {
    out << i << ',' << format_double(grid.center_x[i]);
    if (grid.dim == 2) out << ',' << format_double(grid.center_y[i]);
    out << ',' << format_double(f[static_cast<std::size_t>(i)]) << '\n';
  }
}

} // namespace

void write_equilibrium_output(const std::string& dir, const std::string& prefix,
                              const Grid& grid, const EquilibriumState& eq,
                              std::string& json_path_out) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string base = (fs::path(dir) / prefix).string();

  json fields;
  for (const auto& [name, data] :
       {std::pair<const char*, const std::vector<double>*>{"n_inf", &eq.n_inf},
        {"p_inf", &eq.p_inf},
        {"ntr_inf", &eq.ntr_inf},
        {"psi_inf", &eq.psi_inf}}) {
    const std::string path = base + "_" + name + ".csv";
    write_field_csv(path, grid, *data);
    fields[name] = path;
  }

  json summary;
  summary["n_star"] = eq.n_star;
  summary["p_star"] = eq.p_star;
  summary["residuals"] = residuals_to_json(eq.residuals);
  summary["newton_iterations"] = eq.newton_residuals.empty() ? 0 : eq.newton_residuals.size() - 1;
  summary["newton_residuals"] = eq.newton_residuals;
  summary["fields"] = fields;

  json_path_out = base + "_equilibrium.json";
  std::ofstream out = open_for_write(json_path_out);
  out << summary.dump(2) << '\n';
}

void write_sweep_output(const std::string& dir, const std::string& prefix,
                        const std::vector<SweepCase>& cases, double uniformity_bound) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string base = (fs::path(dir) / prefix).string();

  std::ofstream csv = open_for_write(base + "_sweep.csv");
  csv << "eps,rate,r2\n";
  for (const SweepCase& c : cases)
    csv << format_double(c.eps) << ',' << (c.fit_valid ? format_double(c.rate) : "nan") << ','
        << (c.fit_valid ? format_double(c.r_squared) : "nan") << '\n';

  double rate_min = std::numeric_limits<double>::infinity();
  double rate_max = 0.0;
  bool all_valid = !cases.empty();
  json case_list = json::array();
  for (const SweepCase& c : cases) {
    all_valid = all_valid && c.fit_valid && c.rate > 0.0;
    if (c.fit_valid) {
      rate_min = std::min(rate_min, c.rate);
      rate_max = std::max(rate_max, c.rate);
    }
    case_list.push_back({{"eps", c.eps},
                         {"rate", c.fit_valid ? json(c.rate) : json(nullptr)},
                         {"r2", c.fit_valid ? json(c.r_squared) : json(nullptr)},
                         {"summary", c.summary_path}});
  }
  const bool ratio_defined = all_valid && rate_min > 0.0;
  const double ratio = ratio_defined ? rate_max / rate_min : 0.0;

  json summary;
  summary["cases"] = case_list;
  summary["rate_min"] = ratio_defined ? json(rate_min) : json(nullptr);
  summary["rate_max"] = ratio_defined ? json(rate_max) : json(nullptr);
  summary["ratio"] = ratio_defined ? json(ratio) : json(nullptr);
  summary["uniformity_bound"] = uniformity_bound;
  summary["uniform"] = ratio_defined && ratio <= uniformity_bound;

  std::ofstream out = open_for_write(base + "_sweep.json");
  out << summary.dump(2) << '\n';
}

} // namespace trapflow
