#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "expander/estimate_auditor.hpp"
#include "expander/expander_solver.hpp"
#include "expander/radial_oracle.hpp"

namespace expander {

/// Everything one run needs, as read from a key=value configuration.
struct RunConfig {
  ProblemSpec spec;
  GridSpec grid;
  ContinuationSchedule schedule;
  Scheme scheme = Scheme::polar;
  double delta0 = 0.1;
  double delta1 = 0.05;
};

/// Entries are `key=value`, separated by commas or newlines; commas inside
/// [...] belong to list values. `#` starts a comment.
///
/// Keys: n, k, alpha, phi.mode (constant | cosine), phi.c0,
/// phi.coefficients ([m:amplitude:phase, ...]), grid.n_r, grid.n_theta,
/// grid.grading, grid.stencil_width, grid.scheme (polar | monotone),
/// schedule.s_values, schedule.r_values ([..]), newton.tol,
/// newton.max_iters, newton.damping_floor, audit.delta0, audit.delta1.
/// n and alpha are required; k defaults to n.
///
/// Throws ParseError (with line and column) for malformed text, unknown or
/// repeated keys and a missing required key; ValidationError when the
/// assembled records are rejected. An α/k violation is reported even when n
/// is missing.
RunConfig parse_config(const std::string& text);
RunConfig read_config(const std::filesystem::path& path);

/// Applies `key=value` on top of a parsed configuration and revalidates.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Canonical text that parse_config maps back to the same configuration.
std::string config_to_text(const RunConfig& cfg);

/// CSV node table r, theta, xi1, xi2, u_star, grad_norm, h, flags under a
/// '#' header with the grid, the parameter and the configuration echo.
/// `h` uses s = param for Gauss fields and s = 1 for quotient fields; flag
/// bit 0 marks the Dirichlet ring. Throws IoError.
void export_field(const DualField& field, const std::filesystem::path& path, CaseTag kind,
                  const RunConfig* echo = nullptr);
/// Rebuilds the grid from the header. Throws IoError, ParseError.
DualField import_field(const std::filesystem::path& path);

void export_surface(const PrimalSurface& surface, const std::filesystem::path& path, const RunConfig* echo = nullptr);
void export_trace(const SolveTrace& trace, const std::filesystem::path& path);
void export_profile(const RadialProfile& profile, const std::filesystem::path& path);

/// Nested key-value blocks: metadata, failures, then one block per check.
void export_report(const EstimateReport& report, const std::filesystem::path& path);
std::string report_to_text(const EstimateReport& report);

/// Per-ray rows theta, R, u - R, phi(theta) sorted by angle then radius.
void emit_plotdata(const PrimalSurface& surface, const BoundaryData& phi, const std::filesystem::path& path);

std::vector<std::pair<std::string, std::string>> report_metadata(const RunConfig& cfg);

/// Sample radii used for reconstructions: 0..rmax in unit steps past 1.
std::vector<double> reconstruction_radii(double rmax);

// Command drivers. Each writes into `out` (created if absent) and a
// manifest.txt naming the command and the configuration.

void run_solve_gauss(const RunConfig& cfg, const std::filesystem::path& out);
/// `coarse` adds a half-resolution run used by the refinement audit.
void run_solve_quotient(const RunConfig& cfg, const std::filesystem::path& out, bool coarse = true);
void run_barriers(const RunConfig& cfg, const std::filesystem::path& out);
/// Audits the output of solve-gauss or solve-quotient and writes report.txt.
EstimateReport run_audit(const std::filesystem::path& fields_dir, const std::filesystem::path& out);
RadialProfile run_oracle(int n, int k, double alpha, double param, double boundary,
                         const std::filesystem::path& out);
void run_reconstruct(const std::filesystem::path& field_path, double rmax, int n_angles,
                     const std::filesystem::path& out);

}  // namespace expander
