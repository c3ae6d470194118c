#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modesign/certify.hpp"
#include "modesign/solve.hpp"

namespace modesign {

/// Run of adjacent support points (same finite-set levels, interval
/// coordinates within 1.5 grid spacings of the previous member).
struct SupportCluster {
  std::vector<std::size_t> members;
  double weight = 0.0;
  std::vector<double> location;  // weight-averaged
};

std::vector<SupportCluster> support_clusters(const DesignGrid& grid, const Design& w);

/// Inputs of design.json; `efficiencies` may be empty when min_phi is not
/// known.
struct DesignSummary {
  const MultiObjectiveProblem* problem = nullptr;
  Design design;
  std::optional<SolveResult> result;
  std::optional<double> t_star;
};

std::string design_json(const DesignSummary& summary);
std::string certificate_json(const MultiObjectiveProblem& problem, const Certificate& c);
/// Header `index,x1..xp,d_<name>...,combined`; 17 significant digits.
std::string dispersion_csv(const MultiObjectiveProblem& problem, const Design& w,
                           const Certificate& c);
/// `index,weight` rows for every grid point (0-based index).
std::string design_csv(const Design& w);
/// Reads `index,weight` rows; a header line is allowed, missing indices get
/// weight 0. Throws ProblemFileError naming the line.
Design read_design_csv(const std::filesystem::path& path, std::size_t grid_size,
                       double support_threshold);
/// Human-readable support table with 4-decimal weights.
std::string support_table(const DesignGrid& grid, const Design& w);

/// Writes via a temporary file in the same directory and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace modesign
