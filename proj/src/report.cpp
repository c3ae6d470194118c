#include "modesign/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "modesign/errors.hpp"

namespace modesign {

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> point_of(const DesignGrid& grid, std::size_t i) {
  const auto p = grid.point(i);
  return {p.begin(), p.end()};
}

json vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string criterion_label(const CriterionSpec& s, std::size_t k) {
  return s.name.empty() ? to_string(s.kind) + std::to_string(k + 1) : s.name;
}

}  // namespace

std::vector<SupportCluster> support_clusters(const DesignGrid& grid, const Design& w) {
  const auto& factors = grid.factors();
  std::vector<double> spacing(static_cast<std::size_t>(grid.dimension()), 0.0);
  std::vector<bool> is_set(spacing.size(), false);
  for (std::size_t d = 0; d < factors.size() && d < spacing.size(); ++d) {
    if (const auto* iv = std::get_if<IntervalFactor>(&factors[d])) {
      spacing[d] = (iv->hi - iv->lo) / (iv->points - 1);
    } else {
      is_set[d] = true;
    }
  }
  auto adjacent = [&](std::size_t a, std::size_t b) {
    const auto pa = grid.point(a), pb = grid.point(b);
    for (std::size_t d = 0; d < spacing.size(); ++d) {
      if (is_set[d] || factors.empty()) {
        if (pa[d] != pb[d]) return false;
      } else if (std::abs(pa[d] - pb[d]) > 1.5 * spacing[d]) {
        return false;
      }
    }
    return true;
  };

  std::vector<SupportCluster> out;
  for (std::size_t i : w.support()) {
    if (out.empty() || !adjacent(out.back().members.back(), i)) out.emplace_back();
    out.back().members.push_back(i);
  }
  for (auto& c : out) {
    c.location.assign(spacing.size(), 0.0);
    for (std::size_t i : c.members) {
      const double wi = w.weights()(static_cast<Eigen::Index>(i));
      c.weight += wi;
      const auto p = grid.point(i);
      for (std::size_t d = 0; d < spacing.size(); ++d) c.location[d] += wi * p[d];
    }
    for (double& x : c.location) x /= c.weight;
  }
  return out;
}

std::string design_json(const DesignSummary& s) {
  const MultiObjectiveProblem& p = *s.problem;
  json j;
  j["problem"] = to_string(p.kind);
  j["grid_size"] = p.grid.size();
  j["support_threshold"] = s.design.support_threshold();

  json support = json::array();
  for (std::size_t i : s.design.support()) {
    support.push_back({{"index", i},
                       {"point", point_of(p.grid, i)},
                       {"weight", s.design.weights()(static_cast<Eigen::Index>(i))}});
  }
  j["support"] = support;
  json clusters = json::array();
  for (const auto& c : support_clusters(p.grid, s.design)) {
    if (c.members.size() < 2) continue;
    clusters.push_back({{"members", c.members},
                        {"point", c.location},
                        {"weight", c.weight},
                        {"clustered", true}});
  }
  j["clusters"] = clusters;

  json crit = json::array();
  for (std::size_t k = 0; k < p.specs.size(); ++k) {
    json c{{"name", criterion_label(p.specs[k], k)}, {"kind", to_string(p.specs[k].kind)}};
    c["phi"] = criterion_value(p.grid, p.specs[k], s.design.weights(), k);
    if (k < p.min_phi.size() && p.min_phi[k]) {
      c["min_phi"] = *p.min_phi[k];
      c["efficiency"] = efficiency_from_value(p.specs[k].kind, p.q_of(k), c["phi"].get<double>(),
                                              *p.min_phi[k]);
    }
    crit.push_back(c);
  }
  j["criteria"] = crit;
  if (p.kind == ProblemKind::Constrained) j["bounds"] = p.bounds;
  if (s.t_star) j["t_star"] = *s.t_star;
  if (s.result) {
    j["status"] = to_string(s.result->status);
    j["iterations"] = s.result->iterations;
    j["kkt_residual"] = s.result->kkt_residual;
    j["objective"] = s.result->objective;
  }
  return j.dump(2) + "\n";
}

std::string certificate_json(const MultiObjectiveProblem& p, const Certificate& c) {
  json j;
  j["verdict"] = to_string(c.verdict);
  j["delta"] = c.delta;
  j["eta"] = vec(c.eta);
  j["design_feasible"] = c.design_feasible;
  j["max_stationarity_residual"] = c.max_stationarity_residual;
  j["complementarity_residuals"] = c.complementarity_residuals;
  j["excess"] = c.excess;
  j["lp_objective"] = c.lp_objective;
  json crit = json::array();
  for (std::size_t k = 0; k < p.specs.size(); ++k) {
    json e{{"name", criterion_label(p.specs[k], k)}, {"kind", to_string(p.specs[k].kind)}};
    if (k < c.r_star.size() && p.specs[k].kind == CriterionKind::E) e["r_star"] = c.r_star[k];
    if (k < c.a_weights.size() && c.a_weights[k].size() > 0) e["a_weights"] = vec(c.a_weights[k]);
    if (k < c.curves.size() && c.curves[k].size() > 0) {
      e["max_dispersion"] = c.curves[k].maxCoeff();
    }
    crit.push_back(e);
  }
  j["criteria"] = crit;
  j["notes"] = c.notes;
  return j.dump(2) + "\n";
}

std::string dispersion_csv(const MultiObjectiveProblem& p, const Design& w, const Certificate& c) {
  const Eigen::MatrixXd table = dispersion_report(p, w, c);
  std::string out = "index";
  for (int d = 0; d < p.grid.dimension(); ++d) out += ",x" + std::to_string(d + 1);
  for (std::size_t k = 0; k < p.specs.size(); ++k) out += ",d_" + criterion_label(p.specs[k], k);
  out += ",combined\n";
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    out += std::to_string(i);
    for (double x : p.grid.point(static_cast<std::size_t>(i))) out += "," + g17(x);
    for (Eigen::Index k = 0; k < table.cols(); ++k) out += "," + g17(table(i, k));
    out += "\n";
  }
  return out;
}

std::string design_csv(const Design& w) {
  std::string out = "index,weight\n";
  for (Eigen::Index i = 0; i < w.weights().size(); ++i) {
    out += std::to_string(i) + "," + g17(w.weights()(i)) + "\n";
  }
  return out;
}

Design read_design_csv(const std::filesystem::path& path, std::size_t grid_size,
                       double support_threshold) {
  std::ifstream in(path);
  if (!in) throw ProblemFileError(path.string() + ": cannot open design file");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_size));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (comma == std::string::npos) throw ProblemFileError(where + ": expected 'index,weight'");
    std::size_t idx;
    double weight;
    try {
      std::size_t used = 0;
      const long long i = std::stoll(line.substr(0, comma), &used);
      if (i < 0) throw ProblemFileError(where + ": negative index");
      idx = static_cast<std::size_t>(i);
      weight = std::stod(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      if (lineno == 1) continue;  // header
      throw ProblemFileError(where + ": expected 'index,weight'");
    }
    if (idx >= grid_size) {
      throw ProblemFileError(where + ": index " + std::to_string(idx) +
                             " outside the grid of " + std::to_string(grid_size) + " points");
    }
    w(static_cast<Eigen::Index>(idx)) = weight;
  }
  const double total = w.sum();
  if (!(total > 0.0) || w.minCoeff() < 0.0) {
    throw ProblemFileError(path.string() + ": weights must be nonnegative with a positive sum");
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ProblemFileError(path.string() + ": weights sum to " + g17(total) + ", expected 1");
  }
  return Design(w / total, support_threshold);
}

std::string support_table(const DesignGrid& grid, const Design& w) {
  std::ostringstream out;
  char buf[128];
  auto point_str = [&](const std::vector<double>& p) {
    std::string s = p.size() > 1 ? "(" : "";
    for (std::size_t d = 0; d < p.size(); ++d) {
      std::snprintf(buf, sizeof buf, "%s%.4g", d ? ", " : "", p[d]);
      s += buf;
    }
    return s + (p.size() > 1 ? ")" : "");
  };
  for (std::size_t i : w.support()) {
    std::snprintf(buf, sizeof buf, "  %-20s %.4f\n", point_str(point_of(grid, i)).c_str(),
                  w.weights()(static_cast<Eigen::Index>(i)));
    out << buf;
  }
  for (const auto& c : support_clusters(grid, w)) {
    if (c.members.size() < 2) continue;
    std::snprintf(buf, sizeof buf, "  %-20s %.4f  (merged %zu points)\n",
                  point_str(c.location).c_str(), c.weight, c.members.size());
    out << buf;
  }
  return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace modesign
