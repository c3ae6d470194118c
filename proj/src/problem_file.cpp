#include "modesign/problem_file.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "modesign/errors.hpp"

namespace modesign {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ProblemFileError(where + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<int>();
}

Eigen::VectorXd vector_of(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = number(v[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

Eigen::MatrixXd matrix_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string w = where + "[" + std::to_string(r) + "]";
    const Eigen::VectorXd row = vector_of(v[r], w);
    if (static_cast<std::size_t>(row.size()) != cols || cols == 0) fail(w, "ragged matrix row");
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

SpaceFactor parse_factor(const json& f, const std::string& where) {
  if (f.contains("interval")) {
    const Eigen::VectorXd iv = vector_of(f["interval"], where + ".interval");
    if (iv.size() != 2) fail(where + ".interval", "expected [lo, hi]");
    return IntervalFactor{iv(0), iv(1), integer(field(f, "points", where), where + ".points")};
  }
  if (f.contains("set")) {
    const Eigen::VectorXd s = vector_of(f["set"], where + ".set");
    return SetFactor{std::vector<double>(s.data(), s.data() + s.size())};
  }
  fail(where, "factor needs 'interval' or 'set'");
}

template <int Q>
Eigen::Matrix<double, Q, 1> fixed_theta(const json& m, const std::string& where) {
  const Eigen::VectorXd t = vector_of(field(m, "theta", where), where + ".theta");
  if (t.size() != Q) fail(where + ".theta", "expected " + std::to_string(Q) + " values");
  return t;
}

RegressionModel parse_model(const json& m, const std::string& where) {
  const json& kind = field(m, "kind", where);
  if (!kind.is_string()) fail(where + ".kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "linear") {
    const json& basis = field(m, "basis", where);
    if (!basis.is_array() || basis.empty()) fail(where + ".basis", "expected a list of monomials");
    std::vector<RegressionModel::Monomial> mono;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const std::string w = where + ".basis[" + std::to_string(i) + "]";
      if (!basis[i].is_array()) fail(w, "expected a list of exponents");
      RegressionModel::Monomial e;
      for (const auto& x : basis[i]) e.push_back(integer(x, w));
      mono.push_back(std::move(e));
    }
    try {
      return RegressionModel::linear(std::move(mono));
    } catch (const std::exception& e) {
      fail(where + ".basis", e.what());
    }
  }
  if (k == "compartment4") return RegressionModel::compartment4(fixed_theta<4>(m, where));
  if (k == "emax3") return RegressionModel::emax3(fixed_theta<3>(m, where));
  if (k == "logistic4") return RegressionModel::logistic4(fixed_theta<4>(m, where));
  if (k == "poly_interaction") return RegressionModel::poly_interaction();
  fail(where + ".kind", "unknown model kind '" + k + "'");
}

// Resolves a reference given either as a name or as a 0-based index.
std::size_t resolve(const json& ref, const std::map<std::string, std::size_t>& names,
                    std::size_t count, const std::string& where) {
  if (ref.is_string()) {
    auto it = names.find(ref.get<std::string>());
    if (it == names.end()) fail(where, "unresolved reference '" + ref.get<std::string>() + "'");
    return it->second;
  }
  if (ref.is_number_integer()) {
    const auto i = ref.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= count) fail(where, "index out of range");
    return static_cast<std::size_t>(i);
  }
  fail(where, "expected a name or an index");
}

std::map<std::string, std::size_t> name_table(const json& list, const std::string& where) {
  std::map<std::string, std::size_t> names;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].contains("name")) continue;
    const std::string w = where + "[" + std::to_string(i) + "].name";
    if (!list[i]["name"].is_string()) fail(w, "expected a string");
    if (!names.emplace(list[i]["name"].get<std::string>(), i).second) fail(w, "duplicate name");
  }
  return names;
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

MultiObjectiveProblem parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProblemFileError("malformed JSON at " + line_column(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) fail("<root>", "expected an object");

  const json& space = field(doc, "design_space", "<root>");
  if (!space.is_array() || space.empty()) fail("design_space", "expected a nonempty array");
  SpaceSpec ss;
  for (std::size_t d = 0; d < space.size(); ++d) {
    ss.factors.push_back(parse_factor(space[d], "design_space[" + std::to_string(d) + "]"));
  }
  DesignGrid grid;
  try {
    grid = build_grid(ss);
  } catch (const std::invalid_argument& e) {
    fail("design_space", e.what());
  }

  const json& models = field(doc, "models", "<root>");
  if (!models.is_array() || models.empty()) fail("models", "expected a nonempty array");
  std::vector<RegressionModel> mlist;
  for (std::size_t i = 0; i < models.size(); ++i) {
    mlist.push_back(parse_model(models[i], "models[" + std::to_string(i) + "]"));
  }
  const auto model_names = name_table(models, "models");
  try {
    grid = grid.with_models(mlist);
  } catch (const std::exception& e) {
    fail("models", e.what());
  }

  MultiObjectiveProblem p;
  const json& crit = field(doc, "criteria", "<root>");
  if (!crit.is_array() || crit.empty()) fail("criteria", "expected a nonempty array");
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const std::string where = "criteria[" + std::to_string(i) + "]";
    const json& c = crit[i];
    const json& kind = field(c, "kind", where);
    if (!kind.is_string()) fail(where + ".kind", "expected a string");
    const std::string k = kind.get<std::string>();
    const std::size_t m = resolve(field(c, "model", where), model_names, mlist.size(),
                                  where + ".model");
    CriterionSpec spec;
    if (k == "D") {
      spec = CriterionSpec::d_optimal(m);
    } else if (k == "A") {
      spec = CriterionSpec::a_optimal(m);
    } else if (k == "E") {
      spec = CriterionSpec::e_optimal(m);
    } else if (k == "c") {
      spec = CriterionSpec::c_optimal(m, vector_of(field(c, "c", where), where + ".c"));
    } else if (k == "L") {
      const json& l = field(c, "L", where);
      if (l.is_object() && l.contains("integral")) {
        const json& in = l["integral"];
        const std::string w = where + ".L.integral";
        const Eigen::VectorXd iv = vector_of(field(in, "interval", w), w + ".interval");
        if (iv.size() != 2) fail(w + ".interval", "expected [a, b]");
        const int nodes = in.contains("nodes") ? integer(in["nodes"], w + ".nodes") : 200;
        try {
          spec = CriterionSpec::l_optimal(m, integral_L_matrix(mlist[m], iv(0), iv(1), nodes));
        } catch (const std::exception& e) {
          fail(w, e.what());
        }
      } else {
        spec = CriterionSpec::l_optimal(m, matrix_of(l, where + ".L"));
      }
    } else {
      fail(where + ".kind", "unknown criterion kind '" + k + "'");
    }
    spec.name = c.contains("name") && c["name"].is_string() ? c["name"].get<std::string>()
                                                           : k + std::to_string(i + 1);
    try {
      spec.validate(mlist[m].num_params());
    } catch (const ContractViolation& e) {
      fail(where, e.what());
    }
    p.specs.push_back(std::move(spec));
  }
  const auto crit_names = name_table(crit, "criteria");
  p.grid = std::move(grid);

  const json& prob = field(doc, "problem", "<root>");
  const json& type = field(prob, "type", "problem");
  if (!type.is_string()) fail("problem.type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "single") {
    p.kind = ProblemKind::Single;
    p.single_index = prob.contains("criterion")
                         ? resolve(prob["criterion"], crit_names, p.specs.size(),
                                   "problem.criterion")
                         : 0;
  } else if (t == "constrained") {
    p.kind = ProblemKind::Constrained;
    const Eigen::VectorXd b = vector_of(field(prob, "bounds", "problem"), "problem.bounds");
    p.bounds.assign(b.data(), b.data() + b.size());
  } else if (t == "maximin") {
    p.kind = ProblemKind::Maximin;
  } else {
    fail("problem.type", "expected 'single', 'constrained' or 'maximin'");
  }

  if (doc.contains("options")) {
    const json& o = doc["options"];
    if (!o.is_object()) fail("options", "expected an object");
    if (o.contains("delta")) p.delta = number(o["delta"], "options.delta");
    if (o.contains("solver_tol")) p.solver_tol = number(o["solver_tol"], "options.solver_tol");
    if (o.contains("support_threshold")) {
      p.support_threshold = number(o["support_threshold"], "options.support_threshold");
    }
    if (o.contains("max_iterations")) {
      p.max_iterations = integer(o["max_iterations"], "options.max_iterations");
    }
  }
  try {
    p.validate();
  } catch (const ContractViolation& e) {
    fail("problem", e.what());
  }
  return p;
}

MultiObjectiveProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemFileError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_problem(ss.str());
  } catch (const ProblemFileError& e) {
    throw ProblemFileError(path.string() + ": " + e.what());
  }
}

}  // namespace modesign
