#include "kernelpf/kernel_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kernelpf {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw PreconditionError("schema-violation", "at " + path + ": " + what);
}

double require_number(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.contains(key) || !doc[key].is_number())
    schema_error(path + "/" + key, "expected a number");
  return doc[key].get<double>();
}

std::vector<double> require_vector(const json& doc, const std::string& key,
                                   const std::string& path) {
  if (!doc.contains(key) || !doc[key].is_array())
    schema_error(path + "/" + key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : doc[key]) {
    if (!v.is_number()) schema_error(path + "/" + key, "expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Matrix require_matrix(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.contains(key) || !doc[key].is_array())
    schema_error(path + "/" + key, "expected a row-major matrix");
  std::vector<std::vector<double>> rows;
  for (const auto& row : doc[key]) {
    if (!row.is_array()) schema_error(path + "/" + key, "expected a row-major matrix");
    rows.emplace_back();
    for (const auto& v : row) {
      if (!v.is_number()) schema_error(path + "/" + key, "expected numbers");
      rows.back().push_back(v.get<double>());
    }
  }
  return Matrix::from_rows(rows);
}

std::vector<std::string> optional_labels(const json& doc, std::size_t n) {
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    for (const auto& v : doc["labels"]) labels.push_back(v.get<std::string>());
    if (labels.size() != n) schema_error("/labels", "label count must match the state count");
  } else {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  return labels;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json estimate_to_json(const Estimate& e, std::size_t n) {
  return json{{"n", n}, {"mean", e.mean}, {"se", e.se}, {"samples", e.samples}};
}

}  // namespace

ParsedKernel parse_kernel_spec(const json& document, const ParseOptions& options) {
  if (!document.is_object()) schema_error("/", "kernel spec must be a JSON object");
  if (!document.contains("variant") || !document["variant"].is_string())
    schema_error("/variant", "expected one of dense|density|analytic|rankone");
  const std::string variant = document["variant"].get<std::string>();

  ParsedKernel out;
  if (variant == "dense") {
    const Matrix M = require_matrix(document, "M", "");
    const auto g = require_vector(document, "g", "");
    const auto gamma = require_vector(document, "gamma", "");
    if (M.rows() != M.cols() || M.rows() != g.size() || g.size() != gamma.size())
      schema_error("/M", "M, g, gamma must share one state count");
    auto labels = optional_labels(document, g.size());
    auto space = TypeSpace::finite(labels);
    auto kernel = DenseKernel::from_full(space, M, g, gamma, options.tol);
    out.kernel = kernel;
    out.canonical = json{{"variant", "dense"},
                         {"labels", labels},
                         {"M", matrix_to_json(M)},
                         {"g", g},
                         {"gamma", gamma}};
  } else if (variant == "rankone") {
    const auto g1 = require_vector(document, "g1", "");
    const auto gamma1 = require_vector(document, "gamma1", "");
    const auto g = require_vector(document, "g", "");
    const auto gamma = require_vector(document, "gamma", "");
    if (g1.size() != gamma1.size() || g1.size() != g.size() || g.size() != gamma.size())
      schema_error("/g1", "g1, gamma1, g, gamma must share one state count");
    auto labels = optional_labels(document, g.size());
    auto space = TypeSpace::finite(labels);
    out.kernel = RankOneKernel::create(space, g1, gamma1, g, gamma, options.tol);
    out.canonical = json{{"variant", "rankone"}, {"labels", labels},   {"g1", g1},
                         {"gamma1", gamma1},     {"g", g},             {"gamma", gamma}};
  } else if (variant == "analytic") {
    const double a = require_number(document, "a", "");
    const double b = require_number(document, "b", "");
    const double c = require_number(document, "c", "");
    std::size_t n = 400;
    std::optional<double> T;
    if (document.contains("grid")) {
      const auto& grid = document["grid"];
      if (grid.contains("n")) n = grid["n"].get<std::size_t>();
      if (grid.contains("T")) T = grid["T"].get<double>();
    }
    auto kernel = AnalyticKernel::create(a, b, c, n, T);
    out.kernel = kernel;
    out.canonical = json{
        {"variant", "analytic"},
        {"a", a},
        {"b", b},
        {"c", c},
        {"grid", json{{"T", kernel->space().upper_bound()}, {"n", n}}}};
  } else if (variant == "density") {
    if (!document.contains("grid")) schema_error("/grid", "density kernels need a grid");
    const auto& grid = document["grid"];
    const double T = require_number(grid, "T", "/grid");
    std::vector<double> pms;
    if (grid.contains("point_masses")) pms = require_vector(grid, "point_masses", "/grid");
    SpacePtr space;
    std::vector<double> nodes;
    if (grid.contains("nodes")) {
      nodes = require_vector(grid, "nodes", "/grid");
      std::vector<double> weights(nodes.size());
      // composite trapezoid on the supplied node list
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double left = j == 0 ? 0.0 : (nodes[j] - nodes[j - 1]) / 2.0;
        const double right = j + 1 == nodes.size() ? 0.0 : (nodes[j + 1] - nodes[j]) / 2.0;
        weights[j] = left + right;
      }
      space = TypeSpace::grid(T, nodes, weights, pms);
    } else {
      const auto n = grid.contains("n") ? grid["n"].get<std::size_t>() : 400;
      space = TypeSpace::uniform_grid(T, n, pms);
      nodes = space->nodes();
    }
    const Matrix density = require_matrix(document, "m_density", "");
    const auto g = require_vector(document, "g", "");
    if (g.size() != space->site_count())
      schema_error("/g", "g must be sampled at every site (nodes then point masses)");
    if (!document.contains("gamma") || !document["gamma"].is_object())
      schema_error("/gamma", "expected {density: [...], atoms: [...]}");
    std::vector<double> gd(space->node_count(), 0.0), ga(space->point_mass_count(), 0.0);
    if (document["gamma"].contains("density"))
      gd = require_vector(document["gamma"], "density", "/gamma");
    if (document["gamma"].contains("atoms"))
      ga = require_vector(document["gamma"], "atoms", "/gamma");
    auto gamma = Measure::from_density(space, gd, ga);
    out.kernel = QuadratureKernel::from_sampled_density(space, density, g, gamma);
    out.canonical = json{{"variant", "density"},
                         {"grid", json{{"T", T}, {"nodes", nodes}, {"point_masses", pms}}},
                         {"m_density", matrix_to_json(density)},
                         {"g", g},
                         {"gamma", json{{"density", gd}, {"atoms", ga}}}};
  } else {
    schema_error("/variant", "unknown variant '" + variant + "'");
  }

  validate_atom(*out.kernel,
                out.kernel->uses_quadrature() ? options.tol_quad : options.tol);
  return out;
}

ParsedKernel parse_kernel_spec_file(const std::string& path,
                                    const ParseOptions& options) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw PreconditionError("schema-violation", std::string("invalid JSON: ") + e.what());
  }
  return parse_kernel_spec(doc, options);
}

Preset parse_preset_spec(const json& document) {
  if (!document.contains("preset") || !document["preset"].is_string())
    schema_error("/preset", "expected a preset name");
  const std::string name = document["preset"].get<std::string>();
  if (name == "split-chain") {
    if (!document.contains("P")) return build_preset(name);
    SplitChainParams p;
    p.P = require_matrix(document, "P", "");
    p.g = require_vector(document, "g", "");
    p.gamma = require_vector(document, "gamma", "");
    if (document.contains("labels"))
      p.labels = document["labels"].get<std::vector<std::string>>();
    return build_split_chain_preset(p);
  }
  if (name == "linear-fractional") {
    if (!document.contains("survival")) return build_preset(name);
    LinearFractionalParams p;
    p.survival = require_vector(document, "survival", "");
    p.transition = require_matrix(document, "transition", "");
    p.mean_clusters = require_number(document, "mean_clusters", "");
    p.gamma = require_vector(document, "gamma", "");
    return build_linear_fractional_preset(p);
  }
  if (name == "pure-atom") {
    if (!document.contains("g")) return build_preset(name);
    PureAtomParams p;
    p.g = require_vector(document, "g", "");
    p.gamma = require_vector(document, "gamma", "");
    return build_pure_atom_preset(p);
  }
  if (name == "analytic-example") {
    AnalyticPresetParams p;
    if (document.contains("a")) p.a = require_number(document, "a", "");
    if (document.contains("b")) p.b = require_number(document, "b", "");
    if (document.contains("c")) p.c = require_number(document, "c", "");
    if (document.contains("grid")) {
      if (document["grid"].contains("n")) p.nodes = document["grid"]["n"].get<std::size_t>();
      if (document["grid"].contains("T")) p.T = document["grid"]["T"].get<double>();
    }
    return build_analytic_preset(p);
  }
  throw PreconditionError("unknown-preset", "no preset named '" + name + "'");
}

json to_json(const ReportDefaults& defaults) {
  return json{{"N", defaults.N},
              {"n_max", defaults.n_max},
              {"tol", defaults.tol},
              {"tol_quad", defaults.tol_quad}};
}

json to_json(const SpectralReport& report) {
  json j{{"r", std::isinf(report.r) ? json("inf") : json(report.r)},
         {"R", report.R},
         {"f_R", report.f_R},
         {"fprime_R", std::isinf(report.fp_R) ? json("inf") : json(report.fp_R)},
         {"class", to_string(report.recurrence)},
         {"renewal_class", to_string(report.renewal)},
         {"criticality", to_string(report.criticality)},
         {"mean_generation_length",
          std::isinf(report.mean_generation_length) ? json("inf")
                                                    : json(report.mean_generation_length)},
         {"diagnostics",
          json{{"N", report.N},
               {"f_R_tail_bound", report.f_R_tail_bound},
               {"fprime_R_tail_bound", std::isinf(report.fp_R_tail_bound)
                                           ? json("inf")
                                           : json(report.fp_R_tail_bound)},
               {"support_gcd", report.support_gcd},
               {"r_exact", report.r_exact},
               {"warnings", report.warnings}}}};
  return j;
}

json to_json(const ValidationReport& report) {
  return json{{"valid", report.valid},
              {"max_residual", report.max_residual},
              {"clamped_negative", report.clamped_negative},
              {"warnings", report.warnings}};
}

json to_json(const InvariantPair& pair) {
  json h;
  json pi;
  const auto& space = *pair.h.space();
  if (space.is_grid()) {
    h = json{{"nodes", space.nodes()}, {"values", pair.h.values()}};
    std::vector<double> density(space.node_count());
    for (std::size_t j = 0; j < space.node_count(); ++j) density[j] = pair.pi.node_density(j);
    std::vector<double> atoms(space.point_mass_count());
    for (std::size_t k = 0; k < atoms.size(); ++k) atoms[k] = pair.pi.atom_mass(k);
    pi = json{{"density", density}, {"atoms", atoms}, {"atom_locations", space.point_masses()}};
  } else {
    h = json{{"values", pair.h.values()}};
    pi = json{{"masses", pair.pi.masses()}};
  }
  return json{{"s", pair.s},
              {"f_of_s", pair.f_of_s},
              {"h", h},
              {"pi", pi},
              {"hpi_product", std::isinf(pair.hpi_product) ? json("inf") : json(pair.hpi_product)},
              {"expected_hpi", pair.expected_hpi},
              {"normalization", json{{"h_gamma", pair.h_gamma}, {"g_pi", pair.g_pi}}},
              {"certified", pair.certified},
              {"tail_bound", pair.tail_bound},
              {"spectral", to_json(pair.spectral)}};
}

json to_json(const ApplicabilityVerdict& verdict) {
  return json{{"eps_condition", verdict.eps_condition},
              {"g_infimum_on_A", verdict.g_infimum_on_A},
              {"h_finite", verdict.h_finite},
              {"extra_condition_empirical", verdict.extra_condition_empirical},
              {"final_scaled_m",
               std::isfinite(verdict.final_scaled_m) ? json(verdict.final_scaled_m)
                                                     : json("inf")},
              {"note", verdict.note}};
}

json to_json(const LimitReport& report) {
  json trace_tail = json::array();
  const std::size_t from = report.trace.size() >= 5 ? report.trace.size() - 5 : 0;
  for (std::size_t n = from; n < report.trace.size(); ++n)
    trace_tail.push_back(json{{"n", n}, {"value", report.trace[n]}});
  json j{{"x", report.x_desc},
         {"set", report.set_desc},
         {"R", report.R},
         {"predicted_limit", report.predicted_limit},
         {"converged", report.converged},
         {"trace_length", report.trace.size()},
         {"trace_tail", trace_tail},
         {"applicability", to_json(report.applicability)},
         {"sensitivity_dlimit_dR", report.sensitivity_dlimit_dR},
         {"warnings", report.warnings},
         {"spectral", to_json(report.spectral)}};
  if (!report.cesaro.empty()) {
    j["cesaro_final"] = report.cesaro.back();
    j["cesaro_converged"] = report.cesaro_converged;
  }
  return j;
}

json to_json(const ResolventDecomposition& decomposition) {
  return json{{"lhs_M_s", decomposition.lhs},
              {"m_s", decomposition.m_s},
              {"regeneration_term", decomposition.regeneration},
              {"residual", decomposition.residual}};
}

json to_json(const EigenOracle& oracle, double R) {
  return json{{"rho", oracle.rho},
              {"R", R},
              {"R_times_rho", R * oracle.rho},
              {"right", oracle.right.values()},
              {"left", oracle.left.masses()}};
}

json to_json(const SimBatch& batch) {
  json f = json::array(), F = json::array();
  for (std::size_t n = 0; n < batch.f_hat.size(); ++n)
    f.push_back(estimate_to_json(batch.f_hat[n], n + 1));
  for (std::size_t n = 0; n < batch.F_hat.size(); ++n)
    F.push_back(estimate_to_json(batch.F_hat[n], n + 1));
  return json{{"replicates", batch.replicates},
              {"seed", batch.seed},
              {"horizon", batch.horizon},
              {"f_hat", f},
              {"F_hat", F},
              {"explosions", batch.explosions},
              {"censored_records", batch.censored}};
}

std::string trace_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os << "n,value\n";
  os.precision(17);
  for (std::size_t n = 0; n < trace.size(); ++n) os << n << "," << trace[n] << "\n";
  return os.str();
}

std::string pair_csv(const TypeFunction& h, const Measure& pi) {
  std::ostringstream os;
  os.precision(17);
  const auto& space = *h.space();
  if (space.is_grid()) {
    os << "x,kind,h,pi\n";
    for (std::size_t j = 0; j < space.node_count(); ++j)
      os << space.nodes()[j] << ",density," << h[j] << "," << pi.node_density(j) << "\n";
    for (std::size_t k = 0; k < space.point_mass_count(); ++k)
      os << space.point_masses()[k] << ",atom," << h[space.node_count() + k] << ","
         << pi.atom_mass(k) << "\n";
  } else {
    os << "state,kind,h,pi\n";
    for (std::size_t i = 0; i < space.site_count(); ++i)
      os << space.labels()[i] << ",mass," << h[i] << "," << pi.masses()[i] << "\n";
  }
  return os.str();
}

std::string records_stream(const SimBatch& batch) {
  std::ostringstream os;
  for (std::size_t i = 0; i < batch.records.size(); ++i) {
    const auto& record = batch.records[i];
    os << i << "," << record.L << "," << (record.censored ? 1 : 0) << ",";
    for (std::size_t n = 0; n < record.X.size(); ++n) {
      if (n) os << " ";
      os << record.X[n];
    }
    os << "\n";
  }
  return os.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io-error", "cannot write " + tmp);
    out << content;
    if (!out.flush()) throw Error("io-error", "cannot flush " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error("io-error", "cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace kernelpf
