// kernelpf command-line interface: spectral classification, invariant
// pairs, Perron limits, resolvent decomposition, the finite-kernel eigen
// oracle, and Monte Carlo simulation of the branching presets.
//
// Exit codes: 0 success, 2 precondition/validation errors, 3 numerically
// inconclusive results. Errors are emitted as single-line JSON on stderr.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kernelpf/asymptotics.hpp"
#include "kernelpf/kernel_io.hpp"

using nlohmann::json;
using namespace kernelpf;

namespace {

struct CommonOptions {
  std::string input;
  std::string output;
  std::size_t N = 200;
  std::size_t n_max = 500;
  std::uint64_t seed = 0;
  std::size_t replicates = 10000;
  double tol = 1e-10;
  double tol_quad = 1e-6;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_input) {
  auto* in = cmd->add_option("--input", opt.input, "kernel or preset specification (JSON)");
  if (needs_input) in->required();
  cmd->add_option("--output", opt.output, "report file (stdout when omitted)");
  cmd->add_option("--N", opt.N, "series truncation order")->capture_default_str();
  cmd->add_option("--nmax", opt.n_max, "trace length for limits")->capture_default_str();
  cmd->add_option("--replicates", opt.replicates, "Monte Carlo replicates")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "master seed")->capture_default_str();
  cmd->add_option("--tol", opt.tol, "tolerance for exact-kernel identities")
      ->capture_default_str();
  cmd->add_option("--tol-quad", opt.tol_quad, "tolerance for quadrature identities")
      ->capture_default_str();
}

json provenance(const CommonOptions& opt) {
  ReportDefaults defaults{opt.N, opt.n_max, opt.tol, opt.tol_quad};
  return to_json(defaults);
}

void emit(const CommonOptions& opt, json report) {
  report["defaults"] = provenance(opt);
  const std::string text = report.dump(2) + "\n";
  if (opt.output.empty())
    std::cout << text;
  else
    atomic_write_file(opt.output, text);
}

SetDescriptor parse_set(const std::string& text, const TypeSpace& space) {
  if (text.empty() || text == "all") return SetDescriptor::all();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    if (lo != 0.0)
      throw PreconditionError("unrepresentable-set", "intervals must start at 0");
    return SetDescriptor::interval(hi);
  }
  // comma-separated state labels
  std::vector<std::size_t> sites;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string label =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!label.empty()) {
      if (space.is_finite()) {
        sites.push_back(space.site_of_label(label));
      } else {
        const double coord = std::stod(label);
        if (auto site = space.site_at(coord))
          sites.push_back(*site);
        else
          throw PreconditionError("unrepresentable-set",
                                  "point " + label + " is not a grid site");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return SetDescriptor::of_sites(std::move(sites));
}

Point parse_point(const std::string& text, const TypeSpace& space) {
  if (space.is_finite()) {
    try {
      return Point::at_site(space.site_of_label(text));
    } catch (const Error&) {
      return Point::at_site(static_cast<std::size_t>(std::stoul(text)));
    }
  }
  return Point::at(std::stod(text));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perron-Frobenius analysis for non-negative kernels with an atom"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string set_text = "all";
  std::string x_text = "0";
  double s_value = 0.5;
  std::string preset_name;
  std::string records_path;
  std::string trace_path;
  std::string csv_path;
  bool cesaro = false;

  auto* classify_cmd = app.add_subcommand("classify", "spectral report for a kernel");
  add_common(classify_cmd, opt, true);

  auto* invariants_cmd =
      app.add_subcommand("invariants", "R-invariant pair (h, pi) with normalization");
  add_common(invariants_cmd, opt, true);
  invariants_cmd->add_option("--csv", csv_path, "export h and pi over the grid as CSV");

  auto* limit_cmd = app.add_subcommand("limit", "Perron limit report with trace");
  add_common(limit_cmd, opt, true);
  limit_cmd->add_option("--x", x_text, "starting point (label or coordinate)");
  limit_cmd->add_option("--set", set_text, "target set: 'all', '0:t', or labels");
  limit_cmd->add_option("--trace", trace_path, "trace CSV path");
  limit_cmd->add_flag("--cesaro", cesaro, "Cesaro-average variant for periodic kernels");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimates of f_n, F_n");
  add_common(simulate_cmd, opt, false);
  simulate_cmd->add_option("--preset", preset_name,
                           "split-chain | linear-fractional | pure-atom | analytic-example");
  simulate_cmd->add_option("--records", records_path, "stream life records to this file");
  std::size_t horizon = 10;
  simulate_cmd->add_option("--horizon", horizon, "generations per replicate")
      ->capture_default_str();

  auto* decompose_cmd =
      app.add_subcommand("decompose", "resolvent identity residual at a given s");
  add_common(decompose_cmd, opt, true);
  decompose_cmd->add_option("--s", s_value, "evaluation point (requires f(s) < 1)")->required();
  decompose_cmd->add_option("--x", x_text, "starting point");
  decompose_cmd->add_option("--set", set_text, "target set");

  auto* oracle_cmd =
      app.add_subcommand("oracle", "power-iteration eigen comparison (finite kernels)");
  add_common(oracle_cmd, opt, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const ParseOptions parse_options{opt.tol, opt.tol_quad};
    if (classify_cmd->parsed()) {
      const ParsedKernel parsed = parse_kernel_spec_file(opt.input, parse_options);
      json report = to_json(classify(*parsed.kernel, opt.N));
      report["kernel"] = parsed.canonical["variant"];
      emit(opt, std::move(report));
    } else if (invariants_cmd->parsed()) {
      const ParsedKernel parsed = parse_kernel_spec_file(opt.input, parse_options);
      const InvariantPair pair = invariant_pair(*parsed.kernel, opt.N);
      if (!csv_path.empty()) atomic_write_file(csv_path, pair_csv(pair.h, pair.pi));
      emit(opt, to_json(pair));
    } else if (limit_cmd->parsed()) {
      const ParsedKernel parsed = parse_kernel_spec_file(opt.input, parse_options);
      const auto& space = parsed.kernel->space();
      PerronLimitOptions options;
      options.N = opt.N;
      options.n_max = opt.n_max;
      options.cesaro = cesaro;
      options.tol = parsed.kernel->uses_quadrature() ? opt.tol_quad : opt.tol;
      const LimitReport report = perron_limit(*parsed.kernel, parse_point(x_text, space),
                                              parse_set(set_text, space), options);
      if (!trace_path.empty()) atomic_write_file(trace_path, trace_csv(report.trace));
      emit(opt, to_json(report));
    } else if (simulate_cmd->parsed()) {
      Preset preset;
      if (!opt.input.empty()) {
        preset = parse_preset_spec(json::parse(read_file(opt.input)));
      } else if (!preset_name.empty()) {
        preset = build_preset(preset_name);
      } else {
        throw PreconditionError("invalid-argument", "simulate needs --preset or --input");
      }
      const SimBatch batch = estimate_series(preset.reproduction, preset.cluster,
                                             opt.replicates, horizon, opt.seed);
      if (!records_path.empty()) atomic_write_file(records_path, records_stream(batch));
      json report = to_json(batch);
      report["preset"] = preset.name;
      emit(opt, std::move(report));
    } else if (decompose_cmd->parsed()) {
      const ParsedKernel parsed = parse_kernel_spec_file(opt.input, parse_options);
      const auto& space = parsed.kernel->space();
      const ResolventDecomposition decomposition = resolvent_decomposition(
          *parsed.kernel, s_value, parse_point(x_text, space), parse_set(set_text, space),
          opt.N);
      emit(opt, to_json(decomposition));
    } else if (oracle_cmd->parsed()) {
      const ParsedKernel parsed = parse_kernel_spec_file(opt.input, parse_options);
      const EigenOracle oracle = power_iteration_oracle(*parsed.kernel);
      const SpectralReport spectral = classify(*parsed.kernel, opt.N);
      json report = to_json(oracle, spectral.R);
      report["spectral"] = to_json(spectral);
      emit(opt, std::move(report));
    }
  } catch (const InconclusiveError& e) {
    std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return 0;
}
