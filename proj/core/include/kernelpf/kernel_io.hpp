#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "kernelpf/asymptotics.hpp"
#include "kernelpf/atom_kernel.hpp"
#include "kernelpf/invariant_pair.hpp"
#include "kernelpf/simulate.hpp"
#include "kernelpf/spectral.hpp"

namespace kernelpf {

struct ParsedKernel {
  KernelPtr kernel;
  nlohmann::json canonical;  // defaults materialized; parse(dump(canonical)) is a fixed point
};

struct ParseOptions {
  double tol = 1e-10;       // exact (matrix) identities, incl. the clamp band
  double tol_quad = 1e-6;   // quadrature identities
};

/// Builds an atom kernel from its JSON specification and validates the
/// decomposition. Schema errors carry the offending field path.
ParsedKernel parse_kernel_spec(const nlohmann::json& document,
                               const ParseOptions& options = {});
ParsedKernel parse_kernel_spec_file(const std::string& path,
                                    const ParseOptions& options = {});

/// Simulation preset from JSON ({"preset": name, ...family parameters}),
/// or the named preset with its documented defaults.
Preset parse_preset_spec(const nlohmann::json& document);

/// Run defaults recorded into every report for provenance.
struct ReportDefaults {
  std::size_t N = 200;
  std::size_t n_max = 500;
  double tol = 1e-10;
  double tol_quad = 1e-6;
};

nlohmann::json to_json(const ReportDefaults& defaults);
nlohmann::json to_json(const SpectralReport& report);
nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const InvariantPair& pair);
nlohmann::json to_json(const ApplicabilityVerdict& verdict);
nlohmann::json to_json(const LimitReport& report);
nlohmann::json to_json(const ResolventDecomposition& decomposition);
nlohmann::json to_json(const EigenOracle& oracle, double R);
nlohmann::json to_json(const SimBatch& batch);

/// trace CSV: "n,value" rows
std::string trace_csv(const std::vector<double>& trace);
/// function/measure export over the node grid: "x,kind,h,pi_density|pi_mass"
std::string pair_csv(const TypeFunction& h, const Measure& pi);
/// life records, one per line: index,L,censored,X_1 X_2 ...
std::string records_stream(const SimBatch& batch);

/// write-to-temp plus atomic rename; partial files never appear
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace kernelpf
