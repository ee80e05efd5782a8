#pragma once

// Experiment drivers shared by the adqc-sim CLI and the acceptance suite.
//
// Each driver takes a user config (any subset of the keys in its default
// document), resolves it against the defaults with strict unknown-key and
// type checking, runs the physics, and writes tab-separated data tables plus
// a summary.json into the configured output directory.  Outputs are
// deterministic: identical resolved config (seed included) means
// byte-identical files.

#include "adqc/io.hpp"

#include <filesystem>

namespace adqc {

struct RunSummary {
  Json result;  // what summary.json holds
  std::vector<std::filesystem::path> files;
};

// Registered experiment names, in CLI order.
const std::vector<std::string>& experiment_names();

// Complete default config document for one experiment; throws config_error
// for unknown names.
Json default_config(const std::string& experiment);

// Single-qubit precession panels with tilted preparation and readout.
RunSummary run_larmor(const Json& config);

// Two-qubit excitation exchange in the one-excitation sector.
RunSummary run_exchange(const Json& config);

// Excitation transport on a chain plus the spectral ridge pipeline; the
// basis overload forces config["basis"].
RunSummary run_chain(const Json& config);
RunSummary run_chain(Json config, const std::string& basis);

// Disorder-averaged imbalance ensembles and the small-W scaling fit.
RunSummary run_anderson(const Json& config);

// Detector-quench readout axis and the two-target coupling sweep.
RunSummary run_detection(const Json& config);

// Rotating-wave error against the full model under gap doubling.
RunSummary run_rwa_check(const Json& config);

// Dispatch by experiment name; throws config_error for unknown names.
RunSummary run_experiment(const std::string& experiment, const Json& config);

}  // namespace adqc
