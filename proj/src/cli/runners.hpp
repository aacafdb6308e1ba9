#pragma once

#include <string>

#include "config.hpp"

namespace ellab::cli {

// Each runner writes report.json (plus trajectory.csv where the
// subcommand produces a time series) under out_dir and returns the
// process exit code: 0 when every selected check passed, 1 otherwise.
int run_verify_identities(const Scenario& sc, const std::string& out_dir);
int run_simulate(const Scenario& sc, const std::string& out_dir);
int run_spectral_curve(const Scenario& sc, const std::string& out_dir);
int run_selfdual(const Scenario& sc, const std::string& out_dir);
int run_discrete(const Scenario& sc, const std::string& out_dir);
int run_wave_residual(const Scenario& sc, const std::string& out_dir);

} // namespace ellab::cli
