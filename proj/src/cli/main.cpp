#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "ellab/errors.hpp"
#include "runners.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for elliptic many-body pole dynamics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed_value = 0;
    double tol_value = 0;

    const std::vector<std::pair<std::string, std::string>> subcommands = {
        {"verify-identities", "run the elliptic function identity corpus"},
        {"simulate", "integrate a flow and monitor its invariants"},
        {"spectral-curve", "fit the spectral curve of a configuration"},
        {"selfdual", "integrate a first-order self-dual flow"},
        {"discrete", "iterate a discrete-time system"},
        {"wave-residual", "check the linear problem on the pole ansatz"},
    };
    for (const auto& [name, desc] : subcommands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "scenario file (JSON)")
            ->required();
        sub->add_option("--seed", seed_value, "override the scenario seed");
        sub->add_option("--tol-override", tol_value,
                        "replace every default check tolerance");
        sub->add_option("--out", out_dir,
                        "output directory (default: current directory)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        ellab::cli::Scenario sc = ellab::cli::load_scenario(config_path);
        if (chosen->count("--seed") > 0) sc.seed = seed_value;
        if (chosen->count("--tol-override") > 0) {
            if (!(tol_value > 0))
                throw ellab::config_error("--tol-override must be positive");
            sc.tol_override = tol_value;
        }
        const std::string name = chosen->get_name();
        if (name == "verify-identities")
            return ellab::cli::run_verify_identities(sc, out_dir);
        if (name == "simulate") return ellab::cli::run_simulate(sc, out_dir);
        if (name == "spectral-curve")
            return ellab::cli::run_spectral_curve(sc, out_dir);
        if (name == "selfdual") return ellab::cli::run_selfdual(sc, out_dir);
        if (name == "discrete") return ellab::cli::run_discrete(sc, out_dir);
        return ellab::cli::run_wave_residual(sc, out_dir);
    } catch (const ellab::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }
}
