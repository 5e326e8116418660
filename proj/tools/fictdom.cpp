// Command-line driver: solve | convergence | singular-demo, each reading a
// JSON run configuration.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fictdom/commands.hpp"
#include "fictdom/config.hpp"

namespace {

int with_config(const std::string& path, const std::string& out_dir, bool svg,
                int (*cmd)(const fictdom::RunConfig&, std::ostream&, std::ostream&)) {
    try {
        fictdom::RunConfig cfg = fictdom::load_run_config(path);
        cfg.out_dir = out_dir;
        cfg.svg = svg;
        return cmd(cfg, std::cout, std::cerr);
    } catch (const fictdom::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return fictdom::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fictdom::kExitConfigError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fictitious-domain Poisson solver with a locally projected, "
                 "fluctuation-stabilized boundary multiplier"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    bool svg = false;

    CLI::App* solve = app.add_subcommand("solve", "solve one configuration and dump fields");
    solve->add_option("--config", config_path, "JSON run configuration")->required();
    solve->add_option("--out", out_dir, "output directory");

    CLI::App* conv =
        app.add_subcommand("convergence", "refinement study over the configured n_list");
    conv->add_option("--config", config_path, "JSON run configuration")->required();
    conv->add_option("--out", out_dir, "output directory");
    conv->add_flag("--svg", svg, "also write a log-log convergence plot");

    CLI::App* demo = app.add_subcommand(
        "singular-demo", "solvability table of the stabilized/unstabilized variants");
    demo->add_option("--config", config_path, "JSON run configuration")->required();

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) {
        return with_config(config_path, out_dir, svg,
                           [](const fictdom::RunConfig& c, std::ostream& o, std::ostream& e) {
                               return fictdom::cmd_solve(c, o, e);
                           });
    }
    if (conv->parsed()) {
        return with_config(config_path, out_dir, svg,
                           [](const fictdom::RunConfig& c, std::ostream& o, std::ostream& e) {
                               return fictdom::cmd_convergence(c, o, e);
                           });
    }
    return with_config(config_path, out_dir, svg,
                       [](const fictdom::RunConfig& c, std::ostream& o, std::ostream& e) {
                           return fictdom::cmd_singular_demo(c, o, e);
                       });
}
