#include "mpdarcy/commands.hpp"
#include "mpdarcy/version.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Micropolar thin porous medium toolkit: cell problems, Darcy law, resolved validation"};
    app.set_version_flag("--version", mpdarcy::version);
    app.require_subcommand(1);

    mpdarcy::CommandOptions opts;
    std::string format;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory (overrides output.directory)");
        sub->add_option("--format", format, "field output format")->check(CLI::IsMember({"csv", "vtk", "both"}));
        sub->add_flag("--plot", opts.plot, "write an SVG pressure map with velocity quiver");
    };
    auto* cell = app.add_subcommand("cell", "solve the six cell problems and write permeability.json");
    auto* darcy = app.add_subcommand("darcy", "solve the homogenized Darcy problem from a permeability file");
    auto* pipeline = app.add_subcommand("pipeline", "cell followed by darcy");
    auto* validate = app.add_subcommand("validate", "unfolding identities and, with --full, the resolved sweep");
    for (auto* sub : {cell, darcy, pipeline, validate})
        add_common(sub);
    darcy->add_option("--perm", opts.perm_path, "permeability file (default <out>/permeability.json)");
    validate->add_flag("--full", opts.full, "run the resolved eps-sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[ConfigError]: " << e.what() << "\n";
        return 2;
    }
    if (!format.empty())
        opts.format = format;
    for (auto* sub : app.get_subcommands())
        return mpdarcy::run_command(sub->get_name(), opts, std::cout, std::cerr);
    return 2;
}
