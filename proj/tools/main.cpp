#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sqzlink: fiber squeezed-light link simulator and analysis"};
    app.require_subcommand(1);

    sqz::cli::CommonOptions opt;
    std::uint64_t seed_value = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* sub, bool needs_scenario, bool needs_out) {
        auto* s = sub->add_option("--scenario", opt.scenario_path,
                                  "Scenario JSON file");
        if (needs_scenario) s->required();
        auto* o = sub->add_option("--out", opt.out_dir, "Result directory");
        if (needs_out) o->required();
        sub->add_option("--seed", seed_value,
                        "Override the scenario seed")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--jobs", opt.jobs, "Worker threads (0 = auto)");
        sub->add_flag("--csv", opt.csv, "Also export controller-rate CSV");
    };

    auto* run = app.add_subcommand("run", "Run one scenario point");
    add_common(run, true, true);

    auto* sweep = app.add_subcommand("sweep", "Run the scenario sweep axes");
    add_common(sweep, true, true);

    std::string dir_a, dir_b;
    auto* compare = app.add_subcommand("compare", "Diff two result dirs");
    compare->add_option("run_a", dir_a, "First result directory")->required();
    compare->add_option("run_b", dir_b, "Second result directory")->required();
    compare->add_option("--out", opt.out_dir, "Report directory (stdout if omitted)");

    auto* calibrate =
        app.add_subcommand("calibrate", "Vacuum / dark reference calibration");
    add_common(calibrate, true, false);

    auto* validate = app.add_subcommand("validate", "Config check only");
    add_common(validate, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return sqz::cli::kExitConfigError;
    }

    if (seed_given) opt.seed_override = seed_value;

    if (run->parsed()) return sqz::cli::cmd_run(opt);
    if (sweep->parsed()) return sqz::cli::cmd_sweep(opt);
    if (compare->parsed())
        return sqz::cli::cmd_compare(dir_a, dir_b, opt.out_dir);
    if (calibrate->parsed()) return sqz::cli::cmd_calibrate(opt);
    if (validate->parsed()) return sqz::cli::cmd_validate(opt);
    return sqz::cli::kExitConfigError;
}
