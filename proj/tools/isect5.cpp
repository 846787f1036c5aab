#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "isect5/cli.hpp"

namespace {

int emit(const isect5::cli::CommandResult& r) {
    std::cout << r.out << std::flush;
    std::cerr << r.err << std::flush;
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    using namespace isect5;

    CLI::App app{"Frenet and Darboux apparatus of the intersection curve of four hypersurfaces in R^5"};
    app.require_subcommand(1);

    std::string scene_path;
    auto* check = app.add_subcommand("check", "validate regularity, point agreement and transversality");
    check->add_option("scene", scene_path, "scene JSON file")->required();

    std::string format = "text";
    auto* analyze = app.add_subcommand("analyze", "Frenet frame, curvatures and Darboux data at the start point");
    analyze->add_option("scene", scene_path, "scene JSON file")->required();
    analyze->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "text"}));

    cli::TraceOptions topt;
    bool free_chords = false;
    auto* tr = app.add_subcommand("trace", "march along the curve and write CSV");
    tr->add_option("scene", scene_path, "scene JSON file")->required();
    tr->add_option("--steps", topt.steps, "number of steps")->check(CLI::NonNegativeNumber);
    tr->add_option("--step", topt.step, "arc-length step")->check(CLI::PositiveNumber);
    tr->add_option("--out", topt.out_path, "CSV output path (default stdout)");
    tr->add_flag("--profile", topt.profile, "append curvature columns");
    tr->add_flag("--reverse", topt.reverse, "march along -t");
    tr->add_flag("--free-chords", free_chords, "do not constrain chords to the step size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kInput;
    }
    topt.equal_chords = !free_chords;

    Scene scene;
    try {
        scene = load_scene(scene_path);
    } catch (const Error& e) {
        std::cerr << cli::describe(e) << "\n";
        return cli::exit_code_for(e);
    }

    try {
        if (*check) return emit(cli::cmd_check(scene));
        if (*analyze) return emit(cli::cmd_analyze(scene, format));
        return emit(cli::cmd_trace(scene, topt));
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return cli::kNumerical;
    }
}
