// wedge-rbm <command> --config <file> [--seed N] [--out DIR]

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include "wedge_rbm/wedge_rbm.hpp"

namespace {

std::string git_describe() {
    const std::string cmd = std::string("git -C \"") + WEDGE_RBM_SOURCE_DIR + "\" describe --always --dirty 2>/dev/null";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) return "unknown";
    std::string out;
    char buf[128];
    while (std::fgets(buf, sizeof buf, pipe.get())) out += buf;
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out.empty() ? "unknown" : out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected Brownian motion in a wedge: simulation and pathwise analysis"};
    std::string command, config_path, out_dir;
    std::uint64_t seed = 0;
    app.add_option("command", command, "simulate | decompose | excursions | indices | pvar | phi | check-sp | "
                                       "check-esp | full-suite")
        ->required()
        ->check(CLI::IsMember(wedge_rbm::commands()));
    app.add_option("--config", config_path, "flat key = value configuration file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
    auto* out_opt = app.add_option("--out", out_dir, "override the configured output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        wedge_rbm::ExperimentConfig cfg = wedge_rbm::load_config(config_path);
        if (*seed_opt) cfg.seed = seed;
        if (*out_opt) cfg.output_dir = out_dir;
        const wedge_rbm::RunResult r = wedge_rbm::run_experiment(cfg, command, git_describe(), &std::cerr);
        std::cout << r.directory.string() << '\n';
        return r.exit_code;
    } catch (const wedge_rbm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return 1;
}
