#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "specdyn/commands.hpp"
#include "specdyn/config.hpp"
#include "specdyn/error.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank transition kernel estimation, state embedding and metastable clustering"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    const auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out-dir", out_dir, "Directory for inputs and outputs (default: current directory)");
        return sub;
    };
    CLI::App* simulate = add("simulate", "Simulate a Langevin trajectory");
    CLI::App* fit = add("fit", "Fit feature bases, projection estimate and state embedding");
    CLI::App* cluster = add("cluster", "Cluster embedded states into metastable sets");
    CLI::App* benchmark = add("benchmark", "Compare reshaped and plain estimates against a reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        const specdyn::RunConfig config = specdyn::load_config(config_path);
        std::filesystem::create_directories(out_dir);
        if (simulate->parsed())
            specdyn::run_simulate(config, out_dir, std::cout);
        else if (fit->parsed())
            specdyn::run_fit(config, out_dir, std::cout);
        else if (cluster->parsed())
            specdyn::run_cluster(config, out_dir, std::cout);
        else if (benchmark->parsed())
            specdyn::run_benchmark(config, out_dir, std::cout);
    } catch (const specdyn::NumericalBlowup& e) {
        std::cerr << "error: " << e.what() << " (step " << e.step() << ")\n";
        return kNumerical;
    } catch (const specdyn::DegenerateFeatures& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const specdyn::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const specdyn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const specdyn::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
