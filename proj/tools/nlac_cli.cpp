#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nlac/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical experiments for the anisotropic fractional Allen-Cahn equation"};
    app.require_subcommand(1);

    std::string config;
    for (const char* kind : {"geometry", "profile", "barrier", "solve", "flatness", "sliding",
                             "decay", "lbar"}) {
        auto* sub = app.add_subcommand(kind, std::string("run a ") + kind + " experiment");
        sub->add_option("config", config, "flat key=value config file")->required();
    }
    std::uint64_t seed = 0;
    auto* verify = app.add_subcommand("verify", "run the trivial examples and cheap oracles");
    verify->add_option("--seed", seed, "seed for randomized checks");

    CLI11_PARSE(app, argc, argv);

    auto* sub = app.get_subcommands().front();
    if (sub->get_name() == "verify") return nlac::verify_suite(seed, std::cout);
    return nlac::run_experiment(sub->get_name(), config, std::cerr);
}
