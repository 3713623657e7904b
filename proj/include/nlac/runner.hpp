#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace nlac {

inline constexpr const char* kVersion = "0.1.0";

// exit statuses of `run`: 0 ok, kExitConfig bad/missing config or input,
// kExitNumeric numerical failure, kExitAcceptance failed verification
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitAcceptance = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// flat key=value file; '#' starts a comment, blank lines ignored
using Config = std::map<std::string, std::string>;
Config parse_config(const std::string& path);

// runs the experiment named by `kind` from the config at `path`, writing all
// artifacts plus a manifest JSON into the configured output directory
int run_experiment(const std::string& kind, const std::string& path, std::ostream& log);

// trivial examples and cheap oracles across all modules, one line per check
int verify_suite(std::uint64_t seed, std::ostream& out);

}  // namespace nlac
