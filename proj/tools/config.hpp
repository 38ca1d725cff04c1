#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "bermudan/bermudan.h"

namespace cli {

// Invalid configuration; the message already carries file and line.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Failure inside the library, tagged with the module that raised it.
struct RunError : std::runtime_error {
    RunError(const std::string& module, bh_status status, const std::string& what);
    std::string module;
    bh_status status;
};

void check(bh_status status, const char* module);

struct ModelConfig {
    std::size_t d = 1;
    std::vector<double> a{0.01};
    std::vector<double> sigma{0.01};
    std::vector<double> rho{1.0};  // row-major d x d
    double f0 = 0.03;
};

struct ContractConfig {
    bool payer = false;
    bool bermudan = true;
    double start = 1.0;
    double end = 6.0;
    int frequency = 1;
    double notional = 100.0;
    std::vector<double> moneyness{1.0};  // K / S
    double strike = 0.0;                 // used instead of moneyness when > 0
};

struct HedgeConfig {
    std::size_t paths = 10000;
    std::size_t rebalances = 255;
    std::vector<std::string> strategies;  // empty: by contract style
    bool discounted = false;
    bool dump_errors = true;
    double domain_scale = 2.0;
    double wide_fraction = 0.1;
};

struct SweepConfig {
    std::vector<std::size_t> nodes{2, 4, 8, 16, 32, 64};
    bool bounds = false;
};

struct BenchmarkConfig {
    std::size_t lsm_paths = 200000;
    std::size_t lsm_runs = 10;
    std::uint64_t lsm_seed = 11;
    bool out_of_sample = false;
    std::size_t mc_paths = 200000;
};

struct Config {
    std::vector<std::string> experiments{"price"};
    std::uint64_t seed = 42;
    std::string hedge_file;  // load instead of fitting when set
    ModelConfig model;
    ContractConfig contract;
    bh_train_config training{};
    bh_bound_options bounds{};
    HedgeConfig hedge;
    SweepConfig sweep;
    BenchmarkConfig benchmark;
};

Config default_config();
Config load_config(const std::filesystem::path& path);
// Every resolved value, defaults included, in the config format.
boost::property_tree::ptree to_tree(const Config& cfg);
void write_ini(const std::filesystem::path& path, const boost::property_tree::ptree& tree);

std::string format_double(double v);
std::vector<std::string> split_list(const std::string& s);

}  // namespace cli
