#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gspca::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2, kNumericalFailure = 3 };

inline constexpr std::uint64_t kDefaultSeed = 20140601;

struct CliConfig {
    std::string subcommand;
    std::string data_path;
    std::string groups_path;
    std::string loadings_path;
    std::string spec_path;
    std::string output;

    int m = 1;
    std::optional<double> lambda;
    std::vector<double> gamma;
    std::string lambda_grid = "0:1:0.05";
    std::string algorithm = "block";     // block | deflation | pca
    std::string mu_mode = "decreasing";  // decreasing | equal
    std::string init = "svd";            // svd | random
    double tol = 1e-9;
    int max_iterations = 2000;
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;
    bool center = false;
    unsigned threads = 0;
};

int cmd_fit(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_variance(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare_groups(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and dispatches to a subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gspca::cli
