#pragma once

#include <filesystem>

#include "qho/io.hpp"

// Subcommands: JSON config in, CSV/JSON out. Exit codes: 0 ok, 1 other failure, 2 multiplicity,
// 3 configuration, 4 resonant, 5 small divisor.
namespace qho::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kMultiplicity = 2;
inline constexpr int kConfig = 3;
inline constexpr int kResonant = 4;
inline constexpr int kSmallDivisor = 5;

struct Context {
  std::filesystem::path out;
  unsigned threads = 0;  // 0: hardware concurrency
};

int cmd_spectrum(const io::json& cfg, const Context& ctx);
int cmd_sample_potential(const io::json& cfg, const Context& ctx);
int cmd_resonance(const io::json& cfg, const Context& ctx);
int cmd_normal_form(const io::json& cfg, const Context& ctx);
int cmd_evolve(const io::json& cfg, const Context& ctx);
int cmd_drift_report(const io::json& cfg, const Context& ctx);

// Parses argv, dispatches, maps exceptions to exit codes.
int run(int argc, char** argv);

}  // namespace qho::cli
