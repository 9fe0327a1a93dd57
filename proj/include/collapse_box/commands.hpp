#pragma once

// The collapse-box subcommands. Exit codes: 0 pass, 1 operational failure,
// 2 validation failure or signaling/rejection detected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace cbox {

struct RunManifest {
  std::filesystem::path scenario;
  std::string command;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replicas;
  std::optional<double> alpha;
  std::optional<std::string> grid;
  unsigned workers = 0;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitDetected = 2;

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::uint64_t kDefaultReplicas = 100000;
inline constexpr double kDefaultAlpha = 0.01;

int cmd_validate(const RunManifest& m, std::ostream& out, std::ostream& err);
int cmd_witness(const RunManifest& m, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunManifest& m, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunManifest& m, std::ostream& out, std::ostream& err);

/// Dispatches on m.command.
int run_command(const RunManifest& m, std::ostream& out, std::ostream& err);

}  // namespace cbox
