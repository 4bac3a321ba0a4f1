#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dispctl/fourier.hpp"

namespace dispctl::cli {

enum ExitCode : int { kOk = 0, kNumericalFailure = 1, kConfigError = 2 };

// Flat "section.key" -> text, defaults merged under the file and the flags.
struct ExperimentConfig {
  std::string workflow;
  std::map<std::string, std::string> values;

  std::string text(const std::string& key) const;
  double real(const std::string& key) const;  // accepts pi arithmetic
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;

  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("run.seed")); }
  int n_max() const { return static_cast<int>(integer("run.nmax")); }
  // FNV-1a 64 over the sorted "key=value" lines and the workflow.
  std::string hash() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> n_max;
  std::optional<double> dt;
};

// Throws ConfigError with the file line or the offending field.
ExperimentConfig load_config(const std::string& workflow, const std::string& ini_path, const Overrides& flags);
ExperimentConfig default_config(const std::string& workflow);

// "random", or a sum of terms a, a*sin(kx), a*cos(kx).
FourierState parse_state(const std::string& field, const std::string& text, int n_max, std::mt19937_64& rng);

struct CsvFile {
  std::string name;
  std::string body;
};

struct Report {
  nlohmann::json body;
  std::vector<CsvFile> csv;
  int exit_code = kOk;
};

Report run(const ExperimentConfig& config);

// Full command line: subcommand and flags. Writes report.json and CSVs
// under --out, or the JSON to out when no directory is given.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dispctl::cli
