#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochavg/analysis.hpp"
#include "stochavg/engine.hpp"
#include "stochavg/flows.hpp"

namespace stochavg::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode : int { kOk = 0, kConfigError = 1, kViolated = 2, kUndecidable = 3, kDiverged = 4 };

/// Malformed config. `where` is a JSON pointer or "line L, column C".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

json parse_json_text(const std::string& text);
json load_json_file(const std::filesystem::path& path);

struct Config {
  json source;  // after overrides, as hashed
  engine::SimConfig sim;
  std::size_t h = 1;
  double mean_v_epsilon = 1e-2;
  bool custom_intensity = false;
};

Config parse_config(const json& j);

std::string canonical_json(const json& j);
/// FNV-1a 64 of the canonical text.
std::uint64_t config_hash(const json& j);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> stride;
  bool full_state = false;
};

void apply_overrides(json& j, const Overrides& o);

enum class Status { Satisfied, Violated, Undecidable };
const char* to_string(Status s);

struct Hypothesis {
  std::string name;
  Status status = Status::Satisfied;
  std::string detail;
};

struct TheoremCheck {
  int theorem = 1;
  std::vector<Hypothesis> items;
  Status status() const;
};

struct CheckReport {
  flows::FlowCertificate flow;
  gain::GainFlags gain;
  Hypothesis a1;
  std::vector<TheoremCheck> theorems;  // 1..4 in order
  int exit_code() const;
};

CheckReport check(const Config& cfg);
void print_check(const Config& cfg, const CheckReport& r, std::ostream& os);

json bounds_json(const analysis::BoundReport& r, const analysis::BoundInputs& in);

/// Summary block of one ensemble, shared by simulate and sweep.
struct Summary {
  engine::EnsembleStats stats;
  std::optional<double> var_bound_thm1;
  std::optional<double> var_bound_thm4;
};

/// Runs the ensemble and evaluates whichever bounds apply.
Summary summarize(const Config& cfg, std::vector<engine::TrialResult>* kept = nullptr);

std::string summary_csv(const Summary& s);
std::string trajectory_csv(const std::vector<engine::TrialResult>& trials, bool full_state);

struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

/// "param=v1,v2,..." with param in {n, sigma, b, gamma, a}.
SweepSpec parse_sweep(const std::string& text);

int cmd_check(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_bound(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);
int cmd_simulate(const std::filesystem::path& config, const Overrides& o, const std::filesystem::path& out_dir,
                 std::ostream& out, std::ostream& err);
int cmd_sweep(const std::filesystem::path& config, const Overrides& o, const std::string& sweep,
              const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace stochavg::cli
