#pragma once

#include "freqattack/attack.hpp"
#include "freqattack/objective.hpp"
#include "freqattack/report.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace freqattack {

enum class Method { whitebox_pgd, nes, cmaes };

std::string to_string(Method method);
/// "whitebox-pgd", "nes" or "cmaes"; throws ConfigError otherwise.
Method parse_method(const std::string& name);

/// One experiment as given on the command line. Budgets are integers in
/// units of 1/255.
struct RunConfig {
  Method method = Method::nes;
  std::string victim = "toysplat";
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path out_dir;
  int epsilon_255 = 8;
  int eta_255 = 2;
  int iters = 10000;
  /// When set, iters is replaced by the largest count whose queries fit.
  std::optional<std::uint64_t> query_budget;
  int samples = 40;
  int population = 40;
  int block = 8;
  int low_freq = 3;
  double lambda = 0.05;
  /// NES search deviation or CMA-ES initial step; method default when unset.
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  bool use_dct = true;
  bool keep_best = true;
  int remote_timeout_ms = 30000;

  double epsilon() const { return epsilon_255 / 255.0; }
  double eta() const { return eta_255 / 255.0; }
  LossConfig loss() const { return {lambda, PerceptualKind::gradient_proxy}; }
  /// Throws ConfigError on invalid combinations.
  void validate() const;
  /// Iterations after applying query_budget.
  int effective_iters() const;
  nlohmann::json to_json() const;
};

/// identity | black | blur | toysplat | remote:<host:port> |
/// remote-exec:<shell command>. Throws ConfigError for unknown names.
std::unique_ptr<Victim> make_victim(const std::string& spec, int timeout_ms = 30000);

/// Runs the configured attack in memory.
AttackResult execute_attack(const Victim& victim, const ImageSet& clean, const RunConfig& cfg);

RenderMetrics render_metrics(const Victim& victim, const ImageSet& input, const ImageSet& clean,
                             const LossConfig& loss);

struct AttackRun {
  AttackResult result;
  AttackReport report;
};

/// execute_attack plus metrics; wall time is measured around the attack.
AttackRun attack_and_report(const Victim& victim, const ImageSet& clean, const RunConfig& cfg);

/// Loads inputs, runs, and writes into cfg.out_dir: adv_<i>.png,
/// clean_render_<i>.png, adv_render_<i>.png, adversarial.fimg, report.json,
/// trace.csv.
AttackReport run_attack(const RunConfig& cfg);

/// Relative change with 0 for equal values (including two infinities).
double percent_change(double before, double after);

struct EvalRow {
  std::string victim;
  RenderMetrics clean;
  RenderMetrics adversarial;
  double psnr_drop_pct = 0.0;
  std::optional<double> ssim_drop_pct;
  double loss_increase_pct = 0.0;
  double input_psnr = 0.0;

  nlohmann::json to_json() const;
};

EvalRow evaluate(const Victim& victim, const ImageSet& adv, const ImageSet& clean, const LossConfig& loss);

/// One row per victim for the same adversarial set. Needs two or more
/// victims.
std::vector<EvalRow> run_transfer(const std::vector<const Victim*>& victims, const ImageSet& adv,
                                  const ImageSet& clean, const LossConfig& loss);

struct EfficiencyComparison {
  AttackResult dct;
  AttackResult pixel;
  /// arm,generation,query,loss,best_loss; one row per generation per arm.
  std::string csv;
  nlohmann::json summary;
};

/// The configured black-box method twice with the same seed and budget:
/// low-frequency DCT coordinates, then raw pixels. Both arms evaluate every
/// generation, so keep_best is forced on.
EfficiencyComparison run_efficiency_compare(const Victim& victim, const ImageSet& clean, RunConfig cfg);

}  // namespace freqattack
