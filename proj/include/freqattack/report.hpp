#pragma once

#include "freqattack/victim.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace freqattack {

/// Rendered-output quality against the clean reference plus the
/// self-consistency loss adv_loss(x, render(x)).
struct RenderMetrics {
  double psnr = 0.0;  // may be +inf
  std::optional<double> ssim;  // absent when the image is smaller than the SSIM window
  double loss = 0.0;

  bool operator==(const RenderMetrics&) const = default;
};

struct AttackReport {
  static constexpr int kVersion = 1;

  nlohmann::json config;  // echo of the run configuration
  std::uint64_t seed = 0;
  std::uint64_t query_count = 0;
  std::vector<TracePoint> loss_trace;
  RenderMetrics clean;
  RenderMetrics adversarial;
  double input_psnr = 0.0;  // PSNR(adv, clean) before quantisation
  double input_psnr_quantized = 0.0;  // after 8-bit quantisation of adv
  double input_linf = 0.0;
  double wall_time_s = 0.0;

  bool operator==(const AttackReport&) const = default;
};

/// Non-finite reals are written as the strings "inf", "-inf" and "nan".
nlohmann::json real_to_json(double x);
double real_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AttackReport& report);
AttackReport report_from_json(const nlohmann::json& j);

/// Pretty JSON with a trailing newline; byte-stable for equal reports.
std::string serialize(const AttackReport& report);

/// "query,loss" rows.
std::string trace_csv(const std::vector<TracePoint>& trace);

}  // namespace freqattack
