#include "freqattack/report.hpp"

#include "freqattack/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace freqattack {
namespace {

nlohmann::json metrics_to_json(const RenderMetrics& m) {
  return {{"psnr", real_to_json(m.psnr)},
          {"ssim", m.ssim ? real_to_json(*m.ssim) : nlohmann::json()},
          {"loss", real_to_json(m.loss)}};
}

RenderMetrics metrics_from_json(const nlohmann::json& j) {
  RenderMetrics m;
  m.psnr = real_from_json(j.at("psnr"));
  if (!j.at("ssim").is_null()) m.ssim = real_from_json(j.at("ssim"));
  m.loss = real_from_json(j.at("loss"));
  return m;
}

}  // namespace

nlohmann::json real_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError("bad real value '" + s + "' in report");
  }
  return j.get<double>();
}

nlohmann::json to_json(const AttackReport& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const TracePoint& p : r.loss_trace) trace.push_back({p.query, real_to_json(p.loss)});
  return {{"report_version", AttackReport::kVersion},
          {"config", r.config},
          {"seed", r.seed},
          {"query_count", r.query_count},
          {"loss_trace", std::move(trace)},
          {"clean", metrics_to_json(r.clean)},
          {"adversarial", metrics_to_json(r.adversarial)},
          {"input_psnr", real_to_json(r.input_psnr)},
          {"input_psnr_quantized", real_to_json(r.input_psnr_quantized)},
          {"input_linf", real_to_json(r.input_linf)},
          {"wall_time_s", r.wall_time_s}};
}

AttackReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("report_version").get<int>() != AttackReport::kVersion) throw ConfigError("unsupported report version");
    AttackReport r;
    r.config = j.at("config");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.query_count = j.at("query_count").get<std::uint64_t>();
    for (const auto& p : j.at("loss_trace")) r.loss_trace.push_back({p.at(0).get<std::uint64_t>(), real_from_json(p.at(1))});
    r.clean = metrics_from_json(j.at("clean"));
    r.adversarial = metrics_from_json(j.at("adversarial"));
    r.input_psnr = real_from_json(j.at("input_psnr"));
    r.input_psnr_quantized = real_from_json(j.at("input_psnr_quantized"));
    r.input_linf = real_from_json(j.at("input_linf"));
    r.wall_time_s = j.at("wall_time_s").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string serialize(const AttackReport& report) { return to_json(report).dump(2) + "\n"; }

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "query,loss\n";
  for (const TracePoint& p : trace) out << p.query << ',' << p.loss << '\n';
  return out.str();
}

}  // namespace freqattack
