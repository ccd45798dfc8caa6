#include "freqattack/harness.hpp"

#include "freqattack/cmaes.hpp"
#include "freqattack/errors.hpp"
#include "freqattack/io.hpp"
#include "freqattack/metrics.hpp"
#include "freqattack/nes.hpp"
#include "freqattack/pgd.hpp"
#include "freqattack/remote.hpp"
#include "freqattack/toy_victims.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace freqattack {

std::string to_string(Method method) {
  switch (method) {
    case Method::whitebox_pgd:
      return "whitebox-pgd";
    case Method::nes:
      return "nes";
    case Method::cmaes:
      return "cmaes";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "whitebox-pgd") return Method::whitebox_pgd;
  if (name == "nes") return Method::nes;
  if (name == "cmaes") return Method::cmaes;
  throw ConfigError("unknown method '" + name + "' (expected whitebox-pgd, nes or cmaes)");
}

void RunConfig::validate() const {
  if (epsilon_255 < 0) throw ConfigError("--epsilon-255 must be non-negative");
  if (eta_255 < 1) throw ConfigError("--eta-255 must be positive");
  if (iters < 1) throw ConfigError("--iters must be positive");
  if (lambda < 0.0) throw ConfigError("--lambda must be non-negative");
  if (sigma && !(*sigma > 0.0)) throw ConfigError("--sigma must be positive");
  if (method == Method::whitebox_pgd && eta_255 > epsilon_255) {
    throw ConfigError("white-box PGD needs eta <= epsilon");
  }
  if (query_budget && effective_iters() < 1) throw ConfigError("query budget is smaller than one iteration");
}

int RunConfig::effective_iters() const {
  if (!query_budget) return iters;
  std::uint64_t per_iter = 1;
  std::uint64_t fixed = 0;
  switch (method) {
    case Method::whitebox_pgd:
      fixed = 1;  // the clean-input evaluation
      break;
    case Method::nes:
      per_iter = 2 * static_cast<std::uint64_t>(samples) + (keep_best ? 1 : 0);
      break;
    case Method::cmaes:
      per_iter = static_cast<std::uint64_t>(population);
      break;
  }
  if (*query_budget < fixed + per_iter) return 0;
  return static_cast<int>((*query_budget - fixed) / per_iter);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json inputs_json = nlohmann::json::array();
  for (const auto& p : inputs) inputs_json.push_back(p.string());
  return {{"method", to_string(method)},
          {"victim", victim},
          {"inputs", std::move(inputs_json)},
          {"epsilon_255", epsilon_255},
          {"eta_255", eta_255},
          {"iters", effective_iters()},
          {"query_budget", query_budget ? nlohmann::json(*query_budget) : nlohmann::json()},
          {"samples", samples},
          {"population", population},
          {"block_size", block},
          {"low_freq", low_freq},
          {"lambda", lambda},
          {"sigma", sigma ? nlohmann::json(*sigma) : nlohmann::json()},
          {"seed", seed},
          {"use_dct", use_dct},
          {"keep_best", keep_best}};
}

std::unique_ptr<Victim> make_victim(const std::string& spec, int timeout_ms) {
  if (spec == "identity") return std::make_unique<IdentityVictim>();
  if (spec == "black") return std::make_unique<BlackVictim>();
  if (spec == "blur") return std::make_unique<BlurVictim>();
  if (spec == "toysplat") return std::make_unique<ToySplatVictim>();
  if (spec.starts_with("remote:")) return RemoteVictim::connect(spec.substr(7), timeout_ms);
  if (spec.starts_with("remote-exec:")) return RemoteVictim::spawn(spec.substr(12), timeout_ms);
  throw ConfigError("unknown victim '" + spec + "' (expected identity, black, blur, toysplat or remote:<host:port>)");
}

AttackResult execute_attack(const Victim& victim, const ImageSet& clean, const RunConfig& cfg) {
  cfg.validate();
  const int iters = cfg.effective_iters();
  switch (cfg.method) {
    case Method::whitebox_pgd: {
      PgdConfig pgd;
      pgd.epsilon = cfg.epsilon();
      pgd.eta = cfg.eta();
      pgd.iters = iters;
      pgd.loss = cfg.loss();
      pgd.keep_best = cfg.keep_best;
      return pgd_attack(victim, clean, pgd);
    }
    case Method::nes: {
      NesConfig nes;
      nes.samples = cfg.samples;
      nes.sigma = cfg.sigma.value_or(NesConfig{}.sigma);
      nes.block = cfg.block;
      nes.low_freq = cfg.low_freq;
      nes.epsilon = cfg.epsilon();
      nes.eta = cfg.eta();
      nes.iters = iters;
      nes.loss = cfg.loss();
      nes.seed = cfg.seed;
      nes.keep_best = cfg.keep_best;
      nes.use_dct = cfg.use_dct;
      return nes_pgd_attack(victim, clean, nes);
    }
    case Method::cmaes: {
      CmaConfig cma;
      cma.population = cfg.population;
      cma.sigma_init = cfg.sigma.value_or(CmaConfig{}.sigma_init);
      cma.block = cfg.block;
      cma.low_freq = cfg.low_freq;
      cma.epsilon = cfg.epsilon();
      cma.iters = iters;
      cma.loss = cfg.loss();
      cma.seed = cfg.seed;
      cma.keep_best = cfg.keep_best;
      cma.use_dct = cfg.use_dct;
      return cmaes_attack(victim, clean, cma);
    }
  }
  throw ConfigError("unknown method");
}

RenderMetrics render_metrics(const Victim& victim, const ImageSet& input, const ImageSet& clean,
                             const LossConfig& loss) {
  const ImageSet rendered = victim.render(input);
  RenderMetrics m;
  m.psnr = psnr(rendered, clean);
  try {
    m.ssim = ssim(rendered, clean);
  } catch (const WindowError&) {
    m.ssim.reset();
  }
  m.loss = adv_loss(input, rendered, loss);
  return m;
}

AttackRun attack_and_report(const Victim& victim, const ImageSet& clean, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  AttackRun run{execute_attack(victim, clean, cfg), {}};
  const auto stop = std::chrono::steady_clock::now();

  AttackReport& r = run.report;
  r.config = cfg.to_json();
  r.seed = cfg.seed;
  r.query_count = run.result.queries;
  r.loss_trace = run.result.trace;
  r.clean = render_metrics(victim, clean, clean, cfg.loss());
  r.adversarial = render_metrics(victim, run.result.adversarial, clean, cfg.loss());
  r.input_psnr = psnr(run.result.adversarial, clean);
  r.input_psnr_quantized = psnr(quantize_8bit(run.result.adversarial), clean);
  r.input_linf = max_abs_diff(run.result.adversarial, clean);
  r.wall_time_s = std::chrono::duration<double>(stop - start).count();
  return run;
}

AttackReport run_attack(const RunConfig& cfg) {
  cfg.validate();
  const ImageSet clean = load_views(cfg.inputs);
  if (!clean.in_unit_range()) throw ConfigError("input pixels must lie in [0,1]");
  const std::unique_ptr<Victim> victim = make_victim(cfg.victim, cfg.remote_timeout_ms);
  if (cfg.method == Method::whitebox_pgd && !victim->capabilities().differentiable) {
    throw ConfigError("victim '" + victim->capabilities().name + "' is not differentiable; white-box PGD needs gradients");
  }
  spdlog::info("{} attack on {} ({} views, {}x{}), {} iterations", to_string(cfg.method), victim->capabilities().name,
               clean.views(), clean.height(), clean.width(), cfg.effective_iters());

  AttackRun run = attack_and_report(*victim, clean, cfg);
  spdlog::info("done: {} queries, self-render loss {:.6g} -> {:.6g}", run.report.query_count, run.report.clean.loss,
               run.report.adversarial.loss);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());

  const ImageSet clean_render = victim->render(clean);
  const ImageSet adv_render = victim->render(run.result.adversarial);
  for (int v = 0; v < clean.views(); ++v) {
    write_png(cfg.out_dir / ("adv_" + std::to_string(v) + ".png"), run.result.adversarial, v);
    write_png(cfg.out_dir / ("clean_render_" + std::to_string(v) + ".png"), clean_render, v);
    write_png(cfg.out_dir / ("adv_render_" + std::to_string(v) + ".png"), adv_render, v);
  }
  write_fimg(cfg.out_dir / "adversarial.fimg", run.result.adversarial);
  write_file_atomic(cfg.out_dir / "report.json", serialize(run.report));
  write_file_atomic(cfg.out_dir / "trace.csv", trace_csv(run.report.loss_trace));
  return run.report;
}

double percent_change(double before, double after) {
  if (before == after) return 0.0;
  const double direction = after > before ? 1.0 : -1.0;
  // A finite value reached from +-inf counts as a complete (100%) change.
  if (std::isinf(before)) return 100.0 * direction;
  if (before == 0.0) return direction * std::numeric_limits<double>::infinity();
  return 100.0 * (after - before) / std::abs(before);
}

nlohmann::json EvalRow::to_json() const {
  auto metrics = [](const RenderMetrics& m) {
    return nlohmann::json{{"psnr", real_to_json(m.psnr)},
                          {"ssim", m.ssim ? real_to_json(*m.ssim) : nlohmann::json()},
                          {"loss", real_to_json(m.loss)}};
  };
  return {{"victim", victim},
          {"clean", metrics(clean)},
          {"adversarial", metrics(adversarial)},
          {"psnr_drop_pct", real_to_json(psnr_drop_pct)},
          {"ssim_drop_pct", ssim_drop_pct ? real_to_json(*ssim_drop_pct) : nlohmann::json()},
          {"loss_increase_pct", real_to_json(loss_increase_pct)},
          {"input_psnr", real_to_json(input_psnr)}};
}

EvalRow evaluate(const Victim& victim, const ImageSet& adv, const ImageSet& clean, const LossConfig& loss) {
  require_same_shape(adv, clean, "evaluate");
  EvalRow row;
  row.victim = victim.capabilities().name;
  row.clean = render_metrics(victim, clean, clean, loss);
  row.adversarial = render_metrics(victim, adv, clean, loss);
  row.psnr_drop_pct = -percent_change(row.clean.psnr, row.adversarial.psnr);
  if (row.clean.ssim && row.adversarial.ssim) row.ssim_drop_pct = -percent_change(*row.clean.ssim, *row.adversarial.ssim);
  row.loss_increase_pct = percent_change(row.clean.loss, row.adversarial.loss);
  row.input_psnr = psnr(adv, clean);
  return row;
}

std::vector<EvalRow> run_transfer(const std::vector<const Victim*>& victims, const ImageSet& adv,
                                  const ImageSet& clean, const LossConfig& loss) {
  if (victims.size() < 2) throw ConfigError("transfer evaluation needs at least two victims");
  std::vector<EvalRow> rows;
  for (const Victim* v : victims) rows.push_back(evaluate(*v, adv, clean, loss));
  return rows;
}

EfficiencyComparison run_efficiency_compare(const Victim& victim, const ImageSet& clean, RunConfig cfg) {
  if (cfg.method == Method::whitebox_pgd) throw ConfigError("the efficiency comparison needs a black-box method");
  cfg.keep_best = true;

  EfficiencyComparison out;
  cfg.use_dct = true;
  out.dct = execute_attack(victim, clean, cfg);
  cfg.use_dct = false;
  out.pixel = execute_attack(victim, clean, cfg);

  std::ostringstream csv;
  csv << std::setprecision(17) << "arm,generation,query,loss,best_loss\n";
  auto rows = [&](const char* arm, const AttackResult& r) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < r.trace.size(); ++g) {
      best = std::max(best, r.trace[g].loss);
      csv << arm << ',' << g << ',' << r.trace[g].query << ',' << r.trace[g].loss << ',' << best << '\n';
    }
  };
  rows("dct", out.dct);
  rows("pixel", out.pixel);
  out.csv = csv.str();

  cfg.use_dct = true;
  out.summary = {{"config", cfg.to_json()},
                 {"dct", {{"final_loss", real_to_json(out.dct.loss)}, {"queries", out.dct.queries}}},
                 {"pixel", {{"final_loss", real_to_json(out.pixel.loss)}, {"queries", out.pixel.queries}}}};
  return out;
}

}  // namespace freqattack
