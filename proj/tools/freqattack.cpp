#include "freqattack/errors.hpp"
#include "freqattack/harness.hpp"
#include "freqattack/io.hpp"
#include "freqattack/protocol.hpp"
#include "freqattack/victim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace freqattack;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kIo = 3, kVictim = 4 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("freqattack");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("FREQATTACK_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

/// Flags shared by the attack and efficiency subcommands.
void add_attack_options(CLI::App& app, RunConfig& cfg, std::string& method, std::string& remote) {
  app.add_option("--method", method, "whitebox-pgd, nes or cmaes")->capture_default_str();
  app.add_option("--victim", cfg.victim, "identity, black, blur, toysplat, remote:<host:port> or remote-exec:<cmd>")
      ->capture_default_str();
  app.add_option("--remote", remote, "host:port of an AVSP v1 victim server (overrides --victim)");
  app.add_option("--input", cfg.inputs, "input views (PNG files or one .fimg)")->required();
  app.add_option("--out", cfg.out_dir, "output directory")->required();
  app.add_option("--epsilon-255", cfg.epsilon_255, "L-infinity budget in 1/255 units")->capture_default_str();
  app.add_option("--eta-255", cfg.eta_255, "sign step size in 1/255 units")->capture_default_str();
  app.add_option("--iters", cfg.iters, "iterations or generations")->capture_default_str();
  app.add_option("--query-budget", cfg.query_budget, "cap on victim queries; sets the iteration count");
  app.add_option("--samples", cfg.samples, "NES antithetic pairs M")->capture_default_str();
  app.add_option("--pop", cfg.population, "CMA-ES population B")->capture_default_str();
  app.add_option("--block-size", cfg.block, "DCT block side n")->capture_default_str();
  app.add_option("--low-freq", cfg.low_freq, "low-frequency side s")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "perceptual term weight")->capture_default_str();
  app.add_option("--sigma", cfg.sigma, "NES search deviation or CMA-ES initial step size");
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_flag("--no-dct", [&cfg](std::int64_t) { cfg.use_dct = false; }, "search raw pixels instead of DCT coefficients");
  app.add_flag("--no-keep-best", [&cfg](std::int64_t) { cfg.keep_best = false; }, "return the final iterate");
  app.add_option("--timeout-ms", cfg.remote_timeout_ms, "remote victim timeout")->capture_default_str();
}

void finish_config(RunConfig& cfg, const std::string& method, const std::string& remote) {
  cfg.method = parse_method(method);
  if (!remote.empty()) cfg.victim = "remote:" + remote;
  cfg.validate();
}

std::vector<std::string> victim_specs(std::vector<std::string> victims, const std::string& remote) {
  if (!remote.empty()) victims.push_back("remote:" + remote);
  return victims;
}

void write_json(const nlohmann::json& j, const fs::path& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

/// AVSP server for the in-process victims, on stdin/stdout or one TCP
/// connection at a time.
void serve_victim(const std::string& name, bool use_stdio, int port) {
  const std::unique_ptr<Victim> victim = make_victim(name);
  if (use_stdio) {
    avsp::FdStream stream(::dup(STDIN_FILENO), ::dup(STDOUT_FILENO), 0);
    avsp::serve(stream, *victim);
    return;
  }
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw RemoteError("socket failed");
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listener, 4) != 0) {
    ::close(listener);
    throw RemoteError("cannot listen on port " + std::to_string(port));
  }
  spdlog::info("serving {} on 127.0.0.1:{}", victim->capabilities().name, port);
  for (;;) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    avsp::FdStream stream(fd, fd, 0);
    try {
      avsp::serve(stream, *victim);
    } catch (const RemoteError& e) {
      spdlog::warn("connection dropped: {}", e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  setup_logging();

  CLI::App app{"Frequency-domain black-box attacks on image-to-image reconstruction models"};
  app.require_subcommand(1);

  RunConfig attack_cfg;
  std::string attack_method = "nes";
  std::string attack_remote;
  CLI::App* attack = app.add_subcommand("attack", "run one attack and write images, report.json and trace.csv");
  add_attack_options(*attack, attack_cfg, attack_method, attack_remote);

  RunConfig eff_cfg;
  eff_cfg.method = Method::cmaes;
  std::string eff_method = "cmaes";
  std::string eff_remote;
  CLI::App* efficiency =
      app.add_subcommand("efficiency", "run a black-box method with and without the DCT parameterisation");
  add_attack_options(*efficiency, eff_cfg, eff_method, eff_remote);

  std::vector<fs::path> eval_adv, eval_clean;
  std::vector<std::string> eval_victims = {"toysplat"};
  std::string eval_remote;
  double eval_lambda = 0.05;
  fs::path eval_out;
  CLI::App* eval = app.add_subcommand("eval", "render adversarial and clean views through one victim");
  CLI::App* transfer = app.add_subcommand("transfer", "evaluate one adversarial set against several victims");
  for (CLI::App* sub : {eval, transfer}) {
    sub->add_option("--adv", eval_adv, "adversarial views (PNG files or one .fimg)")->required();
    sub->add_option("--input", eval_clean, "clean views")->required();
    sub->add_option("--victim", eval_victims, "victim spec")->capture_default_str();
    sub->add_option("--remote", eval_remote, "host:port of an AVSP v1 victim server");
    sub->add_option("--lambda", eval_lambda, "perceptual term weight")->capture_default_str();
    sub->add_option("--out", eval_out, "write the JSON table here instead of stdout");
  }

  std::string serve_name = "identity";
  bool serve_stdio = false;
  int serve_port = 0;
  CLI::App* serve = app.add_subcommand("serve", "serve an in-process victim over AVSP v1");
  serve->add_option("--victim", serve_name, "identity, black, blur or toysplat")->capture_default_str();
  serve->add_flag("--stdio", serve_stdio, "speak the protocol on stdin/stdout");
  serve->add_option("--port", serve_port, "TCP port on 127.0.0.1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*attack) {
      finish_config(attack_cfg, attack_method, attack_remote);
      const AttackReport report = run_attack(attack_cfg);
      std::cout << (attack_cfg.out_dir / "report.json").string() << "\n";
      spdlog::info("input PSNR {:.2f} dB, rendered PSNR {:.2f} -> {:.2f} dB", report.input_psnr, report.clean.psnr,
                   report.adversarial.psnr);
    } else if (*efficiency) {
      finish_config(eff_cfg, eff_method, eff_remote);
      const ImageSet clean = load_views(eff_cfg.inputs);
      const auto victim = make_victim(eff_cfg.victim, eff_cfg.remote_timeout_ms);
      const EfficiencyComparison cmp = run_efficiency_compare(*victim, clean, eff_cfg);
      std::error_code ec;
      fs::create_directories(eff_cfg.out_dir, ec);
      if (ec) throw IoError("cannot create " + eff_cfg.out_dir.string() + ": " + ec.message());
      write_file_atomic(eff_cfg.out_dir / "efficiency.csv", cmp.csv);
      write_json(cmp.summary, eff_cfg.out_dir / "efficiency.json");
      spdlog::info("final loss: dct {:.6g}, pixel {:.6g}", cmp.dct.loss, cmp.pixel.loss);
    } else if (*eval || *transfer) {
      const ImageSet adv = load_views(eval_adv);
      const ImageSet clean = load_views(eval_clean);
      if (adv.views() != clean.views()) throw ConfigError("--adv and --input must hold the same number of views");
      const LossConfig loss{eval_lambda, PerceptualKind::gradient_proxy};
      const std::vector<std::string> specs = victim_specs(eval_victims, eval_remote);
      std::vector<std::unique_ptr<Victim>> owned;
      std::vector<const Victim*> victims;
      for (const auto& spec : specs) {
        owned.push_back(make_victim(spec));
        victims.push_back(owned.back().get());
      }
      nlohmann::json table = nlohmann::json::array();
      if (*eval) {
        if (victims.size() != 1) throw ConfigError("eval takes exactly one victim; use transfer for several");
        table.push_back(evaluate(*victims.front(), adv, clean, loss).to_json());
      } else {
        for (const EvalRow& row : run_transfer(victims, adv, clean, loss)) table.push_back(row.to_json());
      }
      write_json(table, eval_out);
    } else if (*serve) {
      if (serve_stdio == (serve_port > 0)) throw ConfigError("serve needs exactly one of --stdio or --port");
      serve_victim(serve_name, serve_stdio, serve_port);
    }
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kIo;
  } catch (const RemoteError& e) {
    spdlog::error("{}", e.what());
    return kVictim;
  } catch (const TimeoutError& e) {
    spdlog::error("{}", e.what());
    return kVictim;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kConfig;
  }
  return kOk;
}
