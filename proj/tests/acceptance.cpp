// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Usage: acceptance <path to freqattack executable>

#include "freqattack/cmaes.hpp"
#include "freqattack/dct.hpp"
#include "freqattack/harness.hpp"
#include "freqattack/io.hpp"
#include "freqattack/metrics.hpp"
#include "freqattack/nes.hpp"
#include "freqattack/objective.hpp"
#include "freqattack/pgd.hpp"
#include "freqattack/toy_victims.hpp"
#include "cma_oracle.hpp"
#include "support.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace freqattack;
using namespace freqattack::testing;
namespace fs = std::filesystem;

namespace {

constexpr double kEps = 8.0 / 255.0;
constexpr std::uint64_t kSeeds[] = {1, 2, 3};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "MISSED ") + what;
  }
};

int failures = 0;

void run(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0.0) out.require(seconds < limit_s, fmt::format("runtime {:.1f} s < {} s", seconds, limit_s));
  if (!out.pass) ++failures;
  std::printf("%s criterion %d: %s [%s]\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Attack settings shared by criteria 6, 7 and 10: the 4000-query budget with
// one DC coefficient per 8x8 block.
RunConfig black_box(Method method, std::uint64_t seed) {
  RunConfig cfg;
  cfg.method = method;
  cfg.query_budget = 4000;
  cfg.samples = 40;
  cfg.population = 40;
  cfg.block = 8;
  cfg.low_freq = 1;
  cfg.seed = seed;
  return cfg;
}

struct Comparison {
  ImageSet clean;
  EfficiencyComparison nes;
  EfficiencyComparison cmaes;
};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <freqattack executable>\n");
    return 2;
  }
  const std::string cli = argv[1];

  run(1, "DCT orthonormality, round trip and DC property", 5.0, [] {
    Outcome out;
    double ortho = 0.0;
    for (int n : {2, 4, 8, 16}) {
      const Eigen::MatrixXd c = dct_matrix<double>(n);
      ortho = std::max(ortho, (c * c.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    }
    out.require(ortho <= 1e-12, fmt::format("max |C C^T - I| = {:.2e} <= 1e-12", ortho));

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const DctBasis basis(8);
    double round_trip = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      BlockGrid grid = partition_blocks(ImageSet(1, 8, 8), 8);
      grid.blocks[0] = Plane::NullaryExpr(8, 8, [&] { return dist(gen); });
      const BlockGrid back =
          perturbed_idct(block_dct(grid, basis), FreqPerturbation::zeros(grid.size(), 3), basis);
      round_trip = std::max(round_trip, (back.blocks[0] - grid.blocks[0]).cwiseAbs().maxCoeff());
    }
    out.require(round_trip <= 1e-10, fmt::format("round trip {:.2e} <= 1e-10 over 1000 blocks", round_trip));

    double dc_err = 0.0, rest = 0.0;
    for (int n : {2, 4, 8, 16}) {
      const DctBasis b(n);
      const double v = 0.37;
      const Plane f = b.forward(Plane::Constant(n, n, v));
      dc_err = std::max(dc_err, std::abs(f(0, 0) - n * v));
      Plane others = f;
      others(0, 0) = 0.0;
      rest = std::max(rest, others.cwiseAbs().maxCoeff());
    }
    out.require(dc_err <= 1e-12 && rest <= 1e-12, fmt::format("DC error {:.2e}, other coefficients {:.2e}", dc_err, rest));
    return out;
  });

  run(2, "loss and VJP gradients against central differences", 30.0, [] {
    Outcome out;
    double worst_loss = 0.0, worst_vjp = 0.0;
    for (double lambda : {0.0, 0.05}) {
      const LossConfig cfg{lambda, PerceptualKind::gradient_proxy};
      for (int trial = 0; trial < 100; ++trial) {
        const ImageSet x = random_image(1, 6, 6, 10000 + trial);
        const ImageSet y = random_image(1, 6, 6, 20000 + trial);
        const LossGradient g = adv_loss_grad(x, y, cfg);
        const ImageSet fx = finite_difference([&](const ImageSet& p) { return adv_loss(p, y, cfg); }, x);
        const ImageSet fy = finite_difference([&](const ImageSet& p) { return adv_loss(x, p, cfg); }, y);
        worst_loss = std::max({worst_loss, relative_error(g.reference, fx), relative_error(g.rendered, fy)});
      }
    }
    BlurVictim blur;
    for (int trial = 0; trial < 100; ++trial) {
      const ImageSet x = random_image(1, 6, 6, 30000 + trial);
      const ImageSet up = random_image(1, 6, 6, 40000 + trial, -1.0, 1.0);
      const ImageSet fd =
          finite_difference([&](const ImageSet& p) { return (blur.render(p).data() * up.data()).sum(); }, x, 1e-5);
      worst_vjp = std::max(worst_vjp, relative_error(blur.render_grad(x, up), fd));
    }
    out.require(worst_loss <= 1e-4, fmt::format("loss gradient rel. error {:.2e} <= 1e-4", worst_loss));
    out.require(worst_vjp <= 1e-4, fmt::format("blur VJP rel. error {:.2e} <= 1e-4", worst_vjp));
    return out;
  });

  run(3, "budget guarantee for every method and toy victim at 8/255", 120.0, [] {
    Outcome out;
    const ImageSet clean = smooth_scene(2, 32, 32, 7);
    double min_psnr = std::numeric_limits<double>::infinity(), max_linf = 0.0;
    int runs = 0;
    for (const char* name : {"identity", "black", "blur", "toysplat"}) {
      const auto victim = make_victim(name);
      for (Method method : {Method::whitebox_pgd, Method::nes, Method::cmaes}) {
        if (method == Method::whitebox_pgd && !victim->capabilities().differentiable) continue;
        RunConfig cfg;
        cfg.method = method;
        cfg.iters = method == Method::whitebox_pgd ? 50 : 20;
        cfg.samples = 10;
        cfg.population = 10;
        cfg.seed = 3;
        for (bool dct : {true, false}) {
          cfg.use_dct = dct;
          const AttackResult r = execute_attack(*victim, clean, cfg);
          min_psnr = std::min(min_psnr, psnr(r.adversarial, clean));
          max_linf = std::max(max_linf, max_abs_diff(r.adversarial, clean));
          ++runs;
          if (method == Method::whitebox_pgd) break;
        }
      }
    }
    out.require(min_psnr >= 30.07 - 0.01, fmt::format("min input PSNR {:.3f} dB >= 30.06 over {} runs", min_psnr, runs));
    out.require(max_linf <= kEps + 1e-12, fmt::format("max |adv - clean| = {:.6f} <= 8/255", max_linf));
    return out;
  });

  run(4, "NES estimator quality on the black victim (64x64, M=128, sigma=0.05, n=16, s=1)", 60.0, [] {
    Outcome out;
    const ImageSet x = smooth_scene(1, 64, 64, 1);
    NesConfig cfg;
    cfg.samples = 128;
    cfg.sigma = 0.05;
    cfg.block = 16;
    cfg.low_freq = 1;
    cfg.loss = {0.0, PerceptualKind::gradient_proxy};
    const SearchSpace space = cfg.search_space(1, 64, 64);
    ImageSet analytic = x;
    analytic.data() *= 2.0 / static_cast<double>(x.size());
    const ImageSet truth = project_low_freq(space, analytic);
    BlackVictim black;
    ImageSet average = x.zeros_like();
    double fixed = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      cfg.seed = seed;
      QueryLedger ledger;
      const ImageSet g = nes_gradient(black, x, space, cfg, 0, ledger);
      if (seed == 0) fixed = cosine(g, truth);
      average.data() += g.data();
    }
    const double averaged = cosine(average, truth);
    out.require(fixed >= 0.8, fmt::format("seed 0 cosine {:.4f} >= 0.8", fixed));
    out.require(averaged >= 0.95, fmt::format("50-seed average cosine {:.4f} >= 0.95", averaged));
    return out;
  });

  run(5, "CMA-ES scalar-oracle equivalence and synthetic convergence", 120.0, [] {
    Outcome out;
    double worst = 0.0;
    for (std::uint64_t seed : kSeeds) {
      CmaConfig cfg;
      cfg.population = 8;
      cfg.low_freq = 1;
      CmaState st = cma_init(1, cfg);
      ScalarCma oracle(3, 8, cfg.sigma_init);
      const Eigen::Vector3d target(0.6, -0.3, 0.9);
      for (int t = 0; t < 10; ++t) {
        const CmaSample sample = cma_sample(st, 8, seed);
        std::vector<std::vector<double>> cands(8, std::vector<double>(3));
        std::vector<double> fit(8, 0.0);
        for (int b = 0; b < 8; ++b) {
          for (int i = 0; i < 3; ++i) {
            cands[b][i] = oracle.a[i] + oracle.sigma * std::sqrt(oracle.v[i]) * sample.z[b][i];
            fit[b] -= (cands[b][i] - target[i]) * (cands[b][i] - target[i]);
          }
        }
        std::vector<int> idx(8);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int p, int q) { return fit[p] > fit[q]; });
        oracle.update({cands[idx[0]], cands[idx[1]], cands[idx[2]], cands[idx[3]]});

        std::vector<double> losses;
        for (const auto& c : sample.candidates) losses.push_back(-(c - target).squaredNorm());
        const Ranking r = rank_descending(losses);
        std::vector<Eigen::VectorXd> sel;
        for (int i = 0; i < 4; ++i) sel.push_back(sample.candidates[r.order[i]]);
        st = cma_update(st, sel);
        for (int i = 0; i < 3; ++i) {
          worst = std::max({worst, std::abs(st.mean[i] - oracle.a[i]), std::abs(st.variance[i] - oracle.v[i]),
                            std::abs(st.path_c[i] - oracle.pc[i]), std::abs(st.path_s[i] - oracle.ps[i])});
        }
        worst = std::max(worst, std::abs(st.sigma - oracle.sigma));
      }
    }
    out.require(worst <= 1e-10, fmt::format("max state deviation over 10 generations {:.2e} <= 1e-10", worst));

    double worst_distance = 0.0;
    for (std::uint64_t seed : kSeeds) {
      CmaConfig cfg;
      cfg.population = 40;
      cfg.low_freq = 3;
      const CmaState init = cma_init(4, cfg);
      std::mt19937_64 gen(100 + seed);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      Eigen::VectorXd target(init.dimension());
      for (auto& v : target) v = dist(gen);
      const CmaState fin = cma_maximize(
          init,
          [&](std::span<const Eigen::VectorXd> cands) {
            std::vector<double> f;
            for (const auto& c : cands) f.push_back(-(c - target).squaredNorm());
            return f;
          },
          40, 300, seed);
      worst_distance = std::max(worst_distance, (fin.mean - target).norm());
    }
    out.require(worst_distance <= 0.1, fmt::format("worst L2 distance to optimum after 300 generations {:.2e} <= 0.1", worst_distance));
    return out;
  });

  // Criteria 6, 7 and 10 share the paired DCT/pixel runs.
  ToySplatVictim splat;
  BlurVictim blur;
  std::vector<Comparison> comparisons;
  double shared_seconds = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t seed : kSeeds) {
      Comparison c;
      c.clean = smooth_scene(2, 32, 32, seed);
      c.nes = run_efficiency_compare(splat, c.clean, black_box(Method::nes, seed));
      c.cmaes = run_efficiency_compare(splat, c.clean, black_box(Method::cmaes, seed));
      comparisons.push_back(std::move(c));
    }
    shared_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  const LossConfig loss{};

  run(6, "toy splat attack effectiveness within 4000 queries (NES M=40, CMA-ES B=40)", 0.0, [&] {
    Outcome out;
    for (std::size_t i = 0; i < comparisons.size(); ++i) {
      const Comparison& c = comparisons[i];
      const RenderMetrics before = render_metrics(splat, c.clean, c.clean, loss);
      for (const auto& [name, result] : {std::pair{"nes", &c.nes.dct}, std::pair{"cmaes", &c.cmaes.dct}}) {
        const RenderMetrics after = render_metrics(splat, result->adversarial, c.clean, loss);
        const double ratio = after.loss / before.loss;
        const double drop = before.psnr - after.psnr;
        out.require(result->queries <= 4000 && ratio >= 1.5,
                    std::string(name) + fmt::format(" seed {}: loss x{:.2f} >= 1.5", kSeeds[i], ratio));
        out.require(drop >= 3.0, std::string(name) + fmt::format(" seed {}: rendered PSNR drop {:.2f} dB >= 3", kSeeds[i], drop));
      }
    }
    // Half of the shared runs (the DCT arms) belong to this criterion.
    out.require(shared_seconds / 2.0 < 600.0, fmt::format("runtime {:.1f} s < 600 s", shared_seconds / 2.0));
    return out;
  });

  run(7, "DCT arm beats the pixel arm at 4000 queries in >= 2 of 3 seeds", 0.0, [&] {
    Outcome out;
    int nes_wins = 0, cma_wins = 0;
    for (const Comparison& c : comparisons) {
      nes_wins += c.nes.dct.loss >= c.nes.pixel.loss;
      cma_wins += c.cmaes.dct.loss >= c.cmaes.pixel.loss;
    }
    out.require(nes_wins >= 2, fmt::format("NES DCT wins {}/3", nes_wins));
    out.require(cma_wins >= 2, fmt::format("CMA-ES DCT wins {}/3", cma_wins));
    out.require(shared_seconds < 1200.0, fmt::format("runtime {:.1f} s < 1200 s", shared_seconds));
    return out;
  });

  run(8, "white-box PGD on the blur victim (T=50)", 60.0, [&] {
    Outcome out;
    for (std::uint64_t seed : kSeeds) {
      const ImageSet clean = smooth_scene(2, 32, 32, seed);
      PgdConfig cfg;
      cfg.iters = 50;
      const AttackResult r = pgd_attack(blur, clean, cfg);
      const double clean_loss = adv_loss(clean, blur.render(clean), cfg.loss);
      out.require(r.loss >= 1.2 * clean_loss, fmt::format("seed {}: loss x{:.3f} >= 1.2", seed, r.loss / clean_loss));
    }
    // No regression on rougher inputs either.
    int regressions = 0;
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
      const ImageSet clean = random_image(1, 16, 16, seed);
      const AttackResult r = pgd_attack(blur, clean, PgdConfig{});
      regressions += r.loss < adv_loss(clean, blur.render(clean), LossConfig{});
    }
    out.require(regressions == 0, fmt::format("{} of 10 random inputs end below their clean loss", regressions));
    return out;
  });

  run(9, "CLI determinism: repeated attack commands give identical reports and FIMG files", 0.0, [&] {
    Outcome out;
    const fs::path dir = fs::temp_directory_path() / ("freqattack_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    write_fimg(dir / "scene.fimg", smooth_scene(2, 32, 32, 5));
    const char* commands[] = {
        "--method nes --victim toysplat --iters 5 --samples 8",
        "--method cmaes --victim toysplat --iters 5 --pop 10",
        "--method nes --victim blur --iters 5 --samples 8 --no-dct",
        "--method whitebox-pgd --victim blur --iters 10",
    };
    int index = 0;
    for (const char* args : commands) {
      std::string report[2], fimg[2];
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out_dir = dir / (std::to_string(index) + "_" + std::to_string(rep));
        const std::string command = "FREQATTACK_LOG=off '" + cli + "' attack " + args + " --seed 42 --input '" +
                                    (dir / "scene.fimg").string() + "' --out '" + out_dir.string() + "' > /dev/null";
        if (std::system(command.c_str()) != 0) throw std::runtime_error("command failed: " + command);
        nlohmann::json j = nlohmann::json::parse(slurp(out_dir / "report.json"));
        j.erase("wall_time_s");
        report[rep] = j.dump();
        fimg[rep] = slurp(out_dir / "adversarial.fimg");
      }
      out.require(report[0] == report[1] && fimg[0] == fimg[1] && !fimg[0].empty(), std::string("identical: ") + args);
      ++index;
    }
    fs::remove_all(dir);
    return out;
  });

  run(10, "transfer: crafting-victim degradation >= cross-victim degradation", 0.0, [&] {
    Outcome out;
    for (std::size_t i = 0; i < comparisons.size(); ++i) {
      const Comparison& c = comparisons[i];
      const double seed = kSeeds[i];
      // Crafted on blur with white-box PGD.
      const AttackResult on_blur = pgd_attack(blur, c.clean, PgdConfig{});
      const auto rows_blur = run_transfer({&blur, &splat}, on_blur.adversarial, c.clean, loss);
      out.require(rows_blur[0].loss_increase_pct >= rows_blur[1].loss_increase_pct,
                  fmt::format("seed {} blur-crafted: blur +{:.1f}% vs toysplat +{:.1f}%", seed, rows_blur[0].loss_increase_pct,
                      rows_blur[1].loss_increase_pct));
      // Crafted on the toy splat with CMA-ES (the criterion 6 run).
      const auto rows_splat = run_transfer({&splat, &blur}, c.cmaes.dct.adversarial, c.clean, loss);
      out.require(rows_splat[0].loss_increase_pct >= rows_splat[1].loss_increase_pct,
                  fmt::format("seed {} splat-crafted: toysplat +{:.1f}% vs blur +{:.1f}%", seed, rows_splat[0].loss_increase_pct,
                      rows_splat[1].loss_increase_pct));
    }
    return out;
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
