#include "freqattack/errors.hpp"
#include "freqattack/harness.hpp"
#include "freqattack/io.hpp"
#include "freqattack/metrics.hpp"
#include "freqattack/toy_victims.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace freqattack;
using namespace freqattack::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("freqattack_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_run(Method method, const std::string& victim, const fs::path& input, const fs::path& out) {
  RunConfig cfg;
  cfg.method = method;
  cfg.victim = victim;
  cfg.inputs = {input};
  cfg.out_dir = out;
  cfg.iters = 3;
  cfg.samples = 3;
  cfg.population = 6;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::whitebox_pgd, Method::nes, Method::cmaes}) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("adam"), ConfigError);
}

TEST_CASE("victim specs") {
  CHECK(make_victim("identity")->capabilities().name == "identity");
  CHECK(make_victim("black")->capabilities().name == "black");
  CHECK(make_victim("blur")->capabilities().differentiable);
  CHECK_FALSE(make_victim("toysplat")->capabilities().differentiable);
  CHECK_THROWS_AS(make_victim("resnet"), ConfigError);
  CHECK_THROWS_AS(make_victim("remote:nohost"), ConfigError);
}

TEST_CASE("query budgets map to iteration counts") {
  RunConfig cfg;
  cfg.query_budget = 4000;
  cfg.method = Method::nes;
  CHECK(cfg.effective_iters() == 4000 / 81);
  cfg.method = Method::cmaes;
  CHECK(cfg.effective_iters() == 100);
  cfg.method = Method::whitebox_pgd;
  CHECK(cfg.effective_iters() == 3999);
  cfg.method = Method::cmaes;
  cfg.query_budget = 10;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("real numbers in JSON") {
  CHECK(real_to_json(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isinf(real_from_json("-inf")));
  CHECK(std::isnan(real_from_json(real_to_json(std::nan("")))));
  CHECK(real_from_json(real_to_json(0.1)) == 0.1);
}

TEST_CASE("report JSON round-trips") {
  AttackReport r;
  r.config = {{"method", "nes"}, {"seed", 3}};
  r.seed = 3;
  r.query_count = 81;
  r.loss_trace = {{9, 0.001}, {18, 0.0025}};
  r.clean = {std::numeric_limits<double>::infinity(), 1.0, 0.0};
  r.adversarial = {31.5, std::nullopt, 0.00123456789012345};
  r.input_psnr = 33.1;
  r.input_psnr_quantized = 32.9;
  r.input_linf = 8.0 / 255.0;
  r.wall_time_s = 0.25;
  const std::string text = serialize(r);
  CHECK(report_from_json(nlohmann::json::parse(text)) == r);
  CHECK(serialize(report_from_json(nlohmann::json::parse(text))) == text);
  CHECK(nlohmann::json::parse(text).at("report_version") == 1);
  CHECK(trace_csv(r.loss_trace).starts_with("query,loss\n9,"));
}

TEST_CASE("percent change") {
  CHECK(percent_change(2.0, 3.0) == doctest::Approx(50.0));
  CHECK(percent_change(4.0, 3.0) == doctest::Approx(-25.0));
  CHECK(percent_change(1.5, 1.5) == 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(percent_change(inf, inf) == 0.0);
  CHECK(percent_change(inf, 30.0) == -100.0);
  CHECK(percent_change(0.0, 0.5) == inf);
}

TEST_CASE("evaluate: adversarial equal to clean shows no degradation") {
  const ImageSet clean = smooth_scene(2, 16, 16, 1);
  for (const char* name : {"identity", "black", "blur", "toysplat"}) {
    const auto victim = make_victim(name);
    const EvalRow row = evaluate(*victim, clean, clean, {});
    CHECK(row.psnr_drop_pct == 0.0);
    CHECK(row.loss_increase_pct == 0.0);
    CHECK(std::isinf(row.input_psnr));
  }
  CHECK_THROWS_AS(evaluate(BlurVictim(), ImageSet(1, 16, 16), clean, {}), ShapeMismatch);
}

TEST_CASE("evaluate: budget bound on input PSNR") {
  const ImageSet clean = random_image(1, 16, 16, 2, 0.1, 0.9);
  ImageSet adv = clean;
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> coin(0, 1);
  for (Eigen::Index i = 0; i < adv.size(); ++i) adv.data()[i] += coin(gen) ? 8.0 / 255.0 : -8.0 / 255.0;
  CHECK(evaluate(BlurVictim(), adv, clean, {}).input_psnr >= 30.07 - 0.01);
}

TEST_CASE("transfer needs two victims and leaves identity untouched") {
  const ImageSet clean = smooth_scene(2, 16, 16, 4);
  ImageSet adv = clean;
  adv.data() += 4.0 / 255.0;
  IdentityVictim id;
  BlurVictim blur;
  CHECK_THROWS_AS(run_transfer({&blur}, adv, clean, {}), ConfigError);
  const auto rows = run_transfer({&id, &blur}, adv, clean, {});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].victim == "identity");
  CHECK(rows[0].loss_increase_pct == 0.0);
  CHECK(rows[0].adversarial.loss == 0.0);
  CHECK(rows[1].victim == "blur");
}

TEST_CASE("efficiency comparison writes one row per generation per arm") {
  const ImageSet clean = smooth_scene(1, 16, 16, 5);
  RunConfig cfg;
  cfg.method = Method::cmaes;
  cfg.population = 6;
  cfg.iters = 4;
  const EfficiencyComparison cmp = run_efficiency_compare(IdentityVictim(), clean, cfg);
  std::istringstream lines(cmp.csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "arm,generation,query,loss,best_loss");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.ends_with(",0,0"));
  }
  CHECK(rows == 2 * 4);
  CHECK(cmp.dct.loss == 0.0);
  CHECK(cmp.pixel.loss == 0.0);

  cfg.method = Method::whitebox_pgd;
  CHECK_THROWS_AS(run_efficiency_compare(BlurVictim(), clean, cfg), ConfigError);
}

TEST_CASE("run_attack writes its artifacts deterministically") {
  TempDir dir;
  const fs::path input = dir.path / "scene.fimg";
  write_fimg(input, smooth_scene(2, 16, 16, 6));

  for (Method method : {Method::nes, Method::cmaes, Method::whitebox_pgd}) {
    const std::string victim = method == Method::whitebox_pgd ? "blur" : "toysplat";
    const fs::path a = dir.path / (to_string(method) + "_a");
    const fs::path b = dir.path / (to_string(method) + "_b");
    const AttackReport ra = run_attack(small_run(method, victim, input, a));
    const AttackReport rb = run_attack(small_run(method, victim, input, b));
    for (const char* file : {"adv_0.png", "adv_1.png", "clean_render_0.png", "adv_render_1.png", "trace.csv"}) {
      CHECK(fs::exists(a / file));
    }
    CHECK(slurp(a / "adversarial.fimg") == slurp(b / "adversarial.fimg"));
    AttackReport ca = ra, cb = rb;
    ca.wall_time_s = cb.wall_time_s = 0.0;
    CHECK(serialize(ca) == serialize(cb));
    CHECK(report_from_json(nlohmann::json::parse(slurp(a / "report.json"))) == ra);

    // Emitted PNGs stay within one quantisation step of the budget.
    const ImageSet clean = read_fimg(input);
    const ImageSet png = load_views({a / "adv_0.png", a / "adv_1.png"});
    CHECK(max_abs_diff(png, clean) <= 8.0 / 255.0 + 1.0 / 255.0);
  }
}

TEST_CASE("run_attack refuses white-box PGD on a black-box victim") {
  TempDir dir;
  const fs::path input = dir.path / "scene.fimg";
  write_fimg(input, smooth_scene(1, 16, 16, 7));
  CHECK_THROWS_AS(run_attack(small_run(Method::whitebox_pgd, "toysplat", input, dir.path / "out")), ConfigError);
}

TEST_CASE("identity victim attack reports zero losses") {
  TempDir dir;
  const fs::path input = dir.path / "scene.fimg";
  write_fimg(input, smooth_scene(1, 16, 16, 8));
  const AttackReport r = run_attack(small_run(Method::nes, "identity", input, dir.path / "out"));
  for (const auto& p : r.loss_trace) CHECK(p.loss == 0.0);
  CHECK(r.adversarial.loss == 0.0);
  CHECK(r.query_count == 3 * 7);
}

TEST_CASE("image files round-trip") {
  TempDir dir;
  const ImageSet x = random_image(3, 5, 7, 9);
  write_fimg(dir.path / "x.fimg", x);
  CHECK(read_fimg(dir.path / "x.fimg") == x);
  CHECK(slurp(dir.path / "x.fimg").starts_with("FIMG v1 3 5 7\n"));
  write_png(dir.path / "x.png", x, 1);
  ImageSet view1(1, 5, 7);
  view1.data() = x.data().segment(x.view_size(), x.view_size());
  CHECK(read_png(dir.path / "x.png") == quantize_8bit(view1));
  CHECK_THROWS_AS(read_png(dir.path / "missing.png"), IoError);
  std::ofstream(dir.path / "bad.fimg") << "FIMG v1 1 2 2\nshort";
  CHECK_THROWS_AS(read_fimg(dir.path / "bad.fimg"), IoError);
}
