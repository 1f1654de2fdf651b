// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset, e.g. `acceptance 1 3`.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "volgs/appearance.hpp"
#include "volgs/cli.hpp"
#include "volgs/geometry.hpp"
#include "volgs/io/checkpoint.hpp"
#include "volgs/toy.hpp"

namespace fs = std::filesystem;
using namespace volgs;
using volgs::testing::RandomSceneOptions;
using volgs::testing::random_scene;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const BasisFamily kGradientFamilies[] = {BasisFamily::gaussian, BasisFamily::wendland,
                                         BasisFamily::inv_quadratic};

// Truncation jumps scale with sigma_eps, so keep it small; inverse quadratic
// decays slowly and needs a larger value to keep its support finite.
double gradient_sigma_eps(BasisFamily f) {
  return f == BasisFamily::inv_quadratic ? 1e-2 : 1e-6;
}

Outcome gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::set<ParamGroup> groups_checked;
  std::size_t checked = 0;
  std::vector<std::string> failures;
  for (int s = 0; s < 25; ++s) {
    const BasisFamily family = kGradientFamilies[s % 3];
    RandomSceneOptions o;
    o.family = family;
    o.sigma_eps = gradient_sigma_eps(family);
    const std::size_t n = 1 + std::uniform_int_distribution<std::size_t>(0, 19)(rng);
    const Scene scene = random_scene(rng, n, o);
    const testing::GradientFixture fx = testing::gradient_fixture(rng, 8);
    const GradientBuffer g = fx.gradients_of(scene);
    // Check every parameter of up to three primitives that the rays see.
    std::vector<std::size_t> prims;
    for (std::size_t i = 0; i < n && prims.size() < 3; ++i) {
      if (g.visible[i]) prims.push_back(i);
    }
    for (const auto& m : testing::compare_gradients(fx, scene, prims)) {
      std::ostringstream msg;
      msg << "scene " << s << " (" << to_string(family) << ") prim " << m.primitive << ' '
          << to_string(param_group_of(m.offset)) << '[' << m.offset << "] analytic " << m.analytic
          << " numeric " << m.numeric;
      failures.push_back(msg.str());
    }
    for (std::size_t i : prims) {
      for (int k = 0; k < layout::kCount; ++k) {
        if (g.grad(k, Eigen::Index(i)) != 0.0) groups_checked.insert(param_group_of(k));
      }
    }
    checked += prims.size() * layout::kCount;
  }
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << checked << " parameters, " << failures.size() << " mismatches, " << groups_checked.size()
    << "/" << kNumParamGroups << " groups with nonzero gradient, " << fmt("%.0f s", secs);
  for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 5); ++i) {
    d << "\n    " << failures[i];
  }
  return {failures.empty() && groups_checked.size() == kNumParamGroups && secs < 300.0, d.str()};
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  const RayBatch rays = generate_rays(testing::test_camera(16));
  RenderConfig rc;
  rc.dt = 0.02;
  rc.t_eps = 0.0;
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    RandomSceneOptions o;
    o.family = kAllBasisFamilies[s % kAllBasisFamilies.size()];
    o.sigma_eps = 0.05;
    const Scene scene = random_scene(rng, 20, o);
    const RenderResult a = render(rays, scene, build_bvh(scene), rc);
    const RenderResult b = render_reference(rays, scene, rc);
    worst = std::max(worst, (a.color - b.color).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-6 && secs < 60.0,
          fmt("max |render - reference| = %.3g", worst) + fmt(", %.1f s", secs)};
}

Outcome slab_invariance() {
  std::mt19937_64 rng(303);
  const RayBatch rays = generate_rays(testing::test_camera(16));
  double worst = 0.0;
  std::uint64_t overflows = 0;
  for (int s = 0; s < 12; ++s) {
    RandomSceneOptions o;
    o.family = kAllBasisFamilies[s % kAllBasisFamilies.size()];
    o.sigma_eps = 0.05;
    const Scene scene = random_scene(rng, 20, o);
    const EllipsoidBvh bvh = build_bvh(scene);
    RenderConfig rc;
    rc.dt = 0.01;
    rc.t_eps = 0.0;
    rc.slab_samples = 1;
    const RenderResult base = render(rays, scene, bvh, rc);
    for (int b : {4, 8, 16}) {
      rc.slab_samples = b;
      const RenderResult r = render(rays, scene, bvh, rc);
      worst = std::max(worst, (r.color - base.color).cwiseAbs().maxCoeff());
      worst = std::max(worst, (r.transmittance - base.transmittance).cwiseAbs().maxCoeff());
      overflows += r.stats.overflows;
    }
  }
  return {worst <= 1e-6 && overflows == 0,
          fmt("max difference over B in {1,4,8,16}: %.3g", worst)};
}

Outcome bvh_oracle() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int mismatches = 0;
  std::size_t total_hits = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    RandomSceneOptions o;
    o.family = kAllBasisFamilies[pair % kAllBasisFamilies.size()];
    o.sigma_eps = 0.05;
    o.spread = 1.5;
    o.min_scale = 0.02;
    o.max_scale = 0.3;
    const std::size_t n = 1 + std::uniform_int_distribution<std::size_t>(0, 199)(rng);
    const Scene scene = random_scene(rng, n, o);
    const PreparedScene prepared = prepare_scene(scene);
    const EllipsoidBvh bvh = build_bvh(prepared);
    const Vec3 origin = 3.0 * Vec3(u(rng), u(rng), u(rng));
    const Vec3 dir = Vec3(u(rng), u(rng), u(rng)).normalized();
    const double t_lo = 4.0 * std::abs(u(rng));
    const double t_hi = t_lo + 3.0 * std::abs(u(rng));
    HitBuffer buffer(n);
    query_slab(bvh, origin, dir, t_lo, t_hi, buffer);
    const std::set<std::uint32_t> got(buffer.hits().begin(), buffer.hits().end());
    const auto ref = brute_force_query(collect_supports(prepared), origin, dir, t_lo, t_hi);
    if (got.size() != buffer.size() || got != std::set<std::uint32_t>(ref.begin(), ref.end())) {
      ++mismatches;
    }
    total_hits += ref.size();
  }

  // Boundary sampling of random supports against their boxes.
  int outside = 0;
  double worst_slack = 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    const Vec3 center = 2.0 * Vec3(u(rng), u(rng), u(rng));
    const Mat3 rot =
        rotation_from_quaternion<double>(Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)));
    const Vec3 axes = (Vec3(u(rng), u(rng), u(rng)).array() * 1.5 + 2.0).matrix() * 0.5;
    const EllipsoidSupport sup = make_support(center, rot, axes, 0);
    const Aabb box = tight_aabb(sup);
    const double extent = box.extent().maxCoeff();
    const double tol = 1e-12 * extent;
    Vec3 reach_max = Vec3::Constant(-1e300), reach_min = Vec3::Constant(1e300);
    auto visit = [&](const Vec3& unit) {
      const Vec3 p = center + rot * axes.cwiseProduct(unit);
      if ((p.array() < box.min.array() - tol).any() || (p.array() > box.max.array() + tol).any()) {
        ++outside;
      }
      reach_max = reach_max.cwiseMax(p);
      reach_min = reach_min.cwiseMin(p);
    };
    for (int k = 0; k < 10000; ++k) visit(Vec3(normal(rng), normal(rng), normal(rng)).normalized());
    // Axis-extremal boundary points: x_i is maximal at unit ~ S R^T e_i.
    for (int a = 0; a < 3; ++a) {
      const Vec3 dir = axes.cwiseProduct(rot.transpose().col(a)).normalized();
      visit(dir);
      visit(-dir);
    }
    worst_slack = std::max(worst_slack, ((box.max - reach_max).cwiseAbs().maxCoeff()) / extent);
    worst_slack = std::max(worst_slack, ((reach_min - box.min).cwiseAbs().maxCoeff()) / extent);
  }
  std::ostringstream d;
  d << mismatches << "/1000 query mismatches (" << total_hits << " hits), " << outside
    << " boundary samples outside their box, max slack " << fmt("%.2g", worst_slack)
    << " x extent";
  return {mismatches == 0 && outside == 0 && worst_slack < 1e-9, d.str()};
}

Outcome early_termination() {
  std::mt19937_64 rng(505);
  const RayBatch rays = generate_rays(testing::test_camera(24));
  double worst_ratio = 0.0;
  std::uint64_t terminated = 0;
  std::ostringstream d;
  for (double t_eps : {1e-2, 1e-4}) {
    double worst = 0.0;
    for (int s = 0; s < 8; ++s) {
      RandomSceneOptions o;
      o.family = kAllBasisFamilies[s % kAllBasisFamilies.size()];
      o.sigma_eps = 0.05;
      o.unit_colors = true;
      o.min_density = 10.0;
      o.max_density = 60.0;
      const Scene scene = random_scene(rng, 20, o);
      const EllipsoidBvh bvh = build_bvh(scene);
      RenderConfig rc;
      rc.dt = 0.01;
      rc.t_eps = 0.0;
      const RenderResult exact = render(rays, scene, bvh, rc);
      rc.t_eps = t_eps;
      const RenderResult cut = render(rays, scene, bvh, rc);
      worst = std::max(worst, (exact.color - cut.color).cwiseAbs().maxCoeff());
      terminated += cut.stats.early_terminations;
    }
    worst_ratio = std::max(worst_ratio, worst / t_eps);
    d << "T_eps " << t_eps << ": max diff " << fmt("%.3g", worst) << "; ";
  }
  d << terminated << " rays terminated early";
  return {worst_ratio <= 1.0 && terminated > 0, d.str()};
}

Outcome compositing_conservation() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  std::uint64_t steps = 0;
  const double y00 = sh_basis<double>(Vec3::UnitZ())[0];
  for (int s = 0; s < 12; ++s) {
    RandomSceneOptions o;
    o.family = kAllBasisFamilies[s % kAllBasisFamilies.size()];
    o.sigma_eps = 0.05;
    o.unit_colors = true;
    o.min_density = 1.0;
    o.max_density = 40.0;
    Scene scene = random_scene(rng, 20, o);
    for (auto& p : scene.primitives) p.sh(0) = Rgb::Constant(1.0 / y00);
    const EllipsoidBvh bvh = build_bvh(scene);
    RenderConfig rc;
    rc.dt = 0.005;
    rc.t_eps = 0.0;
    for (int r = 0; r < 40; ++r) {
      const Vec3 origin = Vec3(0.3 * u(rng), 0.3 * u(rng), -3.0);
      const Vec3 dir = (Vec3(0.2 * u(rng), 0.2 * u(rng), 0.0) - origin).normalized();
      trace_ray(origin, dir, scene, bvh, rc, [&](std::int64_t, const RayState& st) {
        ++steps;
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(st.color[c] + st.transmittance - 1.0));
      });
    }
  }
  return {worst <= 1e-6 && steps > 0,
          fmt("max |C_R + T - 1| = %.3g", worst) + " over " + std::to_string(steps) + " steps"};
}

// Toy runs are shared by the convergence and step-size criteria.
struct ToyRun {
  double psnr = 0.0;
  double seconds = 0.0;
  double render_seconds = 0.0;
};

ToyRun run_toy(std::uint64_t seed, const ToySceneOptions& opts, TrainConfig cfg) {
  const ToyScene toy = make_toy_scene(seed, opts);
  const Scene init = init_from_point_cloud(toy.points, SceneConfig{});
  const auto start = std::chrono::steady_clock::now();
  cfg.eval_interval = 0;
  const TrainResult res = train(init, toy.train, toy.test, cfg);
  ToyRun out;
  out.seconds = seconds_since(start);
  out.psnr = *res.log.back().psnr;
  // Render time of the held-out views, best of three.
  const EllipsoidBvh bvh = build_bvh(res.scene);
  out.render_seconds = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t = std::chrono::steady_clock::now();
    for (const auto& v : toy.test) render_image(v.camera, res.scene, bvh, cfg.render);
    out.render_seconds = std::min(out.render_seconds, seconds_since(t));
  }
  std::cerr << "  toy seed " << seed << (opts.view_dependent ? " view-dependent" : "")
            << " dt " << cfg.render.dt << " sh<=" << cfg.unlock.max_sh_degree << " sg<="
            << cfg.unlock.max_sg_count << ": " << fmt("%.2f dB", out.psnr)
            << fmt(" in %.0f s", out.seconds) << std::endl;
  return out;
}

std::vector<ToyRun>& default_runs() {
  static std::vector<ToyRun> runs;
  return runs;
}

Outcome toy_convergence() {
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream d;
  int good = 0;
  auto& runs = default_runs();
  runs.clear();
  d << "held-out PSNR";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    runs.push_back(run_toy(seed, {}, toy_train_config(seed)));
    if (runs.back().psnr >= 28.0) ++good;
    d << fmt(" %.2f", runs.back().psnr);
  }
  d << " (" << good << "/5 >= 28 dB)";

  ToySceneOptions vd;
  vd.view_dependent = true;
  const ToyRun full = run_toy(1, vd, toy_train_config(1));
  TrainConfig rgb_cfg = toy_train_config(1);
  rgb_cfg.unlock.max_sh_degree = 0;
  rgb_cfg.unlock.max_sg_count = 0;
  const ToyRun rgb = run_toy(1, vd, rgb_cfg);
  const double gap = full.psnr - rgb.psnr;
  d << "; view-dependent variant: SH+SG " << fmt("%.2f", full.psnr) << " vs RGB "
    << fmt("%.2f dB", rgb.psnr);
  const double secs = seconds_since(start);
  d << fmt("; %.0f s", secs);
  return {good >= 4 && gap >= 0.5, d.str()};
}

Outcome dt_study() {
  auto& runs = default_runs();
  std::ostringstream d;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    if (runs.size() < seed) runs.push_back(run_toy(seed, {}, toy_train_config(seed)));
    TrainConfig coarse = toy_train_config(seed);
    coarse.render.dt = 2.0 * kToyDt;
    const ToyRun c = run_toy(seed, {}, coarse);
    const ToyRun& f = runs[seed - 1];
    const bool psnr_ok = f.psnr >= c.psnr - 0.05;
    const bool slower = f.render_seconds > c.render_seconds;
    ok = ok && psnr_ok && slower;
    d << "seed " << seed << ": dt " << 2.0 * kToyDt << fmt(" %.2f dB", c.psnr)
      << fmt(" %.3f s", c.render_seconds) << " -> dt " << kToyDt << fmt(" %.2f dB", f.psnr)
      << fmt(" %.3f s", f.render_seconds) << "; ";
  }
  return {ok, d.str()};
}

int cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"volgs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(int(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "volgs_acceptance_determinism";
  fs::remove_all(dir);
  if (cli({"toy", dir.string(), "--seed", "3"}) != 0) return {false, "toy dataset failed"};
  const std::string cfg = (dir / "config.json").string();
  const std::string a = (dir / "run_a").string(), b = (dir / "run_b").string();
  for (const auto& out : {a, b}) {
    if (cli({"train", cfg, "--seed", "7", "--iterations", "60", "--output", out, "--quiet"}) != 0) {
      return {false, "train failed"};
    }
  }
  const std::string csv_a = slurp(fs::path(a) / "metrics.csv");
  const std::string csv_b = slurp(fs::path(b) / "metrics.csv");
  const bool csv_same = !csv_a.empty() && csv_a == csv_b;

  // Round trip: saved checkpoint, reloaded and saved again, renders identically.
  const Scene first = io::load_checkpoint(fs::path(a) / "checkpoint.bin");
  io::save_checkpoint(dir / "again.bin", first);
  const Scene second = io::load_checkpoint(dir / "again.bin");
  const Camera cam = orbit_cameras(1, 2.5, 64, 0.9, 0.3).front();
  RenderConfig rc;
  rc.dt = kToyDt;
  const Image ia = render_image(cam, first, build_bvh(first), rc);
  const Image ib = render_image(cam, second, build_bvh(second), rc);
  const bool bits = (ia.pixels == ib.pixels).all() && first.size() == second.size();
  const bool ckpt_same = slurp(fs::path(a) / "checkpoint.bin") == slurp(fs::path(b) / "checkpoint.bin");
  fs::remove_all(dir);
  std::ostringstream d;
  d << "metrics.csv " << (csv_same ? "identical" : "DIFFERENT") << ", checkpoints "
    << (ckpt_same ? "identical" : "DIFFERENT") << ", round-trip render "
    << (bits ? "bit-identical" : "DIFFERENT");
  return {csv_same && ckpt_same && bits, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"oracle equivalence", oracle_equivalence},
      {"slab invariance", slab_invariance},
      {"BVH oracle", bvh_oracle},
      {"early-termination bound", early_termination},
      {"compositing conservation", compositing_conservation},
      {"toy-scene convergence", toy_convergence},
      {"step-size study", dt_study},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": "
              << o.detail << std::endl;
    if (!o.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
