#include "volgs/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "volgs/errors.hpp"
#include "volgs/eval.hpp"
#include "volgs/io/checkpoint.hpp"
#include "volgs/io/config.hpp"
#include "volgs/io/dataset.hpp"
#include "volgs/io/image_io.hpp"
#include "volgs/io/ply.hpp"
#include "volgs/selfcheck.hpp"
#include "volgs/toy.hpp"

namespace volgs {

namespace {

namespace fs = std::filesystem;

struct RenderFlags {
  std::optional<double> dt;
  std::optional<int> slab_samples;
  std::optional<double> t_eps;
  std::optional<int> rays_per_pixel;
  std::optional<std::size_t> hit_capacity;
  std::vector<double> background;

  void add_to(CLI::App& app) {
    app.add_option("--dt", dt, "Distance between samples along a ray");
    app.add_option("--slab-samples", slab_samples, "Samples per slab");
    app.add_option("--t-eps", t_eps, "Early termination transmittance threshold");
    app.add_option("--rays-per-pixel", rays_per_pixel, "1 or 4")->check(CLI::IsMember({1, 4}));
    app.add_option("--hit-capacity", hit_capacity, "Primitives collected per slab");
    app.add_option("--background", background, "Background colour r g b")->expected(3);
  }

  RenderConfig apply(RenderConfig rc) const {
    if (dt) rc.dt = *dt;
    if (slab_samples) rc.slab_samples = *slab_samples;
    if (t_eps) rc.t_eps = *t_eps;
    if (rays_per_pixel) rc.rays_per_pixel = *rays_per_pixel;
    if (hit_capacity) rc.hit_capacity = *hit_capacity;
    if (background.size() == 3) rc.background = Rgb(background[0], background[1], background[2]);
    rc.validate();
    return rc;
  }
};

std::vector<TrainView> views_of(const io::Dataset& data, io::Split split) {
  std::vector<TrainView> out;
  for (const io::DatasetView* v : data.split(split)) out.push_back({v->camera, v->image});
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

std::vector<PointSample> random_points(std::size_t count, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<PointSample> pts(count);
  for (auto& p : pts) {
    p.position = Vec3(u(rng), u(rng), u(rng));
    p.color = Rgb::Constant(0.5);
  }
  return pts;
}

void write_image(const fs::path& path, const Image& img) {
  if (path.extension() == ".rgbf") {
    io::write_float_image(path, img);
  } else {
    io::write_png(path, img);
  }
}

int cmd_train(const fs::path& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::int64_t> iterations, std::optional<fs::path> output,
              bool quiet, std::ostream& out) {
  io::RunConfig rc = io::load_run_config(config_path);
  if (seed) rc.train.seed = *seed;
  if (iterations) rc.train.iterations = *iterations;
  if (output) rc.output_dir = *output;
  if (rc.dataset.empty()) throw IoError("config: 'dataset' is required");

  io::DatasetOptions dopt;
  dopt.background = rc.scene.background;
  dopt.downscale = rc.downscale;
  const io::Dataset data = io::load_blender_dataset(rc.dataset, dopt);
  const auto points = rc.point_cloud.empty()
                          ? random_points(rc.random_points, rc.random_extent, rc.train.seed)
                          : io::load_point_cloud(rc.point_cloud);
  Scene scene = init_from_point_cloud(points, rc.scene, rc.init);

  const auto train_views = views_of(data, io::Split::train);
  const auto test_views = views_of(data, io::Split::test);
  TrainProgress progress;
  if (!quiet) {
    progress = [&out](const MetricRow& row) {
      if (row.iteration % 100 == 0 || row.psnr) {
        out << "iter " << row.iteration << " loss " << row.loss;
        if (row.psnr) out << " psnr " << *row.psnr;
        out << " primitives " << row.primitives << '\n';
      }
    };
  }
  const TrainResult result = train(std::move(scene), train_views, test_views, rc.train, progress);

  fs::create_directories(rc.output_dir);
  io::save_checkpoint(rc.output_dir / "checkpoint.bin", result.scene);
  write_text(rc.output_dir / "metrics.csv", metrics_csv(result.log));
  write_text(rc.output_dir / "config.json", io::to_json(rc) + "\n");
  out << "wrote " << (rc.output_dir / "checkpoint.bin").string() << " ("
      << result.scene.size() << " primitives)\n";
  return kExitOk;
}

int cmd_render(const fs::path& checkpoint, const fs::path& target, std::optional<fs::path> out_path,
               const RenderFlags& flags, int downscale, std::ostream& out) {
  const Scene scene = io::load_checkpoint(checkpoint);
  const RenderConfig rc = flags.apply(RenderConfig{});
  const EllipsoidBvh bvh = build_bvh(scene);
  if (fs::is_directory(target)) {
    io::DatasetOptions dopt;
    dopt.background = background_of(scene, rc);
    dopt.downscale = downscale;
    const io::Dataset data = io::load_blender_dataset(target, dopt);
    auto views = data.split(io::Split::test);
    if (views.empty()) views = data.split(io::Split::train);
    const fs::path dir = out_path.value_or("renders");
    fs::create_directories(dir);
    for (std::size_t i = 0; i < views.size(); ++i) {
      write_image(dir / ("view_" + std::to_string(i) + ".png"),
                  render_image(views[i]->camera, scene, bvh, rc));
    }
    out << "rendered " << views.size() << " views into " << dir.string() << '\n';
  } else {
    const Camera cam = io::load_camera_json(target);
    const fs::path path = out_path.value_or("render.png");
    write_image(path, render_image(cam, scene, bvh, rc));
    out << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& dataset, std::optional<fs::path> report,
             std::optional<fs::path> dump, const RenderFlags& flags, int downscale,
             std::ostream& out) {
  const Scene scene = io::load_checkpoint(checkpoint);
  const RenderConfig rc = flags.apply(RenderConfig{});
  io::DatasetOptions dopt;
  dopt.background = background_of(scene, rc);
  dopt.downscale = downscale;
  const io::Dataset data = io::load_blender_dataset(dataset, dopt);
  auto views = views_of(data, io::Split::test);
  if (views.empty()) views = views_of(data, io::Split::train);
  const EvalReport r = evaluate(scene, views, rc, dump.value_or(fs::path{}));
  out << "views " << r.images.size() << " psnr " << r.mean_psnr << " ssim " << r.mean_ssim
      << " rays/s " << r.rays_per_second << " slabs/ray " << r.slabs_per_ray << '\n';
  if (report) write_text(*report, r.to_json() + "\n");
  return kExitOk;
}

int cmd_check(std::ostream& out) {
  bool ok = true;
  for (const CheckResult& c : run_self_checks()) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_toy(const fs::path& dir, std::uint64_t seed, bool view_dependent, std::ostream& out) {
  ToySceneOptions opt;
  opt.view_dependent = view_dependent;
  const ToyScene toy = make_toy_scene(seed, opt);
  io::Dataset data;
  for (const auto& v : toy.train) data.views.push_back({v.camera, {}, io::Split::train, v.image});
  for (const auto& v : toy.test) data.views.push_back({v.camera, {}, io::Split::test, v.image});
  fs::create_directories(dir);
  io::save_blender_dataset(dir, data);
  io::save_point_cloud(dir / "points.ply", toy.points);
  io::save_checkpoint(dir / "truth.bin", toy.truth);

  io::RunConfig rc;
  rc.dataset = ".";
  rc.point_cloud = "points.ply";
  rc.output_dir = "output";
  rc.train = toy_train_config(seed);
  write_text(dir / "config.json", io::to_json(rc) + "\n");
  out << "wrote toy dataset to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentiable volume ray casting of anisotropic basis functions"};
  app.require_subcommand(1);

  fs::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations;
  std::optional<fs::path> output;
  bool quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Fit a scene to a dataset");
  train_cmd->add_option("config", config_path, "Training config (JSON)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "Seed for every random choice");
  train_cmd->add_option("--iterations", iterations, "Override the iteration count");
  train_cmd->add_option("--output", output, "Override the output directory");
  train_cmd->add_flag("--quiet", quiet, "Only print the final summary");

  fs::path checkpoint;
  fs::path target;
  std::optional<fs::path> out_path;
  int downscale = 1;
  RenderFlags render_flags;
  auto* render_cmd = app.add_subcommand("render", "Render a checkpoint");
  render_cmd->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  render_cmd->add_option("target", target, "Camera JSON or dataset directory")->required()->check(CLI::ExistingPath);
  render_cmd->add_option("--out", out_path, "Output image (.png or .rgbf) or directory");
  render_cmd->add_option("--downscale", downscale, "Dataset downscale factor")->check(CLI::PositiveNumber);
  render_flags.add_to(*render_cmd);

  fs::path dataset;
  std::optional<fs::path> report;
  std::optional<fs::path> dump;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR / SSIM of a checkpoint on a dataset's test split");
  eval_cmd->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("dataset", dataset)->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--report", report, "Write the report as JSON");
  eval_cmd->add_option("--dump", dump, "Directory for rendered images");
  eval_cmd->add_option("--downscale", downscale, "Dataset downscale factor")->check(CLI::PositiveNumber);
  render_flags.add_to(*eval_cmd);

  app.add_subcommand("check", "Run the built-in self-tests");

  fs::path toy_dir;
  std::uint64_t toy_seed = 0;
  bool view_dependent = false;
  auto* toy_cmd = app.add_subcommand("toy", "Write a synthetic dataset with a matching config");
  toy_cmd->add_option("dir", toy_dir)->required();
  toy_cmd->add_option("--seed", toy_seed);
  toy_cmd->add_flag("--view-dependent", view_dependent);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(config_path, seed, iterations, output, quiet, out);
    if (*render_cmd) return cmd_render(checkpoint, target, out_path, render_flags, downscale, out);
    if (*eval_cmd) return cmd_eval(checkpoint, dataset, report, dump, render_flags, downscale, out);
    if (*toy_cmd) return cmd_toy(toy_dir, toy_seed, view_dependent, out);
    return cmd_check(out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace volgs
