#include "volgs/io/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "volgs/errors.hpp"

namespace volgs::io {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw IoError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw IoError("config: unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Rgb read_rgb(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("config: colours are [r, g, b] arrays");
  return Rgb(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json rgb_json(const Rgb& c) { return json::array({c[0], c[1], c[2]}); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

void parse_render(const json& j, RenderConfig& r) {
  reject_unknown(j, {"dt", "slab_samples", "t_eps", "hit_capacity", "rays_per_pixel", "background"},
                 "render");
  read(j, "dt", r.dt);
  read(j, "slab_samples", r.slab_samples);
  read(j, "t_eps", r.t_eps);
  read(j, "hit_capacity", r.hit_capacity);
  read(j, "rays_per_pixel", r.rays_per_pixel);
  if (j.contains("background")) r.background = read_rgb(j["background"]);
}

void parse_rates(const json& j, LearningRates& lr) {
  reject_unknown(j,
                 {"position_initial", "position_final", "position_steps", "position_scale",
                  "rotation", "scale", "density", "sh_dc", "sh_rest", "sg_amplitude",
                  "sg_sharpness", "sg_axis"},
                 "learning_rates");
  read(j, "position_initial", lr.position.initial);
  read(j, "position_final", lr.position.final);
  read(j, "position_steps", lr.position.steps);
  read(j, "position_scale", lr.position_scale);
  read(j, "rotation", lr.rotation);
  read(j, "scale", lr.scale);
  read(j, "density", lr.density);
  read(j, "sh_dc", lr.sh_dc);
  read(j, "sh_rest", lr.sh_rest);
  read(j, "sg_amplitude", lr.sg_amplitude);
  read(j, "sg_sharpness", lr.sg_sharpness);
  read(j, "sg_axis", lr.sg_axis);
}

void parse_densify(const json& j, DensifySchedule& d) {
  reject_unknown(j,
                 {"enabled", "from", "until", "interval", "grad_threshold",
                  "clone_extent_fraction", "split_factor", "split_children", "prune_density",
                  "scene_extent"},
                 "densify");
  read(j, "enabled", d.enabled);
  read(j, "from", d.from);
  read(j, "until", d.until);
  read(j, "interval", d.interval);
  read(j, "grad_threshold", d.options.grad_threshold);
  read(j, "clone_extent_fraction", d.options.clone_extent_fraction);
  read(j, "split_factor", d.options.split_factor);
  read(j, "split_children", d.options.split_children);
  read(j, "prune_density", d.options.prune_density);
  read(j, "scene_extent", d.options.scene_extent);
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    const json j = json::parse(text);
    reject_unknown(j,
                   {"dataset", "point_cloud", "random_points", "random_extent", "output_dir",
                    "downscale", "basis", "isotropic", "sigma_eps", "background",
                    "initial_density", "iterations", "seed", "ssim_weight", "eval_interval",
                    "bvh_leaf_size", "unlock_interval", "max_sh_degree", "max_sg_count",
                    "render", "learning_rates", "densify"},
                   "config");
    if (j.contains("dataset")) c.dataset = resolve(base_dir, j["dataset"].get<std::string>());
    if (j.contains("point_cloud")) {
      c.point_cloud = resolve(base_dir, j["point_cloud"].get<std::string>());
    }
    read(j, "random_points", c.random_points);
    read(j, "random_extent", c.random_extent);
    if (j.contains("output_dir")) {
      c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    } else {
      c.output_dir = resolve(base_dir, "output");
    }
    read(j, "downscale", c.downscale);
    if (j.contains("basis")) c.scene.basis.family = parse_basis_family(j["basis"].get<std::string>());
    read(j, "isotropic", c.scene.basis.isotropic);
    read(j, "sigma_eps", c.scene.sigma_eps);
    if (j.contains("background")) c.scene.background = read_rgb(j["background"]);
    read(j, "initial_density", c.init.initial_density);
    read(j, "iterations", c.train.iterations);
    read(j, "seed", c.train.seed);
    read(j, "ssim_weight", c.train.ssim_weight);
    read(j, "eval_interval", c.train.eval_interval);
    read(j, "bvh_leaf_size", c.train.bvh_leaf_size);
    read(j, "unlock_interval", c.train.unlock.interval);
    read(j, "max_sh_degree", c.train.unlock.max_sh_degree);
    read(j, "max_sg_count", c.train.unlock.max_sg_count);
    if (j.contains("render")) parse_render(j["render"], c.train.render);
    if (j.contains("learning_rates")) parse_rates(j["learning_rates"], c.train.rates);
    if (j.contains("densify")) parse_densify(j["densify"], c.train.densify);
  } catch (const json::exception& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  if (c.downscale < 1) throw IoError("config: downscale must be >= 1");
  try {
    c.scene.validate();
    c.train.validate();
  } catch (const ParameterError& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string to_json(const RunConfig& c) {
  json j;
  j["dataset"] = c.dataset.string();
  if (!c.point_cloud.empty()) j["point_cloud"] = c.point_cloud.string();
  j["random_points"] = c.random_points;
  j["random_extent"] = c.random_extent;
  j["output_dir"] = c.output_dir.string();
  j["downscale"] = c.downscale;
  j["basis"] = std::string(to_string(c.scene.basis.family));
  j["isotropic"] = c.scene.basis.isotropic;
  j["sigma_eps"] = c.scene.sigma_eps;
  j["background"] = rgb_json(c.scene.background);
  j["initial_density"] = c.init.initial_density;
  const TrainConfig& t = c.train;
  j["iterations"] = t.iterations;
  j["seed"] = t.seed;
  j["ssim_weight"] = t.ssim_weight;
  j["eval_interval"] = t.eval_interval;
  j["bvh_leaf_size"] = t.bvh_leaf_size;
  j["unlock_interval"] = t.unlock.interval;
  j["max_sh_degree"] = t.unlock.max_sh_degree;
  j["max_sg_count"] = t.unlock.max_sg_count;
  json r;
  r["dt"] = t.render.dt;
  r["slab_samples"] = t.render.slab_samples;
  r["t_eps"] = t.render.t_eps;
  r["hit_capacity"] = t.render.hit_capacity;
  r["rays_per_pixel"] = t.render.rays_per_pixel;
  if (t.render.background) r["background"] = rgb_json(*t.render.background);
  j["render"] = r;
  const LearningRates& lr = t.rates;
  j["learning_rates"] = {{"position_initial", lr.position.initial},
                         {"position_final", lr.position.final},
                         {"position_steps", lr.position.steps},
                         {"position_scale", lr.position_scale},
                         {"rotation", lr.rotation},
                         {"scale", lr.scale},
                         {"density", lr.density},
                         {"sh_dc", lr.sh_dc},
                         {"sh_rest", lr.sh_rest},
                         {"sg_amplitude", lr.sg_amplitude},
                         {"sg_sharpness", lr.sg_sharpness},
                         {"sg_axis", lr.sg_axis}};
  const DensifySchedule& d = t.densify;
  j["densify"] = {{"enabled", d.enabled},
                  {"from", d.from},
                  {"until", d.until},
                  {"interval", d.interval},
                  {"grad_threshold", d.options.grad_threshold},
                  {"clone_extent_fraction", d.options.clone_extent_fraction},
                  {"split_factor", d.options.split_factor},
                  {"split_children", d.options.split_children},
                  {"prune_density", d.options.prune_density},
                  {"scene_extent", d.options.scene_extent}};
  return j.dump(2);
}

}  // namespace volgs::io
