#include "volgs/eval.hpp"

#include <chrono>

#include <json.hpp>

#include "volgs/io/image_io.hpp"

namespace volgs {

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["mean_psnr"] = mean_psnr;
  j["mean_ssim"] = mean_ssim;
  j["seconds"] = seconds;
  j["rays_per_second"] = rays_per_second;
  j["slabs_per_ray"] = slabs_per_ray;
  j["overflows"] = stats.overflows;
  j["images"] = nlohmann::json::array();
  for (const ImageMetrics& m : images) j["images"].push_back({{"psnr", m.psnr}, {"ssim", m.ssim}});
  return j.dump(2);
}

EvalReport evaluate(const Scene& scene, std::span<const TrainView> views,
                    const RenderConfig& config, const std::filesystem::path& dump_dir,
                    int bvh_leaf_size) {
  EvalReport report;
  if (!dump_dir.empty()) std::filesystem::create_directories(dump_dir);
  const auto start = std::chrono::steady_clock::now();
  const EllipsoidBvh bvh = build_bvh(scene, bvh_leaf_size);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const Image img = render_image(views[i].camera, scene, bvh, config, &report.stats);
    ImageMetrics m;
    m.psnr = psnr(img, views[i].image);
    m.ssim = ssim(img, views[i].image);
    report.images.push_back(m);
    report.mean_psnr += m.psnr;
    report.mean_ssim += m.ssim;
    if (!dump_dir.empty()) {
      const std::string stem = "view_" + std::to_string(i);
      io::write_png(dump_dir / (stem + ".png"), img);
      io::write_float_image(dump_dir / (stem + ".rgbf"), img);
    }
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!views.empty()) {
    report.mean_psnr /= double(views.size());
    report.mean_ssim /= double(views.size());
  }
  if (report.seconds > 0.0) report.rays_per_second = double(report.stats.rays) / report.seconds;
  if (report.stats.rays > 0) {
    report.slabs_per_ray = double(report.stats.slabs) / double(report.stats.rays);
  }
  return report;
}

}  // namespace volgs
