#include "volgs/io/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "volgs/errors.hpp"
#include "volgs/io/image_io.hpp"

namespace volgs::io {

using nlohmann::json;

namespace {

const Eigen::Matrix4d& flip_yz() {
  static const Eigen::Matrix4d m = Eigen::Vector4d(1.0, -1.0, -1.0, 1.0).asDiagonal();
  return m;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

Eigen::Matrix4d matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) throw IoError(what + ": expected a 4x4 matrix");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    if (!j[std::size_t(r)].is_array() || j[std::size_t(r)].size() != 4) {
      throw IoError(what + ": expected a 4x4 matrix");
    }
    for (int c = 0; c < 4; ++c) m(r, c) = j[std::size_t(r)][std::size_t(c)].get<double>();
  }
  if (!m.allFinite()) throw IoError(what + ": non-finite matrix entry");
  return m;
}

json matrix_to_json(const Eigen::Matrix4d& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  }
  return rows;
}

Eigen::Isometry3d isometry_from(const Eigen::Matrix4d& m, const std::string& what) {
  const Mat3 r = m.topLeftCorner<3, 3>();
  if (!(r.transpose() * r).isIdentity(1e-4)) {
    throw IoError(what + ": rotation part is not orthonormal");
  }
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  // Re-orthonormalize so small export noise does not leak into the rays.
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  iso.linear() = svd.matrixU() * svd.matrixV().transpose();
  iso.translation() = m.topRightCorner<3, 1>();
  return iso;
}

std::filesystem::path resolve_image(const std::filesystem::path& root, std::string file) {
  std::filesystem::path p = root / file;
  if (!p.has_extension()) p += ".png";
  return p.lexically_normal();
}

void load_manifest(const std::filesystem::path& manifest, Split split,
                   const DatasetOptions& options, Dataset& out) {
  const json j = read_json(manifest);
  const std::string what = manifest.string();
  if (!j.contains("camera_angle_x") || !j.contains("frames") || !j["frames"].is_array()) {
    throw IoError(what + ": needs camera_angle_x and frames");
  }
  const double angle = j["camera_angle_x"].get<double>();
  if (!(angle > 0.0 && angle < std::numbers::pi)) throw IoError(what + ": camera_angle_x out of range");
  const std::filesystem::path root = manifest.parent_path();
  for (const json& frame : j["frames"]) {
    if (!frame.contains("file_path") || !frame.contains("transform_matrix")) {
      throw IoError(what + ": frame needs file_path and transform_matrix");
    }
    DatasetView view;
    view.split = split;
    view.image_path = resolve_image(root, frame["file_path"].get<std::string>());
    Image img = read_png(view.image_path, options.background);
    if (j.contains("w") && j.contains("h") &&
        (j["w"].get<int>() != img.width || j["h"].get<int>() != img.height)) {
      throw IoError(view.image_path.string() + ": size does not match the manifest");
    }
    if (!out.views.empty() && (out.views.front().image.width != img.width ||
                               out.views.front().image.height != img.height)) {
      throw IoError(view.image_path.string() + ": image sizes differ within the dataset");
    }
    const Eigen::Matrix4d m = matrix_from_json(frame["transform_matrix"], what);
    view.camera = blender_camera(m, img.width, img.height, angle);
    if (options.downscale > 1) {
      view.image = downsample(img, options.downscale);
      const double f = options.downscale;
      view.camera.fx /= f;
      view.camera.fy /= f;
      view.camera.width = view.image.width;
      view.camera.height = view.image.height;
      view.camera.cx = 0.5 * view.camera.width;
      view.camera.cy = 0.5 * view.camera.height;
    } else {
      view.image = std::move(img);
    }
    out.views.push_back(std::move(view));
  }
}

}  // namespace

std::vector<const DatasetView*> Dataset::split(Split which) const {
  std::vector<const DatasetView*> out;
  for (const auto& v : views) {
    if (v.split == which) out.push_back(&v);
  }
  return out;
}

Camera blender_camera(const Eigen::Matrix4d& transform, int width, int height,
                      double camera_angle_x) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = 0.5 * width / std::tan(0.5 * camera_angle_x);
  cam.fy = cam.fx;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.camera_to_world = isometry_from(transform * flip_yz(), "camera transform");
  return cam;
}

Eigen::Matrix4d blender_transform(const Camera& camera) {
  return camera.camera_to_world.matrix() * flip_yz();
}

Dataset load_blender_dataset(const std::filesystem::path& root, const DatasetOptions& options) {
  if (options.downscale < 1) throw ParameterError("dataset: downscale must be >= 1");
  Dataset out;
  const auto train = root / "transforms_train.json";
  if (!std::filesystem::exists(train)) {
    throw IoError("dataset: missing " + train.string());
  }
  load_manifest(train, Split::train, options, out);
  const auto test = root / "transforms_test.json";
  if (std::filesystem::exists(test)) load_manifest(test, Split::test, options, out);
  if (out.split(Split::train).empty()) throw IoError("dataset: no training frames");
  return out;
}

void save_blender_dataset(const std::filesystem::path& root, const Dataset& dataset) {
  if (dataset.views.empty()) throw IoError("dataset: nothing to write");
  const Camera& ref = dataset.views.front().camera;
  const double angle = 2.0 * std::atan(0.5 * ref.width / ref.fx);
  for (Split split : {Split::train, Split::test}) {
    const auto views = dataset.split(split);
    if (views.empty()) continue;
    const std::string name = split == Split::train ? "train" : "test";
    std::filesystem::create_directories(root / name);
    json manifest;
    manifest["camera_angle_x"] = angle;
    manifest["w"] = ref.width;
    manifest["h"] = ref.height;
    manifest["frames"] = json::array();
    for (std::size_t i = 0; i < views.size(); ++i) {
      const DatasetView& v = *views[i];
      if (v.camera.width != ref.width || v.camera.height != ref.height ||
          std::abs(v.camera.fx - ref.fx) > 1e-9 * ref.fx) {
        throw IoError("dataset: views must share intrinsics");
      }
      const std::string file = "./" + name + "/r_" + std::to_string(i);
      write_png(root / (file + ".png"), v.image);
      manifest["frames"].push_back(
          {{"file_path", file}, {"transform_matrix", matrix_to_json(blender_transform(v.camera))}});
    }
    std::ofstream out(root / ("transforms_" + name + ".json"));
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("dataset: cannot write manifest under " + root.string());
  }
}

Camera load_camera_json(const std::filesystem::path& path) {
  const json j = read_json(path);
  const std::string what = path.string();
  try {
    Camera cam;
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    if (j.contains("camera_angle_x")) {
      cam = blender_camera(matrix_from_json(j.at("transform_matrix"), what), cam.width,
                           cam.height, j["camera_angle_x"].get<double>());
    } else {
      cam.fx = j.at("fx").get<double>();
      cam.fy = j.at("fy").get<double>();
      cam.cx = j.at("cx").get<double>();
      cam.cy = j.at("cy").get<double>();
      cam.camera_to_world = isometry_from(matrix_from_json(j.at("camera_to_world"), what), what);
    }
    cam.validate();
    return cam;
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  } catch (const ParameterError& e) {
    throw IoError(what + ": " + e.what());
  }
}

void save_camera_json(const std::filesystem::path& path, const Camera& camera) {
  json j;
  j["width"] = camera.width;
  j["height"] = camera.height;
  j["fx"] = camera.fx;
  j["fy"] = camera.fy;
  j["cx"] = camera.cx;
  j["cy"] = camera.cy;
  j["camera_to_world"] = matrix_to_json(camera.camera_to_world.matrix());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace volgs::io
