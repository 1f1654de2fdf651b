#include "volgs/io/ply.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "volgs/errors.hpp"

namespace volgs::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class Format { ascii, binary_le };

struct Property {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

std::size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw IoError("ply: unknown property type '" + t + "'");
}

bool is_unsigned_byte(const std::string& t) { return t == "uchar" || t == "uint8"; }

template <typename T>
T read_raw(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double decode(const std::string& t, const char* p) {
  if (t == "char" || t == "int8") return read_raw<std::int8_t>(p);
  if (t == "uchar" || t == "uint8") return read_raw<std::uint8_t>(p);
  if (t == "short" || t == "int16") return read_raw<std::int16_t>(p);
  if (t == "ushort" || t == "uint16") return read_raw<std::uint16_t>(p);
  if (t == "int" || t == "int32") return read_raw<std::int32_t>(p);
  if (t == "uint" || t == "uint32") return read_raw<std::uint32_t>(p);
  if (t == "float" || t == "float32") return read_raw<float>(p);
  return read_raw<double>(p);
}

struct VertexLayout {
  std::array<int, 3> position{-1, -1, -1};
  std::array<int, 3> color{-1, -1, -1};
};

PointSample make_point(const Element& vertex, const VertexLayout& layout,
                       const std::vector<double>& values) {
  PointSample s;
  for (int a = 0; a < 3; ++a) s.position[a] = values[std::size_t(layout.position[a])];
  s.color = Rgb::Constant(0.5);
  if (layout.color[0] >= 0) {
    for (int a = 0; a < 3; ++a) {
      const int idx = layout.color[a];
      const double v = values[std::size_t(idx)];
      s.color[a] = is_unsigned_byte(vertex.properties[std::size_t(idx)].type) ? v / 255.0 : v;
    }
  }
  if (!s.position.allFinite() || !s.color.allFinite()) {
    throw IoError("ply: non-finite vertex value");
  }
  return s;
}

}  // namespace

std::vector<PointSample> load_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("ply: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw IoError("ply: missing magic in " + path.string());
  }
  Format format = Format::ascii;
  bool have_format = false;
  std::vector<Element> elements;
  while (true) {
    if (!std::getline(in, line)) throw IoError("ply: header not terminated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string f;
      ss >> f;
      if (f == "ascii") {
        format = Format::ascii;
      } else if (f == "binary_little_endian") {
        format = Format::binary_le;
      } else {
        throw IoError("ply: unsupported format '" + f + "'");
      }
      have_format = true;
    } else if (key == "element") {
      Element e;
      if (!(ss >> e.name >> e.count)) throw IoError("ply: malformed element line");
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) throw IoError("ply: property before element");
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
        type_size(p.count_type);
      } else {
        p.type = type;
        ss >> p.name;
      }
      if (p.name.empty()) throw IoError("ply: malformed property line");
      type_size(p.type);
      elements.back().properties.push_back(p);
    } else if (key == "comment" || key == "obj_info" || key.empty()) {
      continue;
    } else {
      throw IoError("ply: unexpected header line '" + line + "'");
    }
  }
  if (!have_format) throw IoError("ply: missing format line");

  std::vector<PointSample> points;
  for (const Element& e : elements) {
    const bool is_vertex = e.name == "vertex";
    VertexLayout layout;
    if (is_vertex) {
      static const char* pos_names[3] = {"x", "y", "z"};
      static const char* col_names[3] = {"red", "green", "blue"};
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        if (e.properties[i].is_list) continue;
        for (int a = 0; a < 3; ++a) {
          if (e.properties[i].name == pos_names[a]) layout.position[std::size_t(a)] = int(i);
          if (e.properties[i].name == col_names[a]) layout.color[std::size_t(a)] = int(i);
        }
      }
      if (std::any_of(layout.position.begin(), layout.position.end(),
                      [](int v) { return v < 0; })) {
        throw IoError("ply: vertex element lacks x, y or z");
      }
      if (std::any_of(layout.color.begin(), layout.color.end(), [](int v) { return v < 0; })) {
        layout.color = {-1, -1, -1};
      }
      points.reserve(e.count);
    }
    std::vector<double> values(e.properties.size(), 0.0);
    for (std::size_t row = 0; row < e.count; ++row) {
      if (format == Format::ascii) {
        if (!std::getline(in, line)) throw IoError("ply: truncated ascii body");
        std::istringstream ss(line);
        for (std::size_t i = 0; i < e.properties.size(); ++i) {
          const Property& p = e.properties[i];
          if (p.is_list) {
            double count = 0;
            if (!(ss >> count)) throw IoError("ply: malformed ascii row");
            for (std::size_t k = 0; k < std::size_t(count); ++k) {
              double skip;
              ss >> skip;
            }
            continue;
          }
          std::string token;
          if (!(ss >> token)) throw IoError("ply: malformed ascii row");
          try {
            values[i] = std::stod(token);
          } catch (const std::exception&) {
            if (token == "nan" || token == "inf" || token == "-inf") {
              values[i] = std::numeric_limits<double>::quiet_NaN();
            } else {
              throw IoError("ply: bad number '" + token + "'");
            }
          }
        }
      } else {
        for (std::size_t i = 0; i < e.properties.size(); ++i) {
          const Property& p = e.properties[i];
          char buf[8];
          if (p.is_list) {
            const std::size_t cs = type_size(p.count_type);
            if (!in.read(buf, std::streamsize(cs))) throw IoError("ply: truncated binary body");
            const auto count = std::size_t(decode(p.count_type, buf));
            in.seekg(std::streamoff(count * type_size(p.type)), std::ios::cur);
            continue;
          }
          const std::size_t sz = type_size(p.type);
          if (!in.read(buf, std::streamsize(sz))) throw IoError("ply: truncated binary body");
          values[i] = decode(p.type, buf);
        }
      }
      if (is_vertex) points.push_back(make_point(e, layout, values));
    }
  }
  return points;
}

void save_point_cloud(const std::filesystem::path& path, const std::vector<PointSample>& points,
                      bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("ply: cannot write " + path.string());
  out.precision(9);
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  auto to_byte = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  for (const PointSample& p : points) {
    if (binary) {
      for (int a = 0; a < 3; ++a) {
        const float f = static_cast<float>(p.position[a]);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
      }
      for (int a = 0; a < 3; ++a) {
        const std::uint8_t b = to_byte(p.color[a]);
        out.write(reinterpret_cast<const char*>(&b), 1);
      }
    } else {
      out << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z() << ' '
          << int(to_byte(p.color[0])) << ' ' << int(to_byte(p.color[1])) << ' '
          << int(to_byte(p.color[2])) << '\n';
    }
  }
  if (!out) throw IoError("ply: write failed for " + path.string());
}

}  // namespace volgs::io
