#include "fapforge/render.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <string_view>

namespace fapforge {

double size_scale(int index, int n) {
  if (n <= 1) return 1.0;
  return 0.4 + 0.6 * static_cast<double>(index + 1) / static_cast<double>(n);
}

int gray_level(int index, int n) {
  if (n <= 1) return 255;
  return 255 - index * 255 / (n - 1);
}

int stroke_gray_level(int index, int n) {
  if (n <= 1) return 0;
  return 200 - index * 200 / (n - 1);
}

double angle_degrees(int index, int n) {
  if (n <= 1) return 0;
  return static_cast<double>(index) * 360.0 / static_cast<double>(n);
}

namespace {

struct Point {
  double x = 0, y = 0;
};

// A closed polygon, filled and/or outlined.
struct Shape {
  std::vector<Point> points;
  std::optional<int> fill;
  std::optional<int> stroke;
  double stroke_width = 0;
};

struct Scene {
  int width = 0;
  int height = 0;
  std::vector<Shape> shapes;
};

std::vector<Point> regular(int sides, double start_deg) {
  std::vector<Point> pts;
  for (int i = 0; i < sides; ++i) {
    const double a = (start_deg + 360.0 * i / sides) * std::numbers::pi / 180.0;
    pts.push_back({std::cos(a), std::sin(a)});
  }
  return pts;
}

std::vector<Point> ellipse(double rx, double ry) {
  std::vector<Point> pts;
  for (int i = 0; i < 64; ++i) {
    const double a = 2 * std::numbers::pi * i / 64;
    pts.push_back({rx * std::cos(a), ry * std::sin(a)});
  }
  return pts;
}

std::optional<std::vector<Point>> raw_outline(std::string_view name);

// Outline of a named shape centered at the origin, scaled so its farthest
// point lies on the unit circle and any rotation stays inside the slot.
std::optional<std::vector<Point>> shape_outline(std::string_view name) {
  auto pts = raw_outline(name);
  if (!pts) return pts;
  double r = 0;
  for (const auto& p : *pts) r = std::max(r, std::hypot(p.x, p.y));
  if (name == "dot") r = 1;  // dots stay small
  for (auto& p : *pts) {
    p.x /= r;
    p.y /= r;
  }
  return pts;
}

std::optional<std::vector<Point>> raw_outline(std::string_view name) {
  if (name == "circle") return ellipse(1, 1);
  if (name == "oval") return ellipse(1, 0.62);
  if (name == "dot") return ellipse(0.3, 0.3);
  if (name == "triangle") return regular(3, -90);
  if (name == "square") return regular(4, 45);
  if (name == "pentagon") return regular(5, -90);
  if (name == "hexagon") return regular(6, 0);
  if (name == "diamond") return std::vector<Point>{{0, -1}, {0.65, 0}, {0, 1}, {-0.65, 0}};
  if (name == "rectangle") {
    return std::vector<Point>{{-0.95, -0.55}, {0.95, -0.55}, {0.95, 0.55}, {-0.95, 0.55}};
  }
  if (name == "trapezoid") {
    return std::vector<Point>{{-0.5, -0.55}, {0.5, -0.55}, {0.95, 0.55}, {-0.95, 0.55}};
  }
  if (name == "tee") {
    return std::vector<Point>{{-0.9, -0.9}, {0.9, -0.9}, {0.9, -0.45}, {0.25, -0.45},
                              {0.25, 0.9},  {-0.25, 0.9}, {-0.25, -0.45}, {-0.9, -0.45}};
  }
  if (name == "line") return std::vector<Point>{{-1, -0.07}, {1, -0.07}, {1, 0.07}, {-1, 0.07}};
  if (name == "broken-circle") {
    // Ring with a 60 degree gap on the right.
    std::vector<Point> pts;
    for (int i = 0; i <= 40; ++i) {
      const double a = (30.0 + 300.0 * i / 40) * std::numbers::pi / 180.0;
      pts.push_back({std::cos(a), std::sin(a)});
    }
    for (int i = 40; i >= 0; --i) {
      const double a = (30.0 + 300.0 * i / 40) * std::numbers::pi / 180.0;
      pts.push_back({0.8 * std::cos(a), 0.8 * std::sin(a)});
    }
    return pts;
  }
  return std::nullopt;
}

// Domain size and index of an attribute value, tolerant of profiles that
// lack the attribute.
int domain_size(const Catalog& cat, AttributeId a, std::string_view object) {
  return cat.has_attribute(a, object) ? cat.domain(a, object).size() : 1;
}

int domain_index(const Catalog& cat, AttributeId a, std::string_view object, Value v) {
  if (!cat.has_attribute(a, object)) return 0;
  const auto& values = cat.domain(a, object).values;
  const auto it = std::find(values.begin(), values.end(), v);
  if (it == values.end()) {
    throw LayoutError("value " + std::to_string(v) + " outside the " +
                      std::string(to_string(a)) + " domain");
  }
  return static_cast<int>(it - values.begin());
}

void add_panel(Scene& scene, const PanelSpec& panel, const Catalog& cat, const RenderStyle& style,
               double ox, double oy) {
  const Configuration& config = cat.configuration(panel.configuration);
  const double px = style.panel_size;
  for (int c = 0; c < static_cast<int>(config.components.size()); ++c) {
    const Component& comp = config.components[static_cast<std::size_t>(c)];
    const bool outline_only = comp.name == "line";
    const auto entities = panel.in_component(c);
    int rank = 0;
    for (const auto& e : entities) {
      if (e.slot < 0 || e.slot >= static_cast<int>(comp.slots.size())) {
        throw LayoutError("entity in slot " + std::to_string(e.slot) + " of component '" +
                          comp.name + "' which has " + std::to_string(comp.slots.size()) +
                          " slots");
      }
      const Value type = e.get(AttributeId::type);
      if (type == kNull) continue;  // absent
      const Box& box = comp.slots[static_cast<std::size_t>(e.slot)];
      const auto& types = cat.domain(AttributeId::type, comp.name);
      const int ti = domain_index(cat, AttributeId::type, comp.name, type);
      const std::string& label = types.labels[static_cast<std::size_t>(ti)];
      auto outline = shape_outline(label);
      if (!outline) throw LayoutError("no geometry for shape '" + label + "'");

      const double scale =
          size_scale(domain_index(cat, AttributeId::size, comp.name, e.get(AttributeId::size)),
                     domain_size(cat, AttributeId::size, comp.name)) *
          (comp.overlay ? std::pow(0.72, rank) : 1.0);
      ++rank;
      const double angle =
          angle_degrees(domain_index(cat, AttributeId::angle, comp.name, e.get(AttributeId::angle)),
                        domain_size(cat, AttributeId::angle, comp.name)) *
          std::numbers::pi / 180.0;
      const int ci = domain_index(cat, AttributeId::color, comp.name, e.get(AttributeId::color));
      const int cn = domain_size(cat, AttributeId::color, comp.name);
      const int ui =
          domain_index(cat, AttributeId::uniformity, comp.name, e.get(AttributeId::uniformity));

      const double cx = ox + (box.x0 + box.x1) / 2 * px;
      const double cy = oy + (box.y0 + box.y1) / 2 * px;
      const double radius = 0.45 * std::min(box.width(), box.height()) * px * scale;
      auto place = [&](double r) {
        std::vector<Point> pts;
        for (const auto& p : *outline) {
          const double x = p.x * std::cos(angle) - p.y * std::sin(angle);
          const double y = p.x * std::sin(angle) + p.y * std::cos(angle);
          pts.push_back({cx + r * x, cy + r * y});
        }
        return pts;
      };
      Shape s;
      s.points = place(radius);
      for (const auto& p : s.points) {
        const double eps = 1e-6;
        if (p.x < ox + box.x0 * px - eps || p.x > ox + box.x1 * px + eps ||
            p.y < oy + box.y0 * px - eps || p.y > oy + box.y1 * px + eps) {
          throw LayoutError("entity of shape '" + label + "' exceeds slot " +
                            std::to_string(e.slot) + " of component '" + comp.name + "'");
        }
      }
      if (outline_only) {
        s.stroke = stroke_gray_level(ci, cn);
        s.stroke_width = style.stroke_width * 1.5;
      } else {
        s.fill = gray_level(ci, cn);
        s.stroke = 0;
        s.stroke_width = style.stroke_width;
      }
      scene.shapes.push_back(s);
      // Non-uniform entities carry an inner outline.
      if (ui > 0) {
        Shape inner;
        inner.points = place(radius * 0.6);
        inner.stroke = 0;
        inner.stroke_width = style.stroke_width * ui;
        scene.shapes.push_back(inner);
      }
    }
  }
}

void add_rect(Scene& scene, double x0, double y0, double x1, double y1, std::optional<int> fill,
              std::optional<int> stroke, double width) {
  scene.shapes.push_back(Shape{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, fill, stroke, width});
}

// 5x7 bitmap glyphs.
const std::array<const char*, 7>& glyph(char c) {
  static const std::array<const char*, 7> digits[] = {
      {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."},  // 1
      {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"},  // 2
      {".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."},  // 3
      {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."},  // 4
      {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."},  // 5
      {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."},  // 6
      {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."},  // 7
      {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."},  // 8
  };
  static const std::array<const char*, 7> letter_n = {"#...#", "##..#", "#.#.#", "#..##",
                                                      "#...#", "#...#", "#...#"};
  static const std::array<const char*, 7> question = {".###.", "#...#", "....#", "...#.",
                                                      "..#..", ".....", "..#.."};
  if (c >= '1' && c <= '8') return digits[c - '1'];
  if (c == 'N') return letter_n;
  return question;
}

void add_glyph(Scene& scene, char c, double x, double y, double unit) {
  const auto& rows = glyph(c);
  for (int r = 0; r < 7; ++r) {
    for (int k = 0; k < 5; ++k) {
      if (rows[static_cast<std::size_t>(r)][k] == '#') {
        add_rect(scene, x + k * unit, y + r * unit, x + (k + 1) * unit, y + (r + 1) * unit, 0,
                 std::nullopt, 0);
      }
    }
  }
}

// Even-odd scanline fill sampled at pixel centers.
void fill_polygon(Image& img, const std::vector<Point>& pts, std::uint8_t value) {
  if (pts.size() < 3) return;
  double ymin = pts[0].y, ymax = pts[0].y;
  for (const auto& p : pts) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::floor(ymin)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(ymax)));
  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    const double sy = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point& a = pts[i];
      const Point& b = pts[(i + 1) % pts.size()];
      if ((a.y <= sy && b.y > sy) || (b.y <= sy && a.y > sy)) {
        xs.push_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      const int xa = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
      const int xb = std::min(img.width - 1, static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1);
      for (int x = xa; x <= xb; ++x) {
        img.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) +
                   static_cast<std::size_t>(x)] = value;
      }
    }
  }
}

void stroke_polygon(Image& img, const std::vector<Point>& pts, double width, std::uint8_t value) {
  const double h = width / 2;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % pts.size()];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    if (len > 0) {
      const double nx = -dy / len * h, ny = dx / len * h;
      fill_polygon(img, {{a.x + nx, a.y + ny}, {b.x + nx, b.y + ny}, {b.x - nx, b.y - ny},
                         {a.x - nx, a.y - ny}},
                   value);
    }
    fill_polygon(img, {{a.x - h, a.y - h}, {a.x + h, a.y - h}, {a.x + h, a.y + h}, {a.x - h, a.y + h}},
                 value);
  }
}

Image rasterize(const Scene& scene) {
  Image img{scene.width, scene.height,
            std::vector<std::uint8_t>(static_cast<std::size_t>(scene.width) *
                                          static_cast<std::size_t>(scene.height),
                                      255)};
  for (const auto& s : scene.shapes) {
    if (s.fill) fill_polygon(img, s.points, static_cast<std::uint8_t>(*s.fill));
    if (s.stroke) stroke_polygon(img, s.points, s.stroke_width, static_cast<std::uint8_t>(*s.stroke));
  }
  return img;
}

std::string gray(int g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", g, g, g);
  return buf;
}

std::string to_svg(const Scene& scene) {
  std::string out;
  char buf[64];
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(scene.width) +
         "\" height=\"" + std::to_string(scene.height) + "\" viewBox=\"0 0 " +
         std::to_string(scene.width) + " " + std::to_string(scene.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"rgb(255,255,255)\"/>\n";
  for (const auto& s : scene.shapes) {
    out += "<polygon points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", s.points[i].x, s.points[i].y);
      out += buf;
    }
    out += "\" fill=\"" + (s.fill ? gray(*s.fill) : std::string("none")) + "\"";
    if (s.stroke) {
      std::snprintf(buf, sizeof buf, "%.2f", s.stroke_width);
      out += " stroke=\"" + gray(*s.stroke) + "\" stroke-width=\"" + buf + "\"";
    }
    out += "/>\n";
  }
  out += "</svg>\n";
  return out;
}

Scene panel_scene(const PanelSpec& panel, const Catalog& cat, const RenderStyle& style) {
  Scene scene{style.panel_size, style.panel_size, {}};
  add_panel(scene, panel, cat, style, 0, 0);
  return scene;
}

Scene sheet_scene(const ItemSpec& item, const Catalog& cat, const RenderStyle& style) {
  const int p = style.panel_size;
  const int m = style.margin;
  const int rows = item.format.rows;
  const int cols = item.format.cols;
  const double unit = std::max(1.0, p / 80.0);
  const int label_h = static_cast<int>(7 * unit) + m / 2;
  const int grid_w = cols * p + (cols - 1) * m;
  const int strip_w = 4 * p + 3 * m;
  Scene scene;
  scene.width = 2 * m + std::max(grid_w, strip_w);
  const int strip_y = m + rows * p + (rows - 1) * m + 2 * m;
  const int meta_y = strip_y + 2 * (label_h + p) + m + m;
  const int meta_h = item.meta_options ? static_cast<int>(7 * unit) + 2 * m : 0;
  scene.height = meta_y + meta_h;

  for (int cell = 0; cell < rows * cols; ++cell) {
    const double x = m + (cell % cols) * (p + m) + (scene.width - 2 * m - grid_w) / 2;
    const double y = m + (cell / cols) * (p + m);
    if (cell < static_cast<int>(item.context.size())) {
      add_panel(scene, item.context[static_cast<std::size_t>(cell)], cat, style, x, y);
    }
    add_rect(scene, x, y, x + p, y + p, std::nullopt, 0, 1.0);
  }
  for (int k = 0; k < static_cast<int>(item.answers.size()); ++k) {
    const double x = m + (k % 4) * (p + m) + (scene.width - 2 * m - strip_w) / 2;
    const double y = strip_y + (k / 4) * (label_h + p + m);
    add_glyph(scene, static_cast<char>('1' + k), x + p / 2.0 - 2.5 * unit, y, unit);
    add_panel(scene, item.answers[static_cast<std::size_t>(k)], cat, style, x, y + label_h);
    add_rect(scene, x, y + label_h, x + p, y + label_h + p, std::nullopt, 0, 1.0);
  }
  if (item.meta_options) {
    const double box = 7 * unit + m;
    const char labels[] = {'N', '?'};
    for (int k = 0; k < 2; ++k) {
      const double x = m + k * (box + m);
      add_rect(scene, x, meta_y, x + box, meta_y + box, std::nullopt, 0, 1.0);
      add_glyph(scene, labels[k], x + box / 2 - 2.5 * unit, meta_y + m / 2.0, unit);
    }
  }
  return scene;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset = 0;
};

void png_read_from_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + length > cur->bytes->size()) png_error(png, "truncated png");
  std::copy_n(cur->bytes->data() + cur->offset, length, data);
  cur->offset += length;
}


}  // namespace

namespace {

// libpng reports errors by longjmp; these helpers keep only trivially
// destructible locals between setjmp and the library calls.
bool encode_rows(const Image& image, std::vector<std::uint8_t>* out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, image.pixels.data() + static_cast<std::size_t>(y) *
                                                 static_cast<std::size_t>(image.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

const char* decode_rows(ReadCursor* cursor, Image* img) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return "cannot create reader";
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "malformed data";
  }
  png_set_read_fn(png, cursor, png_read_from_vector);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "expected 8-bit grayscale";
  }
  img->width = static_cast<int>(png_get_image_width(png, info));
  img->height = static_cast<int>(png_get_image_height(png, info));
  img->pixels.resize(static_cast<std::size_t>(img->width) * static_cast<std::size_t>(img->height));
  for (int y = 0; y < img->height; ++y) {
    png_read_row(png, img->pixels.data() + static_cast<std::size_t>(y) *
                                               static_cast<std::size_t>(img->width),
                 nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return nullptr;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<std::uint8_t> out;
  if (!encode_rows(image, &out)) throw Error("png: encoding failed");
  return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error("png: bad signature");
  ReadCursor cursor{&bytes, 0};
  Image img;
  if (const char* err = decode_rows(&cursor, &img)) throw Error(std::string("png: ") + err);
  return img;
}

Image render_panel(const PanelSpec& panel, const Catalog& cat, const RenderStyle& style) {
  return rasterize(panel_scene(panel, cat, style));
}

std::string render_panel_svg(const PanelSpec& panel, const Catalog& cat, const RenderStyle& style) {
  return to_svg(panel_scene(panel, cat, style));
}

Sheet render_item_sheet(const ItemSpec& item, const Catalog& cat, const RenderStyle& style) {
  const Scene scene = sheet_scene(item, cat, style);
  return Sheet{rasterize(scene), to_svg(scene)};
}

namespace {

void write_bytes(const std::filesystem::path& file, std::string_view bytes) {
  std::ofstream out(file, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + file.string());
}

void write_png(const std::filesystem::path& file, const Image& img) {
  const auto bytes = encode_png(img);
  write_bytes(file, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace

std::vector<std::string> write_item_images(const ItemSpec& item, const std::string& id,
                                           const std::filesystem::path& dir, const Catalog& cat,
                                           const RenderStyle& style) {
  std::vector<std::string> files;
  for (std::size_t k = 0; k < item.context.size(); ++k) {
    files.push_back(id + "_ctx" + std::to_string(k) + ".png");
    write_png(dir / files.back(), render_panel(item.context[k], cat, style));
  }
  for (std::size_t k = 0; k < item.answers.size(); ++k) {
    files.push_back(id + "_ans" + std::to_string(k) + ".png");
    write_png(dir / files.back(), render_panel(item.answers[k], cat, style));
  }
  const Sheet sheet = render_item_sheet(item, cat, style);
  files.push_back(id + "_sheet.png");
  write_png(dir / files.back(), sheet.raster);
  files.push_back(id + "_sheet.svg");
  write_bytes(dir / files.back(), sheet.svg);
  return files;
}

}  // namespace fapforge
