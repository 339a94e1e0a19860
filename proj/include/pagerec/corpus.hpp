#pragma once
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pagerec/doc_types.hpp"
#include "pagerec/error.hpp"
#include "pagerec/font5x7.hpp"
#include "pagerec/rng.hpp"
#include "pagerec/tensor.hpp"

namespace pagerec {

// Glyph cell width at a given text height (5 ink columns + 1 spacing column
// of the base font, scaled).
inline int glyph_advance(int height) {
  return std::max(2, int(std::lround(6.0 * height / 7.0)));
}

inline int glyph_ink_width(int height) {
  return std::max(1, int(std::lround(5.0 * height / 7.0)));
}

// Deterministic black-on-white rendering of a text line at the given height.
// Width is |text| * glyph_advance(height). Ink is 0.0, background 1.0.
inline Tensor<float> render_text_line(const std::string& text, int height) {
  if (height < 7) throw ConfigError("render_text_line: height must be >= 7");
  if (text.empty()) throw ConfigError("render_text_line: empty text");
  const int adv = glyph_advance(height);
  const int ink_w = glyph_ink_width(height);
  Tensor<float> out({1, height, int(text.size()) * adv}, 1.0f);
  for (size_t g = 0; g < text.size(); ++g) {
    const auto& rows = glyph5x7(text[g]);
    const int x0 = int(g) * adv;
    for (int y = 0; y < height; ++y) {
      const int src_r = std::min(6, y * 7 / height);
      const uint8_t bits = rows[size_t(src_r)];
      if (!bits) continue;
      for (int x = 0; x < ink_w; ++x) {
        const int src_c = std::min(4, x * 5 / ink_w);
        if (bits & (1 << (4 - src_c))) out.at(0, y, x0 + x) = 0.0f;
      }
    }
  }
  return out;
}

struct CorpusConfig {
  int page_w_min = 256, page_w_max = 320;
  int page_h_min = 208, page_h_max = 256;
  double two_column_prob = 0.5;
  int line_height_min = 10, line_height_max = 16;
  int target_lines = 8;       // per page
  double noise_stddev = 0.02; // Gaussian pixel noise, clipped to [0,1]
  int jitter_px = 0;          // per-glyph vertical jitter amplitude
  uint64_t seed = 0;

  void validate() const {
    if (page_w_min > page_w_max || page_h_min > page_h_max ||
        line_height_min > line_height_max)
      throw ConfigError("corpus config: degenerate range");
    if (line_height_min < 8) throw ConfigError("corpus config: line height must be >= 8");
    if (two_column_prob < 0 || two_column_prob > 1)
      throw ConfigError("corpus config: two_column_prob must be in [0,1]");
    if (noise_stddev < 0) throw ConfigError("corpus config: negative noise");
    if (target_lines < 1) throw ConfigError("corpus config: target_lines must be >= 1");
  }
};

namespace detail {

// Random words over the toy glyph set, filling at most max_chars characters.
inline std::string random_text(Rng& rng, int max_chars) {
  static const char kChars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string text;
  while (true) {
    const int len = rng.uniform_int(2, 7);
    const int need = int(text.size()) + (text.empty() ? 0 : 1) + len;
    if (need > max_chars) break;
    if (!text.empty()) text += ' ';
    for (int i = 0; i < len; ++i) text += kChars[size_t(rng.uniform_int(0, 35))];
  }
  if (text.empty())
    for (int i = 0; i < std::max(1, std::min(2, max_chars)); ++i)
      text += kChars[size_t(rng.uniform_int(0, 35))];
  return text;
}

// Paste a rendered line at (x0, y_top), with optional per-glyph vertical
// jitter. Jittered glyphs are drawn slightly shorter so ink never leaves the
// declared line box.
inline void paste_line(Tensor<float>& page, const std::string& text, int height,
                       int x0, int y_top, int jitter_px, Rng& rng) {
  if (jitter_px <= 0) {
    const Tensor<float> bmp = render_text_line(text, height);
    for (int y = 0; y < bmp.dim(1); ++y)
      for (int x = 0; x < bmp.dim(2); ++x)
        if (bmp.at(0, y, x) < 0.5f) page.at(0, y_top + y, x0 + x) = 0.0f;
    return;
  }
  const int adv = glyph_advance(height);
  const int gh = std::max(7, height - 2 * jitter_px);
  for (size_t g = 0; g < text.size(); ++g) {
    if (text[g] == ' ') continue;
    const Tensor<float> bmp = render_text_line(std::string(1, text[g]), gh);
    const int dy = jitter_px + rng.uniform_int(-jitter_px, jitter_px);
    const int gx = x0 + int(g) * adv;
    for (int y = 0; y < bmp.dim(1); ++y)
      for (int x = 0; x < std::min(bmp.dim(2), adv); ++x)
        if (bmp.at(0, y, x) < 0.5f) page.at(0, y_top + dy + y, gx + x) = 0.0f;
  }
}

}  // namespace detail

// Deterministic page synthesis: one or two columns of bitmap-font text lines
// with exact ground truth. Two-column pages share row bands across columns,
// so extending any left-column line to the page right edge crosses the
// right-column text (the recognizer's "when to stop" stressor).
inline PageSample generate_page(const CorpusConfig& cfg, const std::string& id) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, id));

  PageSample page;
  page.id = id;
  page.width = rng.uniform_int(cfg.page_w_min, cfg.page_w_max);
  page.height = rng.uniform_int(cfg.page_h_min, cfg.page_h_max);
  page.image = Tensor<float>({1, page.height, page.width}, 1.0f);

  const bool two_col = rng.bernoulli(cfg.two_column_prob);
  const int margin = 8;
  const int gutter = std::max(8, page.width / 24);

  struct Column {
    int x0, x1;
  };
  std::vector<Column> cols;
  if (two_col) {
    const int split = page.width / 2 + rng.uniform_int(-page.width / 16, page.width / 16);
    cols.push_back({margin, split - gutter / 2});
    cols.push_back({split + (gutter + 1) / 2, page.width - margin});
  } else {
    cols.push_back({margin, page.width - margin});
  }

  const int rows_wanted =
      two_col ? (cfg.target_lines + 1) / 2 : cfg.target_lines;
  int y = margin;
  for (int r = 0; r < rows_wanted; ++r) {
    const int h = rng.uniform_int(cfg.line_height_min, cfg.line_height_max);
    const int gap = rng.uniform_int(3, 10);
    if (y + h > page.height - margin) break;
    for (const Column& col : cols) {
      const int adv = glyph_advance(h);
      const int indent = rng.uniform_int(0, std::min(12, (col.x1 - col.x0) / 8));
      const int x_left = col.x0 + indent;
      const int max_chars = (col.x1 - x_left) / adv;
      if (max_chars < 1) continue;
      GroundTruthLine line;
      line.text = detail::random_text(rng, max_chars);
      line.height = h;
      line.x_left = x_left;
      line.y_bottom = y + h;
      detail::paste_line(page.image, line.text, h, x_left, y, cfg.jitter_px, rng);
      page.lines.push_back(std::move(line));
    }
    y += h + gap;
  }
  if (page.lines.empty())
    throw Error("generate_page: layout for page '" + id +
                "' could not fit a single line; check the config ranges");

  // Noise, then quantization to the 8-bit grid so PGM round-trips are exact.
  for (float& v : page.image.data) {
    double x = v;
    if (cfg.noise_stddev > 0) x += cfg.noise_stddev * rng.normal();
    x = std::clamp(x, 0.0, 1.0);
    v = float(std::lround(x * 255.0)) / 255.0f;
  }
  return page;
}

// ---- PGM (P5, 8-bit) ----

inline void write_pgm(const std::string& path, const Tensor<float>& image) {
  if (image.rank() != 3 || image.dim(0) != 1)
    throw DimensionError("write_pgm: image must be [1,H,W]");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "P5\n" << image.dim(2) << " " << image.dim(1) << "\n255\n";
  std::vector<unsigned char> row(size_t(image.dim(2)));
  for (int y = 0; y < image.dim(1); ++y) {
    for (int x = 0; x < image.dim(2); ++x)
      row[size_t(x)] = (unsigned char)std::clamp(
          long(std::lround(image.at(0, y, x) * 255.0)), 0L, 255L);
    f.write((const char*)row.data(), long(row.size()));
  }
  if (!f) throw IoError("short write: " + path);
}

inline Tensor<float> read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  auto next_token = [&]() -> std::string {
    std::string tok;
    char c;
    while (f.get(c)) {
      if (c == '#') {
        while (f.get(c) && c != '\n') {
        }
        continue;
      }
      if (std::isspace((unsigned char)c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok += c;
    }
    if (tok.empty()) throw FormatError("truncated PGM header: " + path);
    return tok;
  };
  if (next_token() != "P5") throw FormatError("not a binary PGM (P5): " + path);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw FormatError("bad PGM header: " + path);
  }
  if (w <= 0 || h <= 0 || maxval != 255)
    throw FormatError("unsupported PGM header in " + path);
  Tensor<float> img({1, h, w});
  std::vector<unsigned char> row(size_t(w));
  for (int y = 0; y < h; ++y) {
    f.read((char*)row.data(), long(row.size()));
    if (f.gcount() != long(row.size()))
      throw FormatError("truncated PGM pixel data: " + path);
    for (int x = 0; x < w; ++x) img.at(0, y, x) = float(row[size_t(x)]) / 255.0f;
  }
  return img;
}

// ---- Ground truth (gt.jsonl): one JSON record per page ----

inline nlohmann::json page_gt_to_json(const PageSample& page) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : page.lines)
    lines.push_back({{"x_left", l.x_left},
                     {"y_bottom", l.y_bottom},
                     {"height", l.height},
                     {"text", l.text}});
  return {{"id", page.id},
          {"width", page.width},
          {"height", page.height},
          {"lines", lines}};
}

inline void parse_gt_record(const nlohmann::json& rec, PageSample& page,
                            const std::string& context) {
  try {
    page.id = rec.at("id").get<std::string>();
    page.width = rec.at("width").get<int>();
    page.height = rec.at("height").get<int>();
    page.lines.clear();
    for (const auto& jl : rec.at("lines")) {
      GroundTruthLine l;
      l.x_left = jl.at("x_left").get<int>();
      l.y_bottom = jl.at("y_bottom").get<int>();
      l.height = jl.at("height").get<int>();
      l.text = jl.at("text").get<std::string>();
      if (l.height <= 0)
        throw FormatError(context + ": line height must be positive, got " +
                          std::to_string(l.height));
      page.lines.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(context + ": " + e.what());
  }
  if (page.width <= 0 || page.height <= 0)
    throw FormatError(context + ": non-positive page dimensions");
}

// Writes pages/<id>.pgm plus gt.jsonl under dir.
inline void write_corpus(const std::string& dir,
                         const std::vector<PageSample>& pages) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "pages");
  std::ofstream gt(fs::path(dir) / "gt.jsonl");
  if (!gt) throw IoError("cannot open for writing: " + dir + "/gt.jsonl");
  for (const auto& p : pages) {
    write_pgm((fs::path(dir) / "pages" / (p.id + ".pgm")).string(), p.image);
    gt << page_gt_to_json(p).dump() << "\n";
  }
  if (!gt) throw IoError("short write: " + dir + "/gt.jsonl");
}

// Ground truth only (no image loading).
inline std::vector<PageSample> read_corpus_gt(const std::string& dir) {
  const std::string gt_path =
      (std::filesystem::path(dir) / "gt.jsonl").string();
  std::ifstream gt(gt_path);
  if (!gt) throw IoError("cannot open: " + gt_path);
  std::vector<PageSample> pages;
  std::string line;
  int lineno = 0;
  while (std::getline(gt, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(gt_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    PageSample p;
    parse_gt_record(rec, p, gt_path + ":" + std::to_string(lineno));
    pages.push_back(std::move(p));
  }
  return pages;
}

inline std::vector<PageSample> read_corpus(const std::string& dir) {
  auto pages = read_corpus_gt(dir);
  for (auto& p : pages) {
    const std::string img_path =
        (std::filesystem::path(dir) / "pages" / (p.id + ".pgm")).string();
    p.image = read_pgm(img_path);
    if (p.image.dim(1) != p.height || p.image.dim(2) != p.width)
      throw FormatError(img_path + ": image size disagrees with gt.jsonl");
  }
  return pages;
}

inline std::vector<PageSample> generate_corpus(const CorpusConfig& cfg,
                                               int n_pages) {
  std::vector<PageSample> pages;
  pages.reserve(size_t(n_pages));
  for (int i = 0; i < n_pages; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "page%05d", i);
    pages.push_back(generate_page(cfg, buf));
  }
  return pages;
}

}  // namespace pagerec
