#include "docforensics/tamper_synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "docforensics/bitmap_font.hpp"
#include "docforensics/errors.hpp"
#include "docforensics/image_io.hpp"
#include "docforensics/jpeg_codec.hpp"

namespace docforensics::tamper_synth {

std::string to_string(TamperOp op) {
  switch (op) {
    case TamperOp::splice: return "splice";
    case TamperOp::copy_move: return "copy_move";
    case TamperOp::erase: return "erase";
    case TamperOp::crop_noise_pasteback: return "crop_noise_pasteback";
    case TamperOp::char_stretch: return "char_stretch";
    case TamperOp::photometric: return "photometric";
  }
  return "unknown";
}

std::string to_string(Label label) { return label == Label::clean ? "clean" : "tampered"; }

TamperOp parse_op(const std::string& name) {
  for (auto op : {TamperOp::splice, TamperOp::copy_move, TamperOp::erase, TamperOp::crop_noise_pasteback,
                  TamperOp::char_stretch, TamperOp::photometric}) {
    if (to_string(op) == name) return op;
  }
  throw InvalidArgument("unknown tamper op: " + name);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined state
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

nlohmann::json region_json(const Region& r) {
  nlohmann::json j = {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}};
  if (!r.label.empty()) j["label"] = r.label;
  return j;
}

Region region_from_json(const nlohmann::json& j) {
  Region r{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>(), "", 1.0};
  if (j.contains("label")) r.label = j.at("label").get<std::string>();
  return r;
}

void require_in_bounds(const Region& r, const Raster& image, const char* what) {
  if (!r.within(image.width(), image.height())) {
    throw OutOfBounds(std::string(what) + " region (" + std::to_string(r.x) + "," + std::to_string(r.y) + " " +
                      std::to_string(r.w) + "x" + std::to_string(r.h) + ") outside " +
                      std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
}

GrayMap region_mask(int width, int height, const Region& r) {
  GrayMap mask(width, height);
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) mask.at(x, y) = 1.0;
  return mask;
}

std::uint8_t median_u8(std::vector<std::uint8_t>& v) {
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Per-channel median of pixels that lie in [outer] but not in [inner].
std::optional<std::array<std::uint8_t, 3>> ring_median(const Raster& image, const Region& inner, const Region& outer) {
  std::vector<std::uint8_t> ch[3];
  const Region o = outer.clamped_to(image.width(), image.height());
  for (int y = o.y; y < o.bottom(); ++y)
    for (int x = o.x; x < o.right(); ++x) {
      if (inner.contains(x, y)) continue;
      for (int c = 0; c < 3; ++c) ch[c].push_back(image.at(x, y, c));
    }
  if (ch[0].empty()) return std::nullopt;
  return std::array<std::uint8_t, 3>{median_u8(ch[0]), median_u8(ch[1]), median_u8(ch[2])};
}

Region grow(const Region& r, int dx, int dy) {
  Region g = r;
  g.x -= dx;
  g.y -= dy;
  g.w += 2 * dx;
  g.h += 2 * dy;
  return g;
}

}  // namespace

nlohmann::json to_json(const TamperSpec& spec) {
  nlohmann::json params;
  const auto& p = spec.params;
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : p.regions) regions.push_back(region_json(r));
  params["regions"] = regions;
  switch (spec.op) {
    case TamperOp::splice:
      params["destination"] = {{"x", p.destination->x}, {"y", p.destination->y}};
      params["erase_first"] = p.erase_first;
      params["donor"] = p.donor;
      break;
    case TamperOp::copy_move:
      params["destination"] = {{"x", p.destination->x}, {"y", p.destination->y}};
      break;
    case TamperOp::erase:
      params["fill"] = p.fill.mode == FillMode::flat ? "flat" : "background_median";
      params["color"] = p.fill.color;
      params["trace"] = p.fill.trace;
      break;
    case TamperOp::crop_noise_pasteback:
      params["sigma"] = p.sigma;
      params["noise_sigma"] = p.noise_sigma;
      break;
    case TamperOp::char_stretch:
      params["factor"] = p.factor;
      break;
    case TamperOp::photometric:
      params["brightness"] = p.brightness;
      params["contrast"] = p.contrast;
      break;
  }
  return {{"op", to_string(spec.op)}, {"params", params}, {"seed", spec.seed}};
}

namespace {

TamperSpec spec_from_json(const nlohmann::json& j) {
  TamperSpec spec;
  spec.op = parse_op(j.at("op").get<std::string>());
  spec.seed = j.at("seed").get<std::uint64_t>();
  const auto& p = j.at("params");
  for (const auto& r : p.at("regions")) spec.params.regions.push_back(region_from_json(r));
  if (p.contains("destination")) spec.params.destination = Point{p["destination"]["x"], p["destination"]["y"]};
  spec.params.erase_first = p.value("erase_first", false);
  spec.params.donor = p.value("donor", std::string{});
  if (p.contains("fill")) spec.params.fill.mode = p["fill"] == "flat" ? FillMode::flat : FillMode::background_median;
  if (p.contains("color")) spec.params.fill.color = p["color"].get<std::array<std::uint8_t, 3>>();
  spec.params.fill.trace = p.value("trace", false);
  spec.params.sigma = p.value("sigma", 0.0);
  spec.params.noise_sigma = p.value("noise_sigma", 0.0);
  spec.params.factor = p.value("factor", 1.0);
  spec.params.brightness = p.value("brightness", 0);
  spec.params.contrast = p.value("contrast", 1.0);
  return spec;
}

}  // namespace

// ---------------------------------------------------------------- ops

LabeledSample splice(const Raster& src, const Raster& donor, const Region& donor_region, Point dst) {
  require_in_bounds(donor_region, donor, "donor");
  const Region target{dst.x, dst.y, donor_region.w, donor_region.h};
  require_in_bounds(target, src, "destination");
  LabeledSample s;
  s.image = src;
  for (int y = 0; y < donor_region.h; ++y)
    for (int x = 0; x < donor_region.w; ++x)
      for (int c = 0; c < 3; ++c) s.image.at(dst.x + x, dst.y + y, c) = donor.at(donor_region.x + x, donor_region.y + y, c);
  s.mask = region_mask(src.width(), src.height(), target);
  s.spec.op = TamperOp::splice;
  s.spec.params.regions = {donor_region};
  s.spec.params.destination = dst;
  s.label = Label::tampered;
  return s;
}

LabeledSample copy_move(const Raster& src, const Region& from, Point to) {
  LabeledSample s = splice(src, src, from, to);  // splice reads from the untouched `src`
  s.spec.op = TamperOp::copy_move;
  return s;
}

LabeledSample erase(const Raster& src, const Region& region, const EraseFill& fill) {
  require_in_bounds(region, src, "erase");
  std::array<std::uint8_t, 3> colour = fill.color;
  if (fill.mode == FillMode::background_median) {
    if (auto m = ring_median(src, region, grow(region, kMedianRingWidth, kMedianRingWidth))) colour = *m;
  }
  LabeledSample s;
  s.image = src;
  for (int y = region.y; y < region.bottom(); ++y)
    for (int x = region.x; x < region.right(); ++x)
      for (int c = 0; c < 3; ++c) {
        s.image.at(x, y, c) = fill.trace ? clamp_u8((1.0 - kTraceAlpha) * colour[c] + kTraceAlpha * src.at(x, y, c))
                                         : colour[c];
      }
  s.mask = region_mask(src.width(), src.height(), region);
  s.spec.op = TamperOp::erase;
  s.spec.params.regions = {region};
  s.spec.params.fill = fill;
  s.label = Label::tampered;
  return s;
}

LabeledSample crop_noise_pasteback(const Raster& src, const Region& region, double sigma, double noise_sigma,
                                   std::uint64_t seed) {
  require_in_bounds(region, src, "crop");
  if (sigma < 0.0 || noise_sigma < 0.0) throw InvalidArgument("sigma must be non-negative");
  Raster patch = gaussian_blur(crop(src, region), sigma);
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (auto& v : patch.data()) v = clamp_u8(v + noise(rng));
  }
  LabeledSample s;
  s.image = src;
  for (int y = 0; y < region.h; ++y)
    for (int x = 0; x < region.w; ++x)
      for (int c = 0; c < 3; ++c) s.image.at(region.x + x, region.y + y, c) = patch.at(x, y, c);
  s.mask = region_mask(src.width(), src.height(), region);
  s.spec.op = TamperOp::crop_noise_pasteback;
  s.spec.params.regions = {region};
  s.spec.params.sigma = sigma;
  s.spec.params.noise_sigma = noise_sigma;
  s.spec.seed = seed;
  s.label = Label::tampered;
  return s;
}

LabeledSample char_stretch(const Raster& src, const Region& region, double factor) {
  require_in_bounds(region, src, "stretch");
  if (!(factor >= 0.5 && factor <= 2.0)) throw InvalidArgument("stretch factor must lie in [0.5, 2]");
  const Region inner = region.w > 2 && region.h > 2 ? grow(region, -1, -1) : Region{};
  const auto background = ring_median(src, inner, region).value_or(std::array<std::uint8_t, 3>{255, 255, 255});

  LabeledSample s;
  s.image = src;
  const double half = region.w / 2.0;
  for (int i = 0; i < region.w; ++i) {
    const double sx = (i + 0.5 - half) / factor + half - 0.5;
    const bool outside = sx < -0.5 || sx > region.w - 0.5;
    const double cx = std::clamp(sx, 0.0, region.w - 1.0);
    const int x0 = static_cast<int>(std::floor(cx));
    const int x1 = std::min(x0 + 1, region.w - 1);
    const double t = cx - x0;
    for (int y = region.y; y < region.bottom(); ++y)
      for (int c = 0; c < 3; ++c) {
        s.image.at(region.x + i, y, c) =
            outside ? background[c]
                    : clamp_u8(src.at(region.x + x0, y, c) * (1.0 - t) + src.at(region.x + x1, y, c) * t);
      }
  }
  s.mask = region_mask(src.width(), src.height(), region);
  s.spec.op = TamperOp::char_stretch;
  s.spec.params.regions = {region};
  s.spec.params.factor = factor;
  s.label = Label::tampered;
  return s;
}

LabeledSample photometric(const Raster& src, int brightness, double contrast) {
  if (brightness < -64 || brightness > 64) throw InvalidArgument("brightness must lie in [-64, 64]");
  if (!(contrast >= 0.5 && contrast <= 2.0)) throw InvalidArgument("contrast must lie in [0.5, 2]");
  LabeledSample s;
  s.image = src;
  for (auto& v : s.image.data()) v = clamp_u8(contrast * (v - 128.0) + 128.0 + brightness);
  s.mask = GrayMap(src.width(), src.height());
  s.spec.op = TamperOp::photometric;
  s.spec.params.brightness = brightness;
  s.spec.params.contrast = contrast;
  s.label = Label::clean;
  return s;
}

// ---------------------------------------------------------------- documents

namespace {

const char* const kNames[] = {"JOHN SMITH", "LI WEI", "ANNA KOWAL", "MARIA GARCIA", "WANG FANG",
                              "DAVID CHEN", "SARA NOOR", "ZHANG MIN", "OMAR HADI", "EVA NOVAK"};
const char* const kTitles[] = {"STATEMENT", "INVOICE", "RECEIPT", "PAYMENT NOTICE", "CONFIRMATION"};

std::string digits(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> d(0, 9);
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + d(rng)));
  return s;
}

std::string field_value(const std::string& field, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 9);
  if (field == "date") {
    std::uniform_int_distribution<int> month(1, 12), day(1, 28);
    char buf[32];
    std::snprintf(buf, sizeof buf, "20%02d-%02d-%02d", 10 + pick(rng), month(rng), day(rng));
    return buf;
  }
  if (field == "name") return kNames[pick(rng)];
  if (field == "account") return digits(rng, 4) + " " + digits(rng, 4) + " " + digits(rng, 4);
  if (field == "amount") {
    std::uniform_int_distribution<int> thousands(1, 99);
    return std::to_string(thousands(rng)) + "," + digits(rng, 3) + "." + digits(rng, 2);
  }
  if (field == "invoice") return "#" + digits(rng, 6);
  return digits(rng, 3) + "-" + digits(rng, 4) + "-" + digits(rng, 4);  // phone
}

}  // namespace

RenderedDocument render_document(const DocumentStyle& style, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bg(style.background_min, style.background_max);
  std::uniform_int_distribution<int> tint(-2, 2);
  const int base = bg(rng);
  RenderedDocument doc;
  doc.image = Raster(style.width, style.height);
  const std::uint8_t r = clamp_u8(base + tint(rng)), g = clamp_u8(base + tint(rng)), b = clamp_u8(base + tint(rng));
  for (int y = 0; y < style.height; ++y)
    for (int x = 0; x < style.width; ++x) doc.image.set_rgb(x, y, r, g, b);

  font::TextStyle text;
  text.scale = style.scale;
  std::uniform_int_distribution<int> ink(15, 60);
  const auto ink_level = static_cast<std::uint8_t>(ink(rng));
  text.ink[0] = text.ink[1] = ink_level;
  text.ink[2] = static_cast<std::uint8_t>(std::min(255, ink_level + 10));

  const int line_height = font::text_height(text);
  const int pitch = line_height * 2 + style.scale * 2;
  std::uniform_int_distribution<int> margin_dist(3 * style.scale, 10 * style.scale);
  const int margin = margin_dist(rng);
  int y = margin;

  std::uniform_int_distribution<int> title_pick(0, 4);
  const Region title = font::draw_text(doc.image, margin, y, kTitles[title_pick(rng)], text);
  if (title.w > 0) doc.lines.push_back(title);
  y += pitch;

  const std::vector<std::string> fields = {"date", "name", "account", "amount", "invoice", "phone"};
  for (const auto& field : fields) {
    if (y + line_height > style.height - style.scale) break;
    std::string key = field;
    std::transform(key.begin(), key.end(), key.begin(), ::toupper);
    key += ":";
    const std::string value = field_value(field, rng);
    const int value_x = margin + font::text_width(key, text) + 2 * font::advance(text);
    const Region k = font::draw_text(doc.image, margin, y, key, text);
    Region v = font::draw_text(doc.image, value_x, y, value, text);
    if (k.w > 0 && v.w > 0) {
      Region line{k.x, std::min(k.y, v.y), v.right() - k.x, std::max(k.bottom(), v.bottom()) - std::min(k.y, v.y),
                  field, 1.0};
      doc.lines.push_back(line);
      v.label = field;
      doc.fields.push_back(v);
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (value[i] == ' ') continue;
      // Redraw onto a scratch raster to find this glyph's ink box.
      Raster scratch(style.width, style.height, 255);
      Region gbox = font::draw_text(scratch, value_x + static_cast<int>(i) * font::advance(text), y,
                                    std::string_view(&value[i], 1), text);
      if (gbox.w == 0) continue;
      gbox.label = std::string(1, value[i]);
      doc.glyphs.push_back(gbox);
    }
    y += pitch;
  }

  if (style.scan_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, style.scan_noise_sigma);
    for (int py = 0; py < style.height; ++py)
      for (int px = 0; px < style.width; ++px) {
        const double n = noise(rng);
        for (int c = 0; c < 3; ++c) doc.image.at(px, py, c) = clamp_u8(doc.image.at(px, py, c) + n);
      }
  }
  if (!style.jpeg_qualities.empty()) {
    std::uniform_int_distribution<std::size_t> q(0, style.jpeg_qualities.size() - 1);
    doc.jpeg_quality = style.jpeg_qualities[q(rng)];
    doc.image = codec::jpeg_roundtrip(doc.image, doc.jpeg_quality);
  }
  return doc;
}

// ---------------------------------------------------------------- corpus

int CorpusConfig::clean_count() const {
  return imbalance > 0.0 ? static_cast<int>(std::lround(imbalance * n_tampered)) : n_clean;
}

namespace {

Region union_box(const Region& a, const Region& b) {
  const int x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  return Region{x0, y0, std::max(a.right(), b.right()) - x0, std::max(a.bottom(), b.bottom()) - y0, a.label, 1.0};
}

// Glyphs of one field value, in reading order.
std::vector<Region> glyphs_in(const RenderedDocument& doc, const Region& field) {
  std::vector<Region> out;
  for (const auto& g : doc.glyphs) {
    if (field.contains(g.center_x(), g.center_y())) out.push_back(g);
  }
  return out;
}

// A run of 1..max_len consecutive glyphs from a random field.
Region pick_glyph_run(const RenderedDocument& doc, std::mt19937_64& rng, int max_len, bool digits_only = false) {
  std::vector<Region> fields;
  for (const auto& f : doc.fields) {
    if (!digits_only || f.label == "amount" || f.label == "account" || f.label == "date" || f.label == "phone") {
      fields.push_back(f);
    }
  }
  if (fields.empty()) fields = doc.fields;
  std::uniform_int_distribution<std::size_t> fpick(0, fields.size() - 1);
  const auto glyphs = glyphs_in(doc, fields[fpick(rng)]);
  std::uniform_int_distribution<int> len_pick(1, max_len);
  const int len = std::min<int>(len_pick(rng), static_cast<int>(glyphs.size()));
  std::uniform_int_distribution<std::size_t> start_pick(0, glyphs.size() - static_cast<std::size_t>(len));
  const std::size_t start = start_pick(rng);
  Region run = glyphs[start];
  for (std::size_t i = start + 1; i < start + static_cast<std::size_t>(len); ++i) run = union_box(run, glyphs[i]);
  return run;
}

Region fit(Region r, int width, int height) {
  r.w = std::min(r.w, width);
  r.h = std::min(r.h, height);
  r.x = std::clamp(r.x, 0, width - r.w);
  r.y = std::clamp(r.y, 0, height - r.h);
  return r;
}

TamperOp pick_op(const CorpusConfig& config, std::mt19937_64& rng) {
  std::vector<TamperOp> ops;
  std::vector<double> weights;
  for (const auto& [op, w] : config.op_mix) {
    if (op == TamperOp::photometric || w <= 0.0) continue;
    ops.push_back(op);
    weights.push_back(w);
  }
  if (ops.empty()) throw InvalidArgument("op mix has no tampering op");
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  return ops[d(rng)];
}

LabeledSample make_tampered(const CorpusConfig& config, const RenderedDocument& doc, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x7A));
  const Raster& src = doc.image;
  const int W = src.width(), H = src.height();
  const TamperOp op = pick_op(config, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabeledSample s;

  switch (op) {
    case TamperOp::splice: {
      DocumentStyle donor_style = config.style;
      donor_style.jpeg_qualities = {config.donor_quality};
      const auto donor_seed = mix_seed(seed, 0xD0);
      const RenderedDocument donor = render_document(donor_style, donor_seed);
      const Region target = fit(grow(pick_glyph_run(doc, rng, 2, true), 1, 1), W, H);
      Region donor_region = fit(grow(pick_glyph_run(donor, rng, 2, true), 1, 1), donor.image.width(), donor.image.height());
      const Point dst{std::clamp(target.x, 0, W - donor_region.w), std::clamp(target.y, 0, H - donor_region.h)};
      const bool erase_first = unit(rng) < 0.3;
      Raster base = src;
      GrayMap erase_mask;
      if (erase_first) {
        auto erased = erase(src, target, EraseFill{});
        base = std::move(erased.image);
        erase_mask = std::move(erased.mask);
      }
      s = splice(base, donor.image, donor_region, dst);
      if (erase_first) {
        for (std::size_t i = 0; i < s.mask.values().size(); ++i)
          s.mask.values()[i] = std::max(s.mask.values()[i], erase_mask.values()[i]);
        s.spec.params.regions.push_back(target);
      }
      s.spec.params.erase_first = erase_first;
      s.spec.params.donor = "render seed=" + std::to_string(donor_seed) + " quality=" + std::to_string(config.donor_quality);
      break;
    }
    case TamperOp::copy_move: {
      const Region from = fit(grow(pick_glyph_run(doc, rng, 2), 1, 1), W, H);
      Region target = fit(grow(pick_glyph_run(doc, rng, 1), 1, 1), W, H);
      Point to{std::clamp(target.x, 0, W - from.w), std::clamp(target.y, 0, H - from.h)};
      if (to.x == from.x && to.y == from.y) to.x = std::clamp(to.x + font::advance({}) + 1, 0, W - from.w);
      s = copy_move(src, from, to);
      break;
    }
    case TamperOp::erase: {
      const Region target = fit(grow(pick_glyph_run(doc, rng, 2), 1, 1), W, H);
      EraseFill fill;
      fill.trace = unit(rng) < 0.5;
      s = erase(src, target, fill);
      break;
    }
    case TamperOp::crop_noise_pasteback: {
      std::vector<Region> fields = doc.fields;
      std::uniform_int_distribution<std::size_t> fpick(0, fields.size() - 1);
      const Region target = fit(grow(fields[fpick(rng)], 2, 2), W, H);
      std::uniform_real_distribution<double> blur(1.0, 2.0), noise(2.0, 4.0);
      const double sigma = blur(rng), noise_sigma = noise(rng);
      s = crop_noise_pasteback(src, target, sigma, noise_sigma, mix_seed(seed, 0xC5));
      break;
    }
    case TamperOp::char_stretch: {
      const Region glyph = pick_glyph_run(doc, rng, 1);
      const double factors[] = {0.8, 0.9, 1.1, 1.2};
      std::uniform_int_distribution<int> fpick(0, 3);
      const double factor = factors[fpick(rng)];
      const int pad = static_cast<int>(std::ceil(glyph.w * 0.1)) + 1;
      const Region target = fit(grow(glyph, pad, 1), W, H);
      s = char_stretch(src, target, factor);
      break;
    }
    case TamperOp::photometric:
      break;
  }
  s.spec.seed = seed;
  return s;
}

}  // namespace

LabeledSample make_sample(const CorpusConfig& config, int index) {
  const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(index));
  const RenderedDocument doc = render_document(config.style, seed);
  if (index >= config.clean_count()) return make_tampered(config, doc, seed);

  std::mt19937_64 rng(mix_seed(seed, 0xC1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int brightness = 0;
  double contrast = 1.0;
  if (unit(rng) < config.photometric_rate) {
    std::uniform_int_distribution<int> b(-20, 0);
    std::uniform_real_distribution<double> c(0.9, 1.1);
    brightness = b(rng);
    contrast = std::round(c(rng) * 100.0) / 100.0;
  }
  LabeledSample s = photometric(doc.image, brightness, contrast);
  s.spec.seed = seed;
  return s;
}

nlohmann::json to_json(const ManifestRow& row) {
  return {{"id", row.id}, {"path", row.path}, {"mask_path", row.mask_path}, {"label", to_string(row.label)},
          {"spec", to_json(row.spec)}};
}

ManifestRow manifest_row_from_json(const nlohmann::json& j) {
  ManifestRow row;
  row.id = j.at("id").get<std::string>();
  row.path = j.at("path").get<std::string>();
  row.mask_path = j.at("mask_path").get<std::string>();
  row.label = j.at("label").get<std::string>() == "tampered" ? Label::tampered : Label::clean;
  row.spec = spec_from_json(j.at("spec"));
  return row;
}

std::vector<ManifestRow> generate_corpus(const CorpusConfig& config, const std::filesystem::path& out_dir) {
  if (config.clean_count() <= 0 && config.n_tampered <= 0) throw InvalidArgument("corpus counts must be positive");
  if (config.clean_count() < 0 || config.n_tampered < 0) throw InvalidArgument("corpus counts must be positive");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec) throw IoError("cannot create corpus directory " + out_dir.string() + ": " + ec.message());

  const int total = config.clean_count() + config.n_tampered;
  std::vector<ManifestRow> rows;
  rows.reserve(static_cast<std::size_t>(total));
  std::ostringstream manifest;
  for (int i = 0; i < total; ++i) {
    const LabeledSample s = make_sample(config, i);
    char id[16];
    std::snprintf(id, sizeof id, "s%05d", i);
    ManifestRow row{id, std::string("images/") + id + ".png", std::string("masks/") + id + ".png", s.label, s.spec};
    io::write_file_atomic(out_dir / row.path, io::encode_png(s.image));
    io::write_file_atomic(out_dir / row.mask_path, io::encode_png_mask(s.mask));
    manifest << to_json(row).dump() << '\n';
    rows.push_back(std::move(row));
  }
  io::write_text_atomic(out_dir / "manifest.jsonl", manifest.str());
  return rows;
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  std::vector<ManifestRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(manifest_row_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad manifest line in " + manifest_path.string() + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace docforensics::tamper_synth
