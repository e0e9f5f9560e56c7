#include "docforensics/net/model_io.hpp"

#include <bit>
#include <cstring>

#include "docforensics/image_io.hpp"

namespace docforensics::net {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const std::string& s) { out.insert(out.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : buf(b) {}
  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw ModelLoadError("model file truncated at byte " + std::to_string(pos));
  }
  std::uint8_t u8() {
    need(1);
    return buf[pos++];
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(buf[pos] | (buf[pos + 1] << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
    pos += n;
    return s;
  }
  bool done() const { return pos == buf.size(); }

 private:
  std::span<const std::uint8_t> buf;
  std::size_t pos = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelState& model) {
  Writer w;
  w.bytes("DFNM");
  w.u32(kModelFormatVersion);
  const std::string header =
      nlohmann::json{{"config", to_json(model.config)}, {"step", model.step}, {"seed", model.seed}}.dump();
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.bytes(header);
  w.u32(static_cast<std::uint32_t>(model.params.size()));
  for (const auto& [name, t] : model.params) {
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.u8(1);
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.data) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  return w.out;
}

ModelState deserialize_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(4) != "DFNM") throw ModelLoadError("not a model file (bad magic)");
  const auto version = r.u32();
  if (version != kModelFormatVersion) throw ModelLoadError("unsupported model format version " + std::to_string(version));
  ModelState m;
  try {
    const auto header = nlohmann::json::parse(r.str(r.u32()));
    m.config = config_from_json(header.at("config"));
    m.step = header.at("step").get<std::uint64_t>();
    m.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelLoadError(std::string("bad model header: ") + e.what());
  } catch (const ConfigMismatch& e) {
    throw ModelLoadError(e.what());
  }
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.str(r.u16());
    if (r.u8() != 1) throw ModelLoadError("tensor " + name + ": unsupported dtype");
    std::vector<int> shape(r.u8());
    for (auto& d : shape) d = static_cast<int>(r.u32());
    Tensor<float> t(shape);
    r.need(t.size() * 4);
    for (auto& v : t.data) v = std::bit_cast<float>(r.u32());
    m.params.emplace(name, std::move(t));
  }
  if (!r.done()) throw ModelLoadError("trailing bytes after the last tensor");

  const auto expected = init_model(m.config, 0);
  for (const auto& [name, t] : expected.params) {
    const auto it = m.params.find(name);
    if (it == m.params.end()) throw ModelLoadError("missing tensor " + name);
    if (it->second.shape != t.shape) {
      throw ModelLoadError("tensor " + name + " has shape " + shape_string(it->second.shape) + ", config needs " +
                           shape_string(t.shape));
    }
  }
  if (m.params.size() != expected.params.size()) throw ModelLoadError("unexpected extra tensors");
  return m;
}

void save_model(const ModelState& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_model(model));
}

ModelState load_model(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = io::read_file(path);
  } catch (const Error& e) {
    throw ModelLoadError(e.what());
  }
  return deserialize_model(bytes);
}

}  // namespace docforensics::net
