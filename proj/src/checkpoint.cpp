#include "gerl/checkpoint.hpp"

#include <bit>
#include <fstream>

#include <json.hpp>

#include "gerl/error.hpp"

namespace gerl {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
      (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
  return true;
}

std::uint32_t narrow(std::size_t v, const char* what) {
  if (v > UINT32_MAX) throw ContractError(std::string("checkpoint: ") + what + " exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const ParameterSet<T>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& p : params) {
    put_u32(out, narrow(p->name().size(), "name length"));
    out.write(p->name().data(), static_cast<std::streamsize>(p->name().size()));
    put_u32(out, narrow(p->shape().size(), "rank"));
    for (auto d : p->shape()) put_u32(out, narrow(d, "dimension"));
    for (T v : p->value().values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<CheckpointEntry> entries;
  std::uint32_t name_len = 0;
  auto truncated = [&] { return std::runtime_error("truncated checkpoint " + path.string()); };
  while (get_u32(in, name_len)) {
    CheckpointEntry e;
    e.name.resize(name_len);
    if (!in.read(e.name.data(), name_len)) throw truncated();
    std::uint32_t rank = 0;
    if (!get_u32(in, rank)) throw truncated();
    std::size_t count = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      std::uint32_t d = 0;
      if (!get_u32(in, d)) throw truncated();
      e.shape.push_back(d);
      count *= d;
    }
    e.values.resize(count);
    for (auto& v : e.values) {
      std::uint32_t bits = 0;
      if (!get_u32(in, bits)) throw truncated();
      v = std::bit_cast<float>(bits);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

template <typename T>
void load_checkpoint(const std::filesystem::path& path, ParameterSet<T>& params) {
  auto entries = read_checkpoint(path);
  if (entries.size() != params.size()) {
    throw ConfigError("checkpoint has " + std::to_string(entries.size()) + " arrays, model has " +
                      std::to_string(params.size()));
  }
  for (auto& e : entries) {
    auto* p = params.find(e.name);
    if (!p) throw ConfigError("checkpoint array '" + e.name + "' is not a model parameter");
    if (p->shape() != e.shape) {
      throw ConfigError("checkpoint array '" + e.name + "' has shape " + shape_string(e.shape) + ", model expects " +
                        shape_string(p->shape()));
    }
    T* dst = p->value().data();
    for (std::size_t i = 0; i < e.values.size(); ++i) dst[i] = static_cast<T>(e.values[i]);
  }
}

std::string precision_name(Precision p) { return p == Precision::kFloat64 ? "f64" : "f32"; }

Precision parse_precision(const std::string& name) {
  if (name == "f32") return Precision::kFloat32;
  if (name == "f64") return Precision::kFloat64;
  throw ConfigError("unknown precision '" + name + "' (expected f32 or f64)");
}

void write_checkpoint_meta(const std::filesystem::path& path, const CheckpointMeta& meta) {
  nlohmann::json j;
  j["config"] = meta.config;
  j["seed"] = meta.config.seed;
  j["sizes"] = {{"vocab", meta.sizes.vocab},
                {"topics", meta.sizes.topics},
                {"user_rows", meta.sizes.user_rows},
                {"news_rows", meta.sizes.news_rows}};
  j["precision"] = precision_name(meta.precision);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CheckpointMeta meta;
  try {
    auto j = nlohmann::json::parse(in);
    meta.config = j.at("config").get<ModelConfig>();
    const auto& s = j.at("sizes");
    meta.sizes = {s.at("vocab").get<std::size_t>(), s.at("topics").get<std::size_t>(),
                  s.at("user_rows").get<std::size_t>(), s.at("news_rows").get<std::size_t>()};
    meta.precision = parse_precision(j.at("precision").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint metadata " + path.string() + ": " + e.what());
  }
  return meta;
}

template void save_checkpoint(const std::filesystem::path&, const ParameterSet<float>&);
template void save_checkpoint(const std::filesystem::path&, const ParameterSet<double>&);
template void load_checkpoint(const std::filesystem::path&, ParameterSet<float>&);
template void load_checkpoint(const std::filesystem::path&, ParameterSet<double>&);

}  // namespace gerl
