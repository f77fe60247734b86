#include "hgbd/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace hgbd::nn {

namespace {

void put_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffU);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

double get_le(const unsigned char* buf) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

nlohmann::json read_header(std::ifstream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError("empty checkpoint " + path.string());
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params,
                     const nlohmann::json& architecture, std::uint64_t seed, const nlohmann::json& meta) {
  nlohmann::json manifest = nlohmann::json::array();
  for (const Parameter* p : params) {
    manifest.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  nlohmann::json header{{"format", "hgbd-checkpoint"},
                        {"version", 1},
                        {"architecture", architecture},
                        {"seed", seed},
                        {"meta", meta},
                        {"manifest", manifest}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot write " + path.string());
  os << header.dump() << '\n';
  for (const Parameter* p : params)
    for (double v : p->value.values()) put_le(os, v);
  if (!os) throw CheckpointError("write failed for " + path.string());
}

nlohmann::json read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return read_header(in, path);
}

nlohmann::json load_checkpoint(const std::filesystem::path& path, const std::vector<Parameter*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  nlohmann::json header = read_header(in, path);
  const auto& manifest = header.at("manifest");
  if (manifest.size() != params.size()) {
    throw CheckpointError("manifest lists " + std::to_string(manifest.size()) + " tensors, model has " +
                          std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& e = manifest[k];
    const Parameter& p = *params[k];
    if (e.at("name").get<std::string>() != p.name || e.at("rows").get<std::size_t>() != p.value.rows() ||
        e.at("cols").get<std::size_t>() != p.value.cols()) {
      throw CheckpointError("manifest entry " + std::to_string(k) + " (" + e.dump() + ") does not match " +
                            p.name + p.value.shape_string());
    }
  }
  std::vector<char> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t expected = 0;
  for (const Parameter* p : params) expected += p->value.size() * 8;
  if (blob.size() != expected) {
    throw CheckpointError("weight blob is " + std::to_string(blob.size()) + " bytes, expected " +
                          std::to_string(expected));
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  std::size_t off = 0;
  for (Parameter* p : params) {
    for (auto& v : p->value.values()) {
      v = get_le(bytes + off);
      off += 8;
    }
    p->zero_grad();
  }
  return header;
}

}  // namespace hgbd::nn
