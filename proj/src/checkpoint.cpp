#include "rdhp/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "rdhp/errors.hpp"

namespace rdhp::checkpoint {

using nlohmann::json;

json encode(const nn::ParamList& params) {
  json tensors = json::object();
  for (const auto& p : params) {
    const auto data = p.tensor->data();
    tensors[p.name] = {{"shape", p.tensor->shape()}, {"data", std::vector<double>(data.begin(), data.end())}};
  }
  return {{"version", kFormatVersion}, {"tensors", std::move(tensors)}};
}

void decode(const json& j, const nn::ParamList& params) {
  if (!j.contains("version") || j["version"].get<int>() != kFormatVersion)
    throw SchemaError("unsupported checkpoint version");
  const auto& tensors = j.at("tensors");
  for (const auto& p : params) {
    if (!tensors.contains(p.name)) throw SchemaError("checkpoint is missing tensor '" + p.name + "'");
    const auto& e = tensors[p.name];
    const auto shape = e.at("shape").get<ad::Shape>();
    if (shape != p.tensor->shape())
      throw ShapeError("checkpoint tensor '" + p.name + "' has shape " + ad::to_string(shape) +
                       ", expected " + ad::to_string(p.tensor->shape()));
    const auto data = e.at("data").get<std::vector<double>>();
    auto dst = p.tensor->mutable_data();
    if (data.size() != dst.size()) throw ShapeError("checkpoint tensor '" + p.name + "' has wrong length");
    std::copy(data.begin(), data.end(), dst.begin());
  }
}

void write_json(const std::filesystem::path& path, const json& j, int indent) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(indent) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SchemaError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace rdhp::checkpoint
