#include "gaitattn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace gaitattn {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'C', 'K', 'P', 'T', '0', '1'};

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return json{{"n_sensors", c.n_sensors},
              {"n_channels", c.n_channels},
              {"conv_filters", c.conv_filters},
              {"kernel_size", c.kernel_size},
              {"padding", c.padding},
              {"pool_k", c.pool_k},
              {"feature_dim", c.feature_dim},
              {"classifier_hidden", c.classifier_hidden},
              {"dropout_p", c.dropout_p},
              {"concat_scorer", c.concat_scorer},
              {"normalize_input", c.normalize_input}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.n_sensors = j.at("n_sensors").get<int>();
  c.n_channels = j.at("n_channels").get<int>();
  c.conv_filters = j.at("conv_filters").get<std::vector<int>>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.padding = j.at("padding").get<int>();
  c.pool_k = j.at("pool_k").get<int>();
  c.feature_dim = j.at("feature_dim").get<int>();
  c.classifier_hidden = j.at("classifier_hidden").get<int>();
  c.dropout_p = j.at("dropout_p").get<double>();
  c.concat_scorer = j.at("concat_scorer").get<bool>();
  c.normalize_input = j.at("normalize_input").get<bool>();
  return c;
}

void write_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_doubles_le(std::ostream& os, const std::vector<double>& vals) {
  for (double d : vals) write_u64_le(os, std::bit_cast<std::uint64_t>(d));
}

std::vector<double> read_doubles_le(std::istream& is, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::bit_cast<double>(read_u64_le(is));
  return out;
}

}  // namespace

void save_checkpoint(const MultiStreamModel& m, const std::string& path) {
  const auto params = m.parameters();
  const auto names = m.parameter_names();

  json header;
  header["config"] = config_to_json(m.cfg);
  json table = json::array();
  for (std::size_t i = 0; i < params.size(); ++i)
    table.push_back(json{{"name", names[i]}, {"shape", params[i].shape()}});
  header["tensors"] = table;
  const std::string hdr = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u64_le(os, hdr.size());
  os.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  for (const auto& p : params) write_doubles_le(os, p.data_vec());
  if (!os) throw IoError("write failure on checkpoint: " + path);
}

MultiStreamModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a checkpoint file: " + path);
  const std::uint64_t hdr_len = read_u64_le(is);
  std::string hdr(hdr_len, '\0');
  is.read(hdr.data(), static_cast<std::streamsize>(hdr_len));
  if (!is) throw ParseError("truncated checkpoint header: " + path);

  json header;
  try {
    header = json::parse(hdr);
  } catch (const std::exception& e) {
    throw ParseError("bad checkpoint header in " + path + ": " + e.what());
  }

  MultiStreamModel m = init_model(config_from_json(header.at("config")), 0);
  auto params = m.parameters();
  auto names = m.parameter_names();
  const auto& table = header.at("tensors");
  if (table.size() != params.size())
    throw ParseError("checkpoint tensor count mismatch in " + path);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = table.at(i);
    if (entry.at("name").get<std::string>() != names[i])
      throw ParseError("checkpoint key order mismatch at '" +
                       entry.at("name").get<std::string>() + "' in " + path);
    if (entry.at("shape").get<std::vector<int>>() != params[i].shape())
      throw ParseError("checkpoint shape mismatch for '" + names[i] + "' in " + path);
    params[i].data_vec() = read_doubles_le(is, params[i].data_vec().size());
  }
  if (!is) throw ParseError("truncated checkpoint payload: " + path);
  return m;
}

}  // namespace gaitattn
