#include "stepsense/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

using nlohmann::json;

constexpr char kMagic[5] = {'S', 'N', 'C', 'K', '1'};

void write_string(std::ofstream& out, const std::string& s) {
  const std::uint32_t len = static_cast<std::uint32_t>(s.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in, const std::string& where) {
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (in.gcount() != sizeof(len))
    fail(ErrorKind::Parse, where + ": truncated length field");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len))
    fail(ErrorKind::Parse, where + ": truncated string field");
  return s;
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(
                static_cast<std::size_t>(m.size()) * sizeof(double)));
}

void read_matrix(std::ifstream& in, Eigen::MatrixXd& m,
                 const std::string& where) {
  const std::streamsize bytes = static_cast<std::streamsize>(
      static_cast<std::size_t>(m.size()) * sizeof(double));
  in.read(reinterpret_cast<char*>(m.data()), bytes);
  if (in.gcount() != bytes)
    fail(ErrorKind::Parse, where + ": truncated tensor data");
}

json config_to_json(const NetworkConfig& c) {
  return json{{"dense_widths", c.dense_widths},
              {"lstm_units", c.lstm_units},
              {"seq_timesteps", c.seq_timesteps},
              {"conv_channels", c.conv_channels},
              {"conv_kernel", c.conv_kernel},
              {"dropout_rate", c.dropout_rate},
              {"head_widths", c.head_widths},
              {"output_dim", c.output_dim},
              {"activation", c.activation == Activation::Relu ? "relu" : "tanh"},
              {"seed", c.seed}};
}

NetworkConfig config_from_json(const json& j) {
  NetworkConfig c;
  c.dense_widths = j.at("dense_widths").get<std::vector<int>>();
  c.lstm_units = j.at("lstm_units").get<int>();
  c.seq_timesteps = j.at("seq_timesteps").get<int>();
  c.conv_channels = j.at("conv_channels").get<std::vector<int>>();
  c.conv_kernel = j.at("conv_kernel").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.head_widths = j.at("head_widths").get<std::vector<int>>();
  c.output_dim = j.at("output_dim").get<int>();
  c.activation = j.at("activation").get<std::string>() == "tanh"
                     ? Activation::Tanh
                     : Activation::Relu;
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json layout_to_json(const BundleLayout& layout) {
  json j;
  j["scalars"] = layout.scalar_names;
  j["sequences"] = json::array();
  for (const auto& s : layout.sequences)
    j["sequences"].push_back({{"name", s.name}, {"length", s.length}});
  j["images"] = json::array();
  for (const auto& im : layout.images)
    j["images"].push_back(
        {{"name", im.name}, {"rows", im.rows}, {"cols", im.cols}});
  return j;
}

BundleLayout layout_from_json(const json& j) {
  BundleLayout layout;
  layout.scalar_names = j.at("scalars").get<std::vector<std::string>>();
  for (const auto& s : j.at("sequences"))
    layout.sequences.push_back(
        {s.at("name").get<std::string>(), s.at("length").get<int>()});
  for (const auto& im : j.at("images"))
    layout.images.push_back({im.at("name").get<std::string>(),
                             im.at("rows").get<int>(),
                             im.at("cols").get<int>()});
  return layout;
}

}  // namespace

void save_checkpoint(const Network& network, const Standardizer& standardizer,
                     const std::string& fingerprint,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out.write(kMagic, 5);

  json header;
  header["config"] = config_to_json(network.config());
  header["layout"] = layout_to_json(network.layout());
  header["fingerprint"] = fingerprint;
  header["standardizer"] = {
      {"scalar_mean", std::vector<double>(standardizer.scalar_mean.data(),
                                          standardizer.scalar_mean.data() +
                                              standardizer.scalar_mean.size())},
      {"scalar_std", std::vector<double>(standardizer.scalar_std.data(),
                                         standardizer.scalar_std.data() +
                                             standardizer.scalar_std.size())},
      {"seq_mean", standardizer.seq_mean},
      {"seq_std", standardizer.seq_std},
      {"image_scale", standardizer.image_scale}};
  header["n_tensors"] = network.tensors().size();
  write_string(out, header.dump());

  for (const Tensor& t : network.tensors()) {
    json meta = {{"name", t.name},
                 {"rows", t.value.rows()},
                 {"cols", t.value.cols()},
                 {"prunable", t.prunable}};
    write_string(out, meta.dump());
    write_matrix(out, t.value);
    if (t.prunable) write_matrix(out, t.mask);
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (in.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0)
    fail(ErrorKind::Parse, path.string() + ": bad magic, not a checkpoint");

  json header;
  try {
    header = json::parse(read_string(in, path.string()));
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": bad header JSON: " + e.what());
  }

  const NetworkConfig config = config_from_json(header.at("config"));
  const BundleLayout layout = layout_from_json(header.at("layout"));
  LoadedCheckpoint loaded{Network(layout, config), Standardizer{},
                          header.value("fingerprint", "")};

  const json& s = header.at("standardizer");
  const auto sm = s.at("scalar_mean").get<std::vector<double>>();
  const auto ss = s.at("scalar_std").get<std::vector<double>>();
  loaded.standardizer.scalar_mean =
      Eigen::Map<const Eigen::VectorXd>(sm.data(), static_cast<Eigen::Index>(sm.size()));
  loaded.standardizer.scalar_std =
      Eigen::Map<const Eigen::VectorXd>(ss.data(), static_cast<Eigen::Index>(ss.size()));
  loaded.standardizer.seq_mean = s.at("seq_mean").get<std::vector<double>>();
  loaded.standardizer.seq_std = s.at("seq_std").get<std::vector<double>>();
  loaded.standardizer.image_scale =
      s.at("image_scale").get<std::vector<double>>();

  const std::size_t n_tensors = header.at("n_tensors").get<std::size_t>();
  auto& tensors = loaded.network.tensors();
  if (tensors.size() != n_tensors)
    fail(ErrorKind::Parse,
         path.string() + ": tensor count does not match the stored config");
  for (std::size_t i = 0; i < n_tensors; ++i) {
    const std::string where = path.string() + " tensor " + std::to_string(i);
    json meta;
    try {
      meta = json::parse(read_string(in, where));
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, where + ": bad tensor metadata: " + e.what());
    }
    Tensor& t = tensors[i];
    if (meta.at("name").get<std::string>() != t.name ||
        meta.at("rows").get<Eigen::Index>() != t.value.rows() ||
        meta.at("cols").get<Eigen::Index>() != t.value.cols())
      fail(ErrorKind::Parse, where + ": tensor shape mismatch for " + t.name);
    read_matrix(in, t.value, where);
    if (t.prunable) read_matrix(in, t.mask, where);
  }
  return loaded;
}

}  // namespace stepsense
