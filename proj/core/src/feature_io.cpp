#include "stepsense/feature_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

using nlohmann::json;

constexpr char kMagic[5] = {'F', 'T', 'A', 'B', '1'};

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

void write_blob(std::ofstream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
}

void read_blob(std::ifstream& in, double* data, std::size_t n,
               const std::string& where) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
    fail(ErrorKind::Parse, where + ": truncated feature data");
}

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

}  // namespace

void write_feature_table(const FeatureDataset& dataset,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out.write(kMagic, 5);
  json header;
  header["layout"] = layout_to_json(dataset.layout);
  header["sample_rate_hz"] = dataset.sample_rate_hz;
  header["fingerprint"] = dataset.fingerprint;
  header["n_rows"] = dataset.samples.size();
  write_string(out, header.dump());

  for (const FeatureSample& s : dataset.samples) {
    json meta;
    meta["person_id"] = s.person_id;
    meta["trajectory_id"] = s.trajectory_id;
    meta["valence"] = s.label.valence;
    meta["arousal"] = s.label.arousal;
    write_string(out, meta.dump());
    write_blob(out, s.bundle.scalars.data(),
               static_cast<std::size_t>(s.bundle.scalars.size()));
    for (const auto& seq : s.bundle.sequences)
      write_blob(out, seq.data(), static_cast<std::size_t>(seq.size()));
    for (const auto& img : s.bundle.images)
      write_blob(out, img.data(), static_cast<std::size_t>(img.size()));
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

FeatureDataset read_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (in.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0)
    fail(ErrorKind::Parse, path.string() + ": bad magic, not a FTAB1 file");

  json header;
  try {
    header = json::parse(read_string(in, path.string()));
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": bad header JSON: " + e.what());
  }
  FeatureDataset dataset;
  dataset.layout = layout_from_json(header.at("layout"));
  dataset.sample_rate_hz = header.at("sample_rate_hz").get<double>();
  dataset.fingerprint = header.value("fingerprint", "");
  const std::size_t n_rows = header.at("n_rows").get<std::size_t>();

  for (std::size_t row = 0; row < n_rows; ++row) {
    const std::string where = path.string() + " row " + std::to_string(row);
    json meta;
    try {
      meta = json::parse(read_string(in, where));
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, where + ": bad row metadata: " + e.what());
    }
    FeatureSample s;
    s.person_id = meta.value("person_id", "");
    s.trajectory_id = meta.value("trajectory_id", "");
    s.label = {meta.value("valence", 5.0), meta.value("arousal", 5.0)};
    s.bundle.scalars = Eigen::VectorXd::Zero(dataset.layout.scalar_dim());
    read_blob(in, s.bundle.scalars.data(),
              static_cast<std::size_t>(s.bundle.scalars.size()), where);
    for (const auto& slot : dataset.layout.sequences) {
      Eigen::VectorXd seq = Eigen::VectorXd::Zero(slot.length);
      read_blob(in, seq.data(), static_cast<std::size_t>(slot.length), where);
      s.bundle.sequences.push_back(std::move(seq));
    }
    for (const auto& slot : dataset.layout.images) {
      Eigen::MatrixXd img = Eigen::MatrixXd::Zero(slot.rows, slot.cols);
      read_blob(in, img.data(),
                static_cast<std::size_t>(slot.rows) * slot.cols, where);
      s.bundle.images.push_back(std::move(img));
    }
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

void export_feature_csv(const FeatureDataset& dataset,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "person_id,trajectory_id,valence,arousal";
  for (const auto& name : dataset.layout.scalar_names) out << "," << name;
  out << "\n";
  char buf[48];
  for (const FeatureSample& s : dataset.samples) {
    out << s.person_id << "," << s.trajectory_id;
    std::snprintf(buf, sizeof(buf), ",%.6g,%.6g", s.label.valence,
                  s.label.arousal);
    out << buf;
    for (Eigen::Index i = 0; i < s.bundle.scalars.size(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.9g", s.bundle.scalars(i));
      out << buf;
    }
    out << "\n";
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace stepsense
