#include "stepsense/signal_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

using nlohmann::json;

constexpr char kMagic[5] = {'V', 'I', 'B', 'S', '1'};

json meta_to_json(const VibrationSignal& s) {
  json j;
  j["sample_rate_hz"] = s.sample_rate_hz;
  j["person_id"] = s.person_id;
  j["trajectory_id"] = s.trajectory_id;
  j["sensor_id"] = s.sensor_id;
  j["n_samples"] = s.samples.size();
  if (s.label) {
    j["valence"] = s.label->valence;
    j["arousal"] = s.label->arousal;
  }
  if (!s.event_times_s.empty()) j["event_times_s"] = s.event_times_s;
  return j;
}

VibrationSignal meta_from_json(const json& j, const std::string& where) {
  VibrationSignal s;
  if (!j.contains("sample_rate_hz"))
    fail(ErrorKind::Parse, where + ": metadata missing sample_rate_hz");
  s.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  s.person_id = j.value("person_id", "");
  s.trajectory_id = j.value("trajectory_id", "");
  s.sensor_id = j.value("sensor_id", "");
  if (j.contains("valence") && j.contains("arousal"))
    s.label = EmotionLabel{j.at("valence").get<double>(),
                           j.at("arousal").get<double>()};
  if (j.contains("event_times_s"))
    s.event_times_s = j.at("event_times_s").get<std::vector<double>>();
  return s;
}

void write_csv(const VibrationSignal& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "#META " << meta_to_json(s).dump() << "\n";
  char buf[40];
  for (double v : s.samples) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out << buf << "\n";
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

VibrationSignal read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("#META ", 0) != 0)
    fail(ErrorKind::Parse, path.string() + ":1: expected '#META {json}' header");
  json j;
  try {
    j = json::parse(line.substr(6));
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ":1: bad metadata JSON: " + e.what());
  }
  VibrationSignal s = meta_from_json(j, path.string() + ":1");
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v = 0.0;
    auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size() ||
        !std::isfinite(v))
      fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) +
                                 ": not a finite number: '" + line + "'");
    s.samples.push_back(v);
  }
  s.validate();
  return s;
}

void write_record(std::ofstream& out, const VibrationSignal& s,
                  const json& extra_meta) {
  json j = meta_to_json(s);
  j.update(extra_meta);
  const std::string meta = j.dump();
  const std::uint32_t len = static_cast<std::uint32_t>(meta.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  out.write(reinterpret_cast<const char*>(s.samples.data()),
            static_cast<std::streamsize>(s.samples.size() * sizeof(double)));
}

VibrationSignal read_record(std::ifstream& in, const std::string& where,
                            json* meta_out) {
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (in.gcount() != sizeof(len))
    fail(ErrorKind::Parse, where + ": truncated metadata length");
  std::string meta(len, '\0');
  in.read(meta.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len))
    fail(ErrorKind::Parse, where + ": truncated metadata");
  json j;
  try {
    j = json::parse(meta);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, where + ": bad metadata JSON: " + e.what());
  }
  VibrationSignal s = meta_from_json(j, where);
  const std::uint64_t n = j.value("n_samples", std::uint64_t{0});
  s.samples.resize(n);
  in.read(reinterpret_cast<char*>(s.samples.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
    fail(ErrorKind::Parse, where + ": truncated sample data");
  s.validate();
  if (meta_out) *meta_out = std::move(j);
  return s;
}

bool is_csv(const std::filesystem::path& path) {
  return path.extension() == ".csv";
}

}  // namespace

VibrationSignal read_signal(const std::filesystem::path& path) {
  if (is_csv(path)) return read_csv(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (in.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0)
    fail(ErrorKind::Parse, path.string() + ": bad magic, not a VIBS1 file");
  return read_record(in, path.string(), nullptr);
}

void write_signal(const VibrationSignal& signal,
                  const std::filesystem::path& path) {
  signal.validate();
  if (is_csv(path)) {
    write_csv(signal, path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out.write(kMagic, 5);
  write_record(out, signal, json::object());
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_segments(const std::vector<FootstepSegment>& segments,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out.write(kMagic, 5);
  for (const FootstepSegment& seg : segments) {
    VibrationSignal s;
    s.samples = seg.samples;
    s.sample_rate_hz = seg.sample_rate_hz;
    s.person_id = seg.person_id;
    s.trajectory_id = seg.trajectory_id;
    s.sensor_id = seg.sensor_id;
    s.label = seg.label;
    json extra;
    extra["peak_index"] = seg.peak_index_in_signal;
    write_record(out, s, extra);
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<FootstepSegment> read_segments(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (in.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0)
    fail(ErrorKind::Parse, path.string() + ": bad magic, not a VIBS1 file");
  std::vector<FootstepSegment> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    json meta;
    VibrationSignal s = read_record(
        in, path.string() + " record " + std::to_string(out.size()), &meta);
    FootstepSegment seg;
    seg.samples = std::move(s.samples);
    seg.sample_rate_hz = s.sample_rate_hz;
    seg.person_id = s.person_id;
    seg.trajectory_id = s.trajectory_id;
    seg.sensor_id = s.sensor_id;
    seg.label = s.label;
    seg.peak_index_in_signal = meta.value("peak_index", std::int64_t{0});
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace stepsense
