#include "navfuse/recording.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "navfuse/error.hpp"

namespace navfuse::recording {

namespace {

constexpr std::size_t kColumns = 16;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

double parse_double(std::string_view cell, std::size_t line, const char* column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw Error::at_line(ErrorCode::kParse, line,
                         std::string("bad value '") + std::string(cell) + "' in column " + column);
  }
  return v;
}

std::uint64_t parse_ms(std::string_view cell, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error::at_line(ErrorCode::kParse, line, "bad t_ms '" + std::string(cell) + "'");
  }
  return v;
}

std::uint64_t to_ms(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::kInvalidArgument, "recording timestamps must be non-negative");
  }
  return static_cast<std::uint64_t>(std::llround(t * 1000.0));
}

void append(std::string& s, double v) {
  s += ',';
  s += format_float(v);
}

void write_metadata(std::ostream& out,
                    const std::vector<std::pair<std::string, std::string>>& metadata) {
  for (const auto& [key, value] : metadata) out << "# " << key << '=' << value << '\n';
  out << kHeader << '\n';
}

}  // namespace

std::string format_float(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general,
                                       kSignificantDigits);
  (void)ec;
  return std::string(buf, ptr);
}

double canonical(double v) {
  if (!std::isfinite(v)) return v;
  const std::string s = format_float(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

double course_from_degrees(double deg) { return deg * kPi / 180.0; }
double course_to_degrees(double rad) {
  double deg = std::fmod(rad * 180.0 / kPi, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg >= 360.0 ? 0.0 : deg;
}

RecordingRow canonical_row(const ImuSample& imu, const std::optional<GpsFix>& gps) {
  auto vec = [](const Vec3& v) { return Vec3{canonical(v.x), canonical(v.y), canonical(v.z)}; };
  RecordingRow row;
  row.imu.t = static_cast<double>(to_ms(imu.t)) / 1000.0;
  row.imu.accel = vec(imu.accel);
  row.imu.gyro = vec(imu.gyro);
  if (imu.mag) row.imu.mag = vec(*imu.mag);
  if (gps && gps->valid) {
    GpsFix f;
    f.t = row.imu.t;
    f.pos = {canonical(gps->pos.lat), canonical(gps->pos.lon)};
    f.speed = canonical(gps->speed);
    if (gps->course) f.course = course_from_degrees(canonical(course_to_degrees(*gps->course)));
    f.alt_m = canonical(gps->alt_m);
    row.gps = f;
  }
  return row;
}

std::string format_row(const RecordingRow& row) {
  std::string s = std::to_string(to_ms(row.imu.t));
  append(s, row.imu.accel.x);
  append(s, row.imu.accel.y);
  append(s, row.imu.accel.z);
  append(s, row.imu.gyro.x);
  append(s, row.imu.gyro.y);
  append(s, row.imu.gyro.z);
  if (row.imu.mag) {
    append(s, row.imu.mag->x);
    append(s, row.imu.mag->y);
    append(s, row.imu.mag->z);
  } else {
    s += ",,,";
  }
  if (row.gps && row.gps->valid) {
    const GpsFix& g = *row.gps;
    s += ",1";
    append(s, g.pos.lat);
    append(s, g.pos.lon);
    append(s, g.speed);
    if (g.course) {
      append(s, course_to_degrees(*g.course));
    } else {
      s += ',';
    }
    append(s, g.alt_m);
  } else {
    s += ",0,,,,,";
  }
  return s;
}

void write_recording(const FlightRecording& rec, std::ostream& out) {
  RecordingWriter writer(out, rec.metadata);
  for (const auto& row : rec.rows) writer.write(row);
}

void write_recording(const FlightRecording& rec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_recording(rec, out);
  if (!out) throw Error(ErrorCode::kIo, "write to " + path.string() + " failed");
}

FlightRecording read_recording(std::istream& in) {
  FlightRecording rec;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::optional<std::uint64_t> last_ms;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line.starts_with("#")) {
        std::string_view body = std::string_view(line).substr(1);
        while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos) {
          throw Error::at_line(ErrorCode::kParse, line_no, "metadata line without '='");
        }
        rec.metadata.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
        continue;
      }
      if (line != kHeader) throw Error::at_line(ErrorCode::kParse, line_no, "unexpected header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    const auto cells = split(line);
    if (cells.size() != kColumns) {
      throw Error::at_line(ErrorCode::kParse, line_no,
                           "expected 16 columns, found " + std::to_string(cells.size()));
    }
    const std::uint64_t ms = parse_ms(cells[0], line_no);
    if (last_ms && ms <= *last_ms) {
      throw Error::at_line(ErrorCode::kOrdering, line_no, "timestamps must strictly increase");
    }
    last_ms = ms;

    RecordingRow row;
    row.imu.t = static_cast<double>(ms) / 1000.0;
    row.imu.accel = {parse_double(cells[1], line_no, "ax"), parse_double(cells[2], line_no, "ay"),
                     parse_double(cells[3], line_no, "az")};
    row.imu.gyro = {parse_double(cells[4], line_no, "gx"), parse_double(cells[5], line_no, "gy"),
                    parse_double(cells[6], line_no, "gz")};
    const bool mag_empty = cells[7].empty() && cells[8].empty() && cells[9].empty();
    if (!mag_empty) {
      row.imu.mag = Vec3{parse_double(cells[7], line_no, "mx"), parse_double(cells[8], line_no, "my"),
                         parse_double(cells[9], line_no, "mz")};
    }
    if (cells[10] == "1") {
      GpsFix f;
      f.t = row.imu.t;
      f.pos = {parse_double(cells[11], line_no, "lat"), parse_double(cells[12], line_no, "lon")};
      if (!f.pos.valid()) throw Error::at_line(ErrorCode::kParse, line_no, "lat/lon out of range");
      f.speed = parse_double(cells[13], line_no, "speed_mps");
      if (!cells[14].empty()) f.course = course_from_degrees(parse_double(cells[14], line_no, "course_deg"));
      if (!cells[15].empty()) f.alt_m = parse_double(cells[15], line_no, "alt_m");
      row.gps = f;
    } else if (cells[10] != "0") {
      throw Error::at_line(ErrorCode::kParse, line_no, "gps_valid must be 0 or 1");
    }
    rec.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error::at_line(ErrorCode::kParse, line_no + 1, "missing header");
  return rec;
}

FlightRecording read_recording(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_recording(in);
}

RecordingWriter::RecordingWriter(std::ostream& out,
                                 const std::vector<std::pair<std::string, std::string>>& metadata)
    : out_(out) {
  write_metadata(out_, metadata);
  out_.flush();
}

void RecordingWriter::write(const RecordingRow& row) {
  const std::uint64_t ms = to_ms(row.imu.t);
  if (last_ms_ && ms <= *last_ms_) {
    throw Error(ErrorCode::kOrdering, "recording rows must be strictly increasing in time");
  }
  std::string line = format_row(row);
  line += '\n';
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  last_ms_ = ms;
  ++rows_;
}

std::vector<GpsFix> fixes_of(const FlightRecording& rec) {
  std::vector<GpsFix> fixes;
  for (const auto& row : rec.rows) {
    if (row.gps && row.gps->valid) fixes.push_back(*row.gps);
  }
  return fixes;
}

}  // namespace navfuse::recording
