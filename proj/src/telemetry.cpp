#include "navfuse/telemetry.hpp"

#include <cmath>
#include <limits>

#include "navfuse/recording.hpp"

namespace navfuse::telemetry {

namespace {

constexpr double kAccelLsb = kGravity / 2048.0;             // m/s^2
constexpr double kGyroLsb = (1.0 / 16.4) * kPi / 180.0;     // rad/s
constexpr double kMagLsb = 1.0 / 1090.0;                    // gauss
constexpr std::size_t kImuPayloadSize = 18;
constexpr std::size_t kGpsPayloadSize = 17;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

template <typename Int>
Int quantize(double value, double lsb, const char* field, Int lo = std::numeric_limits<Int>::min(),
             Int hi = std::numeric_limits<Int>::max()) {
  const double raw = std::round(value / lsb);
  if (!std::isfinite(raw) || raw < static_cast<double>(lo) || raw > static_cast<double>(hi)) {
    throw Error(ErrorCode::kEncodeRange, std::string(field) + " does not fit the frame field");
  }
  return static_cast<Int>(raw);
}

std::uint32_t to_t_ms(double t) {
  return quantize<std::uint32_t>(t, 1e-3, "timestamp");
}

void validate(const GpsPayload& g) {
  if (g.lat_e7 < -900000000 || g.lat_e7 > 900000000) {
    throw Error(ErrorCode::kEncodeRange, "latitude outside +-90 deg");
  }
  if (g.lon_e7 <= -1800000000 || g.lon_e7 > 1800000000) {
    throw Error(ErrorCode::kEncodeRange, "longitude outside (-180, 180] deg");
  }
  if (g.course_cdeg >= 36000) throw Error(ErrorCode::kEncodeRange, "course must be below 360 deg");
  if (g.flags & ~(kGpsFlagValid | kGpsFlagCourse)) {
    throw Error(ErrorCode::kEncodeRange, "unknown GPS flag bits");
  }
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : bytes) {
    crc ^= static_cast<std::uint16_t>(byte << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

std::size_t frame_size(FrameKind kind) {
  return kind == FrameKind::kImu ? kImuFrameSize : kGpsFrameSize;
}

void append_frame(std::vector<std::uint8_t>& out, const TelemetryFrame& f) {
  const std::size_t start = out.size();
  if (const auto* g = std::get_if<GpsPayload>(&f.payload)) validate(*g);
  out.push_back(kMagic);
  out.push_back(static_cast<std::uint8_t>(f.kind()));
  put_u16(out, f.seq);
  put_u32(out, f.t_ms);
  if (const auto* imu = std::get_if<ImuPayload>(&f.payload)) {
    for (const auto* axis : {&imu->accel, &imu->gyro, &imu->mag}) {
      for (std::int16_t v : *axis) put_u16(out, static_cast<std::uint16_t>(v));
    }
  } else {
    const auto& g = std::get<GpsPayload>(f.payload);
    put_u32(out, static_cast<std::uint32_t>(g.lat_e7));
    put_u32(out, static_cast<std::uint32_t>(g.lon_e7));
    put_u32(out, static_cast<std::uint32_t>(g.alt_mm));
    put_u16(out, g.speed_cms);
    put_u16(out, g.course_cdeg);
    out.push_back(g.flags);
  }
  const auto body = std::span<const std::uint8_t>(out).subspan(start);
  put_u16(out, crc16_ccitt_false(body));
}

std::vector<std::uint8_t> encode_frame(const TelemetryFrame& f) {
  std::vector<std::uint8_t> out;
  out.reserve(kMaxFrameSize);
  append_frame(out, f);
  return out;
}

TelemetryFrame decode_frame(std::span<const std::uint8_t> b) {
  if (b.empty()) throw Error::at_offset(ErrorCode::kTruncation, 0, "empty input");
  if (b[0] != kMagic) throw Error::at_offset(ErrorCode::kFraming, 0, "bad magic byte");
  if (b.size() < 2) throw Error::at_offset(ErrorCode::kTruncation, b.size(), "frame cut after magic");
  if (b[1] != static_cast<std::uint8_t>(FrameKind::kImu) &&
      b[1] != static_cast<std::uint8_t>(FrameKind::kGps)) {
    throw Error::at_offset(ErrorCode::kFraming, 1, "unknown frame kind");
  }
  const auto kind = static_cast<FrameKind>(b[1]);
  const std::size_t size = frame_size(kind);
  if (b.size() != size) {
    throw Error::at_offset(ErrorCode::kTruncation, std::min(b.size(), size),
                           "expected " + std::to_string(size) + " bytes, got " +
                               std::to_string(b.size()));
  }
  const std::size_t crc_at = size - kCrcSize;
  if (crc16_ccitt_false(b.first(crc_at)) != get_u16(b, crc_at)) {
    throw Error::at_offset(ErrorCode::kCorruption, crc_at, "CRC mismatch");
  }

  TelemetryFrame f;
  f.seq = get_u16(b, 2);
  f.t_ms = get_u32(b, 4);
  std::size_t at = kHeaderSize;
  if (kind == FrameKind::kImu) {
    ImuPayload p;
    for (auto* axis : {&p.accel, &p.gyro, &p.mag}) {
      for (auto& v : *axis) {
        v = static_cast<std::int16_t>(get_u16(b, at));
        at += 2;
      }
    }
    f.payload = p;
  } else {
    GpsPayload g;
    g.lat_e7 = static_cast<std::int32_t>(get_u32(b, at));
    g.lon_e7 = static_cast<std::int32_t>(get_u32(b, at + 4));
    g.alt_mm = static_cast<std::int32_t>(get_u32(b, at + 8));
    g.speed_cms = get_u16(b, at + 12);
    g.course_cdeg = get_u16(b, at + 14);
    g.flags = b[at + 16];
    f.payload = g;
  }
  return f;
}

void StreamScanner::feed(std::span<const std::uint8_t> bytes, ScanResult& out) {
  pending_.insert(pending_.end(), bytes.begin(), bytes.end());
  scan(out, false);
}

void StreamScanner::finish(ScanResult& out) {
  scan(out, true);
  flush_skipped(out);
}

void StreamScanner::flush_skipped(ScanResult& out) {
  if (skipped_ > 0) {
    out.diagnostics.push_back({skip_start_, ErrorCode::kFraming,
                               "skipped " + std::to_string(skipped_) + " unsynchronized bytes"});
    skipped_ = 0;
  }
}

void StreamScanner::scan(ScanResult& out, bool final) {
  const std::span<const std::uint8_t> bytes(pending_);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes[pos] != kMagic) {
      if (skipped_ == 0) skip_start_ = base_ + pos;
      ++skipped_;
      ++pos;
      continue;
    }
    flush_skipped(out);
    const std::size_t remaining = bytes.size() - pos;
    if (remaining < 2) {
      if (final) {
        out.diagnostics.push_back({base_ + pos, ErrorCode::kTruncation, "stream ends inside a frame"});
        pos = bytes.size();
      }
      break;
    }
    const std::uint8_t kind = bytes[pos + 1];
    if (kind != static_cast<std::uint8_t>(FrameKind::kImu) &&
        kind != static_cast<std::uint8_t>(FrameKind::kGps)) {
      out.diagnostics.push_back({base_ + pos, ErrorCode::kFraming, "unknown frame kind"});
      ++pos;
      continue;
    }
    const std::size_t size = frame_size(static_cast<FrameKind>(kind));
    if (remaining < size) {
      // No complete frame can start after this point either.
      if (final) {
        out.diagnostics.push_back({base_ + pos, ErrorCode::kTruncation, "stream ends inside a frame"});
        pos = bytes.size();
      }
      break;
    }
    try {
      out.frames.push_back(decode_frame(bytes.subspan(pos, size)));
      pos += size;
    } catch (const Error& e) {
      out.diagnostics.push_back({base_ + pos + e.offset().value_or(0), e.code(), e.what()});
      ++pos;
    }
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(pos));
  base_ += pos;
}

ScanResult scan_stream(std::span<const std::uint8_t> bytes) {
  ScanResult result;
  StreamScanner scanner;
  scanner.feed(bytes, result);
  scanner.finish(result);
  return result;
}

TelemetryFrame imu_frame(const ImuSample& s, std::uint16_t seq) {
  ImuPayload p;
  const Vec3* sources[2] = {&s.accel, &s.gyro};
  const double lsb[2] = {kAccelLsb, kGyroLsb};
  std::array<std::int16_t, 3>* targets[2] = {&p.accel, &p.gyro};
  for (int k = 0; k < 2; ++k) {
    const Vec3& v = *sources[k];
    (*targets[k])[0] = quantize<std::int16_t>(v.x, lsb[k], k == 0 ? "accel" : "gyro");
    (*targets[k])[1] = quantize<std::int16_t>(v.y, lsb[k], k == 0 ? "accel" : "gyro");
    (*targets[k])[2] = quantize<std::int16_t>(v.z, lsb[k], k == 0 ? "accel" : "gyro");
  }
  if (s.mag) {
    constexpr std::int16_t lo = kNoMagReading + 1;
    p.mag = {quantize<std::int16_t>(s.mag->x, kMagLsb, "mag", lo),
             quantize<std::int16_t>(s.mag->y, kMagLsb, "mag", lo),
             quantize<std::int16_t>(s.mag->z, kMagLsb, "mag", lo)};
  } else {
    p.mag = {kNoMagReading, kNoMagReading, kNoMagReading};
  }
  return {seq, to_t_ms(s.t), p};
}

TelemetryFrame gps_frame(const GpsFix& fix, std::uint16_t seq) {
  GpsPayload g;
  if (fix.valid) {
    g.lat_e7 = quantize<std::int32_t>(fix.pos.lat, 1e-7, "latitude", -900000000, 900000000);
    g.lon_e7 = quantize<std::int32_t>(fix.pos.lon, 1e-7, "longitude", -1800000000, 1800000000);
    if (g.lon_e7 == -1800000000) g.lon_e7 = 1800000000;
    g.alt_mm = quantize<std::int32_t>(fix.alt_m, 0.001, "altitude");
    g.speed_cms = quantize<std::uint16_t>(fix.speed, 0.01, "speed");
    g.flags = kGpsFlagValid;
    if (fix.course) {
      double deg = std::fmod(*fix.course * 180.0 / kPi, 360.0);
      if (deg < 0.0) deg += 360.0;
      std::uint16_t cdeg = quantize<std::uint16_t>(deg, 0.01, "course", 0, 36000);
      if (cdeg == 36000) cdeg = 0;
      g.course_cdeg = cdeg;
      g.flags |= kGpsFlagCourse;
    }
  }
  return {seq, to_t_ms(fix.t), g};
}

ImuSample to_imu_sample(const TelemetryFrame& f) {
  const auto* p = std::get_if<ImuPayload>(&f.payload);
  if (!p) throw Error(ErrorCode::kInvalidArgument, "not an IMU frame");
  using recording::canonical;
  auto scale = [](const std::array<std::int16_t, 3>& raw, double lsb) {
    return Vec3{canonical(raw[0] * lsb), canonical(raw[1] * lsb), canonical(raw[2] * lsb)};
  };
  ImuSample s;
  s.t = f.t_ms / 1000.0;
  s.accel = scale(p->accel, kAccelLsb);
  s.gyro = scale(p->gyro, kGyroLsb);
  if (p->mag[0] != kNoMagReading && p->mag[1] != kNoMagReading && p->mag[2] != kNoMagReading) {
    s.mag = scale(p->mag, kMagLsb);
  }
  return s;
}

GpsFix to_gps_fix(const TelemetryFrame& f) {
  const auto* g = std::get_if<GpsPayload>(&f.payload);
  if (!g) throw Error(ErrorCode::kInvalidArgument, "not a GPS frame");
  using recording::canonical;
  GpsFix fix;
  fix.t = f.t_ms / 1000.0;
  fix.valid = (g->flags & kGpsFlagValid) != 0;
  if (fix.valid) {
    fix.pos = {canonical(g->lat_e7 * 1e-7), canonical(g->lon_e7 * 1e-7)};
    fix.alt_m = canonical(g->alt_mm / 1000.0);
    fix.speed = canonical(g->speed_cms / 100.0);
    if (g->flags & kGpsFlagCourse) {
      fix.course = recording::course_from_degrees(canonical(g->course_cdeg / 100.0));
    }
  }
  return fix;
}

void FrameWriter::imu(const ImuSample& s) { append_frame(bytes_, imu_frame(s, imu_seq_++)); }

void FrameWriter::gps(const GpsFix& fix) { append_frame(bytes_, gps_frame(fix, gps_seq_++)); }

}  // namespace navfuse::telemetry
