#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "navfuse/attitude.hpp"
#include "navfuse/error.hpp"
#include "navfuse/position.hpp"

namespace navfuse::telemetry {

// Wire format, little-endian:
//   0xA5 | kind u8 | seq u16 | t_ms u32 | payload | crc16 u16
// The CRC is CRC-16/CCITT-FALSE over every byte before it.
//
// IMU payload, 9 x i16: accel xyz (1/2048 g), gyro xyz (1/16.4 deg/s),
// mag xyz (1/1090 gauss). A mag triple of -32768 means "no reading".
// GPS payload: lat i32, lon i32 (1e-7 deg), alt i32 (mm), speed u16
// (cm/s), course u16 (0.01 deg), flags u8 (bit0 valid, bit1 course
// present).
inline constexpr std::uint8_t kMagic = 0xA5;
inline constexpr std::size_t kHeaderSize = 8;
inline constexpr std::size_t kCrcSize = 2;
inline constexpr std::size_t kImuFrameSize = 28;
inline constexpr std::size_t kGpsFrameSize = 27;
inline constexpr std::size_t kMaxFrameSize = 32;

inline constexpr std::int16_t kNoMagReading = INT16_MIN;
inline constexpr std::uint8_t kGpsFlagValid = 0x01;
inline constexpr std::uint8_t kGpsFlagCourse = 0x02;

enum class FrameKind : std::uint8_t { kImu = 0x01, kGps = 0x02 };

struct ImuPayload {
  std::array<std::int16_t, 3> accel{};
  std::array<std::int16_t, 3> gyro{};
  std::array<std::int16_t, 3> mag{};
  friend bool operator==(const ImuPayload&, const ImuPayload&) = default;
};

struct GpsPayload {
  std::int32_t lat_e7 = 0;
  std::int32_t lon_e7 = 0;
  std::int32_t alt_mm = 0;
  std::uint16_t speed_cms = 0;
  std::uint16_t course_cdeg = 0;
  std::uint8_t flags = 0;
  friend bool operator==(const GpsPayload&, const GpsPayload&) = default;
};

struct TelemetryFrame {
  std::uint16_t seq = 0;
  std::uint32_t t_ms = 0;
  std::variant<ImuPayload, GpsPayload> payload;

  FrameKind kind() const {
    return std::holds_alternative<ImuPayload>(payload) ? FrameKind::kImu : FrameKind::kGps;
  }
  friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes);

std::size_t frame_size(FrameKind kind);

// Throws kEncodeRange for payload fields outside their documented ranges
// (GPS lat/lon beyond +-90/+-180 deg, course >= 360 deg, unknown flags).
std::vector<std::uint8_t> encode_frame(const TelemetryFrame& f);
void append_frame(std::vector<std::uint8_t>& out, const TelemetryFrame& f);

// Accepts exactly one frame. Errors: kFraming (bad magic or kind),
// kTruncation (length mismatch, including empty input), kCorruption (CRC).
// Each carries the byte offset where it was detected.
TelemetryFrame decode_frame(std::span<const std::uint8_t> bytes);

struct Diagnostic {
  std::size_t offset = 0;
  ErrorCode code = ErrorCode::kFraming;
  std::string message;
};

struct ScanResult {
  std::vector<TelemetryFrame> frames;
  std::vector<Diagnostic> diagnostics;
};

// Resynchronizing scanner: hunts for the magic byte, tries a decode, and
// on failure slides forward one byte. Linear in the input length.
ScanResult scan_stream(std::span<const std::uint8_t> bytes);

// The same scan over input that arrives in pieces. Frames are emitted as
// soon as they are complete; a partial frame at the end of a piece waits
// for more bytes. Offsets are relative to the start of the whole stream.
class StreamScanner {
 public:
  void feed(std::span<const std::uint8_t> bytes, ScanResult& out);
  void finish(ScanResult& out);

 private:
  void scan(ScanResult& out, bool final);
  void flush_skipped(ScanResult& out);

  std::vector<std::uint8_t> pending_;
  std::size_t base_ = 0;
  std::size_t skip_start_ = 0;
  std::size_t skipped_ = 0;
};

// Physical <-> wire conversions. Quantization rounds to nearest; values
// that do not fit throw kEncodeRange. Decoded values are rounded to the
// CSV recording precision so a recorded stream replays bit-identically.
TelemetryFrame imu_frame(const ImuSample& s, std::uint16_t seq);
TelemetryFrame gps_frame(const GpsFix& fix, std::uint16_t seq);
ImuSample to_imu_sample(const TelemetryFrame& f);
GpsFix to_gps_fix(const TelemetryFrame& f);

// Stateful encoder with independent sequence counters per frame kind.
class FrameWriter {
 public:
  void imu(const ImuSample& s);
  void gps(const GpsFix& fix);
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::uint16_t imu_seq_ = 0;
  std::uint16_t gps_seq_ = 0;
  std::vector<std::uint8_t> bytes_;
};

}  // namespace navfuse::telemetry
