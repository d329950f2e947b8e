#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "navfuse/attitude.hpp"
#include "navfuse/position.hpp"

namespace navfuse::recording {

// Exact column header of a flight recording.
inline constexpr std::string_view kHeader =
    "t_ms,ax,ay,az,gx,gy,gz,mx,my,mz,gps_valid,lat,lon,speed_mps,course_deg,alt_m";

inline constexpr int kSignificantDigits = 9;

// One IMU sample plus the GPS fix (if any) that arrived with it. The row
// timestamp is the IMU timestamp in whole milliseconds; an attached fix
// shares it.
struct RecordingRow {
  ImuSample imu;
  std::optional<GpsFix> gps;
};

struct FlightRecording {
  // Written as "# key=value" lines ahead of the header.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<RecordingRow> rows;
};

// Shortest decimal with 9 significant digits, as written to the CSV.
std::string format_float(double v);

// The double that format_float(v) reads back as. Idempotent, so values
// already passed through it survive a CSV roundtrip bit for bit.
double canonical(double v);

double course_from_degrees(double deg);
// Degrees in [0, 360).
double course_to_degrees(double rad);

// Rounds every field to recording precision and time to whole ms.
RecordingRow canonical_row(const ImuSample& imu, const std::optional<GpsFix>& gps);

std::string format_row(const RecordingRow& row);

// Throws kOrdering if rows are not strictly increasing in time.
void write_recording(const FlightRecording& rec, std::ostream& out);
void write_recording(const FlightRecording& rec, const std::filesystem::path& path);

// Throws kParse (with line number) for malformed content and kOrdering for
// non-increasing timestamps.
FlightRecording read_recording(std::istream& in);
FlightRecording read_recording(const std::filesystem::path& path);

// Streams rows one at a time; each row is flushed as a complete line so an
// interrupted recording remains a valid file.
class RecordingWriter {
 public:
  explicit RecordingWriter(std::ostream& out,
                           const std::vector<std::pair<std::string, std::string>>& metadata = {});
  void write(const RecordingRow& row);
  std::size_t rows_written() const { return rows_; }

 private:
  std::ostream& out_;
  std::optional<std::uint64_t> last_ms_;
  std::size_t rows_ = 0;
};

std::vector<GpsFix> fixes_of(const FlightRecording& rec);

}  // namespace navfuse::recording
