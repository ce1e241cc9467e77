#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homsim/error.hpp"

namespace homsim
{

struct TimeTag
{
    std::uint64_t time_ps = 0;  // since acquisition start
    std::uint8_t channel = 0;

    auto operator<=>(const TimeTag&) const = default;
};

struct StreamHeader
{
    std::uint64_t resolution_ps = 100;
    std::uint64_t trigger_period_ps = 25'000'000;
    std::uint64_t n_triggers = 0;
    std::vector<std::string> channel_labels{"D1", "D2"};
    std::optional<std::uint64_t> master_seed;

    bool operator==(const StreamHeader&) const = default;
};

struct TimeTagStream
{
    StreamHeader header;
    std::vector<TimeTag> tags;  // non-decreasing in time_ps

    bool operator==(const TimeTagStream&) const = default;
};

/// Failure while reading or writing a time-tag file.
class StreamError : public Error
{
public:
    enum class Kind
    {
        BadMagic,
        TruncatedRecord,
        UnsortedTags,
        BadHeader,
        Io,
    };

    StreamError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Binary layout ("HTT1"), all integers little-endian:
//   char[4]  magic "HTT1"
//   u64      resolution_ps
//   u64      trigger_period_ps
//   u64      n_triggers
//   u8       has_seed (0 or 1)
//   u64      master_seed (0 when has_seed == 0)
//   u8       channel count K
//   K x { u8 length L, L bytes label }
//   then repeated 9-byte records { u64 time_ps, u8 channel } until EOF.
//
// CSV layout: '#'-prefixed "key=value" header lines (resolution_ps,
// trigger_period_ps, n_triggers, master_seed, channels as a '|' list), the
// column line "time_ps,channel", then one row per tag.

void write_stream(std::ostream& out, const TimeTagStream& stream);
TimeTagStream read_stream(std::istream& in);
void write_stream_csv(std::ostream& out, const TimeTagStream& stream);
TimeTagStream read_stream_csv(std::istream& in);

/// Writes binary unless the extension is ".csv".
void write_stream_file(const std::filesystem::path& path, const TimeTagStream& stream);
/// Reads binary or CSV, chosen by extension.
TimeTagStream read_stream_file(const std::filesystem::path& path);

/// Counts of one channel folded over a trigger cycle.
struct Histogram
{
    double bin_ns = 1.0;
    std::vector<std::uint64_t> counts;

    double bin_center_ns(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_ns; }
    std::uint64_t total() const;
};

/// Histogram of (time mod trigger period) for `channel`. The bin width must
/// divide the trigger period to within 1 ps.
Histogram fold_histogram(const TimeTagStream& stream, std::uint8_t channel, double bin_ns);

}  // namespace homsim
