#include "homsim/timetag.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <sstream>

namespace homsim
{

namespace
{

constexpr std::array<char, 4> kMagic{'H', 'T', 'T', '1'};
constexpr std::size_t kRecordBytes = 9;

void put_u64(std::string& buf, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u8(std::string& buf, std::uint8_t v) { buf.push_back(static_cast<char>(v)); }

class ByteReader
{
public:
    explicit ByteReader(std::string data) : data_(std::move(data)) {}

    std::size_t remaining() const { return data_.size() - pos_; }

    std::uint8_t u8(const char* what)
    {
        need(1, what);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }

    std::uint64_t u64(const char* what)
    {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    std::string bytes(std::size_t n, const char* what)
    {
        need(n, what);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n, const char* what) const
    {
        if (remaining() < n)
            throw StreamError(StreamError::Kind::BadHeader, std::string("header ended while reading ") + what);
    }

    std::string data_;
    std::size_t pos_ = 0;
};

void check_sorted(const std::vector<TimeTag>& tags)
{
    const auto it = std::adjacent_find(tags.begin(), tags.end(),
                                       [](const TimeTag& a, const TimeTag& b) { return b.time_ps < a.time_ps; });
    if (it != tags.end())
        throw StreamError(StreamError::Kind::UnsortedTags,
                          "time tags are not sorted at index " + std::to_string(std::distance(tags.begin(), it) + 1));
}

void check_header(const StreamHeader& h)
{
    if (h.trigger_period_ps == 0)
        throw StreamError(StreamError::Kind::BadHeader, "trigger period must be positive");
    if (h.channel_labels.size() > 255)
        throw StreamError(StreamError::Kind::BadHeader, "too many channels");
    for (const auto& l : h.channel_labels)
        if (l.size() > 255 || l.find_first_of(",|\n") != std::string::npos)
            throw StreamError(StreamError::Kind::BadHeader, "invalid channel label '" + l + "'");
}

template <typename T>
T parse_number(const std::string& text, const std::string& what)
{
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw StreamError(StreamError::Kind::BadHeader, "invalid " + what + " '" + text + "'");
    return value;
}

}  // namespace

//---------------------------------------------------------------------------//
// Binary
//---------------------------------------------------------------------------//

void write_stream(std::ostream& out, const TimeTagStream& stream)
{
    check_header(stream.header);
    check_sorted(stream.tags);

    std::string buf(kMagic.begin(), kMagic.end());
    const auto& h = stream.header;
    put_u64(buf, h.resolution_ps);
    put_u64(buf, h.trigger_period_ps);
    put_u64(buf, h.n_triggers);
    put_u8(buf, h.master_seed ? 1 : 0);
    put_u64(buf, h.master_seed.value_or(0));
    put_u8(buf, static_cast<std::uint8_t>(h.channel_labels.size()));
    for (const auto& label : h.channel_labels)
    {
        put_u8(buf, static_cast<std::uint8_t>(label.size()));
        buf += label;
    }
    buf.reserve(buf.size() + stream.tags.size() * kRecordBytes);
    for (const auto& tag : stream.tags)
    {
        put_u64(buf, tag.time_ps);
        put_u8(buf, tag.channel);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw StreamError(StreamError::Kind::Io, "failed to write time-tag stream");
}

TimeTagStream read_stream(std::istream& in)
{
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), data.begin()))
        throw StreamError(StreamError::Kind::BadMagic, "missing HTT1 magic");

    ByteReader r(data.substr(kMagic.size()));
    TimeTagStream s;
    s.header.resolution_ps = r.u64("resolution");
    s.header.trigger_period_ps = r.u64("trigger period");
    s.header.n_triggers = r.u64("trigger count");
    const auto has_seed = r.u8("seed flag");
    const auto seed = r.u64("seed");
    if (has_seed > 1)
        throw StreamError(StreamError::Kind::BadHeader, "seed flag must be 0 or 1");
    if (has_seed)
        s.header.master_seed = seed;
    const auto n_channels = r.u8("channel count");
    s.header.channel_labels.clear();
    for (unsigned i = 0; i < n_channels; ++i)
    {
        const auto len = r.u8("label length");
        s.header.channel_labels.push_back(r.bytes(len, "label"));
    }
    check_header(s.header);

    if (r.remaining() % kRecordBytes != 0)
        throw StreamError(StreamError::Kind::TruncatedRecord,
                          "trailing " + std::to_string(r.remaining() % kRecordBytes) + " bytes do not form a record");
    const std::size_t n = r.remaining() / kRecordBytes;
    s.tags.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        TimeTag t;
        t.time_ps = r.u64("record");
        t.channel = r.u8("record");
        s.tags.push_back(t);
    }
    check_sorted(s.tags);
    return s;
}

//---------------------------------------------------------------------------//
// CSV
//---------------------------------------------------------------------------//

void write_stream_csv(std::ostream& out, const TimeTagStream& stream)
{
    check_header(stream.header);
    check_sorted(stream.tags);
    const auto& h = stream.header;
    std::string labels;
    for (std::size_t i = 0; i < h.channel_labels.size(); ++i)
        labels += (i ? "|" : "") + h.channel_labels[i];

    std::ostringstream buf;
    buf << "# resolution_ps=" << h.resolution_ps << '\n'
        << "# trigger_period_ps=" << h.trigger_period_ps << '\n'
        << "# n_triggers=" << h.n_triggers << '\n';
    if (h.master_seed)
        buf << "# master_seed=" << *h.master_seed << '\n';
    buf << "# channels=" << labels << '\n' << "time_ps,channel\n";
    for (const auto& tag : stream.tags)
        buf << tag.time_ps << ',' << static_cast<unsigned>(tag.channel) << '\n';
    out << buf.str();
    if (!out)
        throw StreamError(StreamError::Kind::Io, "failed to write time-tag CSV");
}

TimeTagStream read_stream_csv(std::istream& in)
{
    TimeTagStream s;
    s.header.channel_labels.clear();
    std::string line;
    bool columns_seen = false;
    bool period_seen = false;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.front() == '#')
        {
            if (columns_seen)
                throw StreamError(StreamError::Kind::BadHeader, "header line after column line");
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                continue;
            auto key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            const auto value = line.substr(eq + 1);
            if (key == "resolution_ps")
                s.header.resolution_ps = parse_number<std::uint64_t>(value, key);
            else if (key == "trigger_period_ps")
            {
                s.header.trigger_period_ps = parse_number<std::uint64_t>(value, key);
                period_seen = true;
            }
            else if (key == "n_triggers")
                s.header.n_triggers = parse_number<std::uint64_t>(value, key);
            else if (key == "master_seed")
                s.header.master_seed = parse_number<std::uint64_t>(value, key);
            else if (key == "channels")
            {
                std::stringstream ss(value);
                std::string label;
                while (std::getline(ss, label, '|'))
                    s.header.channel_labels.push_back(label);
            }
            continue;
        }
        if (!columns_seen)
        {
            if (line != "time_ps,channel")
                throw StreamError(StreamError::Kind::BadMagic, "expected column line 'time_ps,channel'");
            columns_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw StreamError(StreamError::Kind::TruncatedRecord, "row without channel: '" + line + "'");
        TimeTag t;
        t.time_ps = parse_number<std::uint64_t>(line.substr(0, comma), "time_ps");
        const auto ch = parse_number<unsigned>(line.substr(comma + 1), "channel");
        if (ch > 255)
            throw StreamError(StreamError::Kind::BadHeader, "channel id out of range");
        t.channel = static_cast<std::uint8_t>(ch);
        s.tags.push_back(t);
    }
    if (!columns_seen)
        throw StreamError(StreamError::Kind::BadMagic, "missing column line 'time_ps,channel'");
    if (!period_seen)
        throw StreamError(StreamError::Kind::BadHeader, "missing trigger_period_ps");
    check_header(s.header);
    check_sorted(s.tags);
    return s;
}

//---------------------------------------------------------------------------//
// Files
//---------------------------------------------------------------------------//

void write_stream_file(const std::filesystem::path& path, const TimeTagStream& stream)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw StreamError(StreamError::Kind::Io, "cannot open '" + path.string() + "' for writing");
    if (path.extension() == ".csv")
        write_stream_csv(out, stream);
    else
        write_stream(out, stream);
}

TimeTagStream read_stream_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw StreamError(StreamError::Kind::Io, "cannot open '" + path.string() + "'");
    return path.extension() == ".csv" ? read_stream_csv(in) : read_stream(in);
}

//---------------------------------------------------------------------------//
// Histograms
//---------------------------------------------------------------------------//

std::uint64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

Histogram fold_histogram(const TimeTagStream& stream, std::uint8_t channel, double bin_ns)
{
    if (!(bin_ns > 0.0))
        throw PreconditionError("histogram bin width must be positive");
    const double period_ns = static_cast<double>(stream.header.trigger_period_ps) * 1e-3;
    const double n_bins = std::round(period_ns / bin_ns);
    if (n_bins < 1.0 || std::abs(n_bins * bin_ns - period_ns) > 1e-3)
        throw PreconditionError("bin width must divide the trigger period");

    Histogram h;
    h.bin_ns = bin_ns;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    const std::uint64_t period = stream.header.trigger_period_ps;
    const double bin_ps = bin_ns * 1e3;
    for (const auto& tag : stream.tags)
    {
        if (tag.channel != channel)
            continue;
        auto bin = static_cast<std::size_t>(static_cast<double>(tag.time_ps % period) / bin_ps);
        h.counts[std::min(bin, h.counts.size() - 1)] += 1;
    }
    return h;
}

}  // namespace homsim
