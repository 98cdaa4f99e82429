#include "hiercloud/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "hiercloud/error.hpp"

namespace hiercloud {

namespace {

constexpr std::uint16_t kCloudVersion = 1;
constexpr std::uint16_t kPredVersion = 1;
constexpr std::uint16_t kFlagColor = 1;
constexpr std::uint16_t kFlagLabels = 2;
constexpr std::uint16_t kFlagInstance = 4;

// Little-endian scalar I/O, byte-by-byte so files are identical on any
// host.
class ByteWriter {
public:
    explicit ByteWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) fail("cannot open for writing: " + path);
        path_ = path;
    }
    void u8(std::uint8_t v) { put(&v, 1); }
    void u16(std::uint16_t v) {
        std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
        put(b, 2);
    }
    void u64(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        put(b, 8);
    }
    void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
    void i32(std::int32_t v) {
        const auto u = static_cast<std::uint32_t>(v);
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(u >> (8 * i));
        put(b, 4);
    }
    void f32(float v) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(u >> (8 * i));
        put(b, 4);
    }
    void f64(double v) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        u64(u);
    }
    void magic(const char m[4]) { put(reinterpret_cast<const std::uint8_t*>(m), 4); }
    void close() {
        out_.close();
        if (!out_) fail("write failed: " + path_);
    }

private:
    void put(const std::uint8_t* data, std::size_t n) {
        out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!out_) fail("write failed: " + path_);
    }
    std::ofstream out_;
    std::string path_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) fail("cannot open: " + path);
        in_.seekg(0, std::ios::end);
        remaining_ = static_cast<std::uint64_t>(in_.tellg());
        in_.seekg(0, std::ios::beg);
    }
    std::uint8_t u8() {
        std::uint8_t v;
        get(&v, 1);
        return v;
    }
    std::uint16_t u16() {
        std::uint8_t b[2];
        get(b, 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint64_t u64() {
        std::uint8_t b[8];
        get(b, 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
    std::int32_t i32() {
        std::uint8_t b[4];
        get(b, 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return static_cast<std::int32_t>(v);
    }
    float f32() {
        std::uint8_t b[4];
        get(b, 4);
        std::uint32_t u = 0;
        for (int i = 3; i >= 0; --i) u = (u << 8) | b[i];
        float v;
        std::memcpy(&v, &u, 4);
        return v;
    }
    double f64() {
        const std::uint64_t u = u64();
        double v;
        std::memcpy(&v, &u, 8);
        return v;
    }
    void expect_magic(const char m[4], const char* kind) {
        char got[4];
        get(reinterpret_cast<std::uint8_t*>(got), 4);
        if (std::memcmp(got, m, 4) != 0)
            fail(std::string(kind) + " magic mismatch in " + path_ + " (not a " + kind + " file)");
    }
    // Used before bulk reads so truncation errors can name the shortfall.
    void require(std::uint64_t bytes, const char* what) {
        if (remaining_ < bytes)
            fail("truncated " + path_ + ": " + what + " needs " + std::to_string(bytes) +
                 " bytes at offset " + std::to_string(offset_) + ", file has " +
                 std::to_string(remaining_) + " left");
    }
    std::uint64_t remaining() const { return remaining_; }
    void expect_exhausted() {
        if (remaining_ != 0)
            fail(path_ + " has " + std::to_string(remaining_) + " trailing bytes at offset " +
                 std::to_string(offset_));
    }

private:
    void get(std::uint8_t* data, std::size_t n) {
        require(n, "value");
        in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) fail("read failed: " + path_);
        offset_ += n;
        remaining_ -= n;
    }
    std::ifstream in_;
    std::string path_;
    std::uint64_t offset_ = 0;
    std::uint64_t remaining_ = 0;
};

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_cloud_binary(const std::string& path, const PointCloud& pc) {
    ByteWriter w(path);
    w.magic("HCPC");
    w.u16(kCloudVersion);
    std::uint16_t flags = 0;
    if (pc.has_color()) flags |= kFlagColor;
    if (pc.has_labels()) flags |= kFlagLabels;
    if (pc.has_instances()) flags |= kFlagInstance;
    w.u16(flags);
    w.u64(pc.size());
    if (pc.has_labels()) w.u16(static_cast<std::uint16_t>(pc.label_levels()));
    for (double v : pc.x) w.f64(v);
    for (double v : pc.y) w.f64(v);
    for (double v : pc.z) w.f64(v);
    if (pc.has_color()) {
        for (auto v : pc.r) w.u8(v);
        for (auto v : pc.g) w.u8(v);
        for (auto v : pc.b) w.u8(v);
    }
    for (const auto& col : pc.label_columns)
        for (auto v : col) w.i16(v);
    if (pc.has_instances())
        for (auto v : pc.instance) w.i32(v);
    w.close();
}

PointCloud read_cloud_binary(const std::string& path) {
    ByteReader r(path);
    r.expect_magic("HCPC", "cloud");
    const auto version = r.u16();
    if (version != kCloudVersion)
        fail("unsupported cloud version " + std::to_string(version) + " in " + path);
    const auto flags = r.u16();
    const auto n = r.u64();
    PointCloud pc;
    std::size_t levels = 0;
    if (flags & kFlagLabels) levels = r.u16();

    std::uint64_t payload = n * 24;
    if (flags & kFlagColor) payload += n * 3;
    payload += n * 2 * levels;
    if (flags & kFlagInstance) payload += n * 4;
    r.require(payload, "point payload");

    pc.x.resize(n);
    pc.y.resize(n);
    pc.z.resize(n);
    for (auto& v : pc.x) v = r.f64();
    for (auto& v : pc.y) v = r.f64();
    for (auto& v : pc.z) v = r.f64();
    if (flags & kFlagColor) {
        pc.r.resize(n);
        pc.g.resize(n);
        pc.b.resize(n);
        for (auto& v : pc.r) v = r.u8();
        for (auto& v : pc.g) v = r.u8();
        for (auto& v : pc.b) v = r.u8();
    }
    pc.label_columns.resize(levels);
    for (auto& col : pc.label_columns) {
        col.resize(n);
        for (auto& v : col) v = r.i16();
    }
    if (flags & kFlagInstance) {
        pc.instance.resize(n);
        for (auto& v : pc.instance) v = r.i32();
    }
    r.expect_exhausted();
    pc.validate();
    return pc;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        out.push_back(field.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_cloud_csv(const std::string& path, const PointCloud& pc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    out << "x,y,z";
    if (pc.has_color()) out << ",r,g,b";
    if (pc.label_levels() == 1) out << ",label";
    else
        for (std::size_t l = 1; l <= pc.label_levels(); ++l) out << ",label" << l;
    if (pc.has_instances()) out << ",instance";
    out << "\n";
    for (std::size_t i = 0; i < pc.size(); ++i) {
        out << format_double(pc.x[i]) << ',' << format_double(pc.y[i]) << ',' << format_double(pc.z[i]);
        if (pc.has_color())
            out << ',' << static_cast<int>(pc.r[i]) << ',' << static_cast<int>(pc.g[i]) << ','
                << static_cast<int>(pc.b[i]);
        for (const auto& col : pc.label_columns) out << ',' << col[i];
        if (pc.has_instances()) out << ',' << pc.instance[i];
        out << "\n";
    }
    if (!out) fail("write failed: " + path);
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        fail(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

long parse_int(const std::string& s, const std::string& path, std::size_t line_no) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        fail(path + ":" + std::to_string(line_no) + ": bad integer '" + s + "'");
    return v;
}

PointCloud read_cloud_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) fail(path + ": empty file");
    const auto header = split_csv_line(line);

    // Column map: coordinates mandatory, the rest optional.
    int cx = -1, cy = -1, cz = -1, cr = -1, cg = -1, cb = -1, cinst = -1;
    std::vector<int> clabel;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& name = header[c];
        if (name == "x") cx = static_cast<int>(c);
        else if (name == "y") cy = static_cast<int>(c);
        else if (name == "z") cz = static_cast<int>(c);
        else if (name == "r") cr = static_cast<int>(c);
        else if (name == "g") cg = static_cast<int>(c);
        else if (name == "b") cb = static_cast<int>(c);
        else if (name == "instance") cinst = static_cast<int>(c);
        else if (name == "label") clabel.push_back(static_cast<int>(c));
        else if (name.starts_with("label")) clabel.push_back(static_cast<int>(c));
        else fail(path + ":1: unknown column '" + name + "'");
    }
    if (cx < 0 || cy < 0 || cz < 0) fail(path + ":1: missing x/y/z columns");
    const bool color = cr >= 0 || cg >= 0 || cb >= 0;
    if (color && (cr < 0 || cg < 0 || cb < 0)) fail(path + ":1: incomplete r,g,b columns");

    PointCloud pc;
    pc.label_columns.resize(clabel.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            fail(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                 " fields, got " + std::to_string(fields.size()));
        pc.x.push_back(parse_double(fields[cx], path, line_no));
        pc.y.push_back(parse_double(fields[cy], path, line_no));
        pc.z.push_back(parse_double(fields[cz], path, line_no));
        if (color) {
            pc.r.push_back(static_cast<std::uint8_t>(parse_int(fields[cr], path, line_no)));
            pc.g.push_back(static_cast<std::uint8_t>(parse_int(fields[cg], path, line_no)));
            pc.b.push_back(static_cast<std::uint8_t>(parse_int(fields[cb], path, line_no)));
        }
        for (std::size_t l = 0; l < clabel.size(); ++l)
            pc.label_columns[l].push_back(static_cast<std::int16_t>(parse_int(fields[clabel[l]], path, line_no)));
        if (cinst >= 0) pc.instance.push_back(static_cast<std::int32_t>(parse_int(fields[cinst], path, line_no)));
    }
    pc.validate();
    return pc;
}

}  // namespace

CloudFormat cloud_format_for(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0 ? CloudFormat::csv
                                                                             : CloudFormat::binary;
}

void write_cloud(const std::string& path, const PointCloud& pc, CloudFormat format) {
    pc.validate();
    if (format == CloudFormat::binary) write_cloud_binary(path, pc);
    else write_cloud_csv(path, pc);
}

PointCloud read_cloud(const std::string& path, CloudFormat format) {
    return format == CloudFormat::binary ? read_cloud_binary(path) : read_cloud_csv(path);
}

void write_predictions(const std::string& path, const LevelDistributions& d) {
    ByteWriter w(path);
    w.magic("HCPD");
    w.u16(kPredVersion);
    w.u64(d.points);
    w.u16(static_cast<std::uint16_t>(d.depth()));
    for (auto width : d.widths) w.u16(static_cast<std::uint16_t>(width));
    for (std::size_t lvl = 0; lvl < d.depth(); ++lvl) {
        if (d.levels[lvl].size() != d.points * d.widths[lvl])
            fail("prediction level " + std::to_string(lvl + 1) + " payload size mismatch");
        for (double v : d.levels[lvl]) w.f32(static_cast<float>(v));
    }
    w.close();
}

LevelDistributions read_predictions(const std::string& path) {
    ByteReader r(path);
    r.expect_magic("HCPD", "prediction");
    const auto version = r.u16();
    if (version != kPredVersion)
        fail("unsupported prediction version " + std::to_string(version) + " in " + path);
    const auto n = r.u64();
    const auto depth = r.u16();
    if (depth == 0) fail(path + ": prediction file declares zero levels");
    std::vector<std::size_t> widths(depth);
    std::uint64_t payload = 0;
    for (auto& wdt : widths) {
        wdt = r.u16();
        if (wdt == 0) fail(path + ": prediction level with zero classes");
        payload += 4 * n * wdt;
    }
    r.require(payload, "probability payload");
    LevelDistributions d(n, widths);
    for (std::size_t lvl = 0; lvl < d.depth(); ++lvl)
        for (auto& v : d.levels[lvl]) {
            v = r.f32();
            if (!std::isfinite(v)) fail(path + ": non-finite probability at level " + std::to_string(lvl + 1));
        }
    r.expect_exhausted();
    return d;
}

void write_labels(const std::string& path, const LabelMatrix& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    if (labels.levels == 1) out << "label\n";
    else {
        for (std::size_t l = 1; l <= labels.levels; ++l) out << (l > 1 ? "," : "") << "label" << l;
        out << "\n";
    }
    for (std::size_t i = 0; i < labels.points; ++i) {
        const auto row = labels.row(i);
        for (std::size_t l = 0; l < labels.levels; ++l) out << (l ? "," : "") << row[l];
        out << "\n";
    }
    if (!out) fail("write failed: " + path);
}

LabelMatrix read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) fail(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.empty()) fail(path + ":1: missing labels header");
    for (const auto& name : header)
        if (name != "label" && !name.starts_with("label"))
            fail(path + ":1: unexpected column '" + name + "' in labels file");
    std::vector<std::int32_t> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            fail(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                 " fields, got " + std::to_string(fields.size()));
        for (const auto& f : fields) values.push_back(static_cast<std::int32_t>(parse_int(f, path, line_no)));
    }
    LabelMatrix m;
    m.levels = header.size();
    m.points = values.size() / m.levels;
    m.values = std::move(values);
    return m;
}

SplitTable SplitTable::parse(std::string_view text) {
    SplitTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("split table line " + std::to_string(line_no) + ": expected region=role, got '" + line + "'");
        const std::string region = line.substr(0, eq);
        const std::string role = line.substr(eq + 1);
        if (region.empty()) fail("split table line " + std::to_string(line_no) + ": empty region name");
        SplitRole parsed;
        if (role == "train") parsed = SplitRole::train;
        else if (role == "val" || role == "validation") parsed = SplitRole::validation;
        else if (role == "test") parsed = SplitRole::test;
        else
            fail("split table line " + std::to_string(line_no) + ": unknown role '" + role + "'");
        if (!table.regions.emplace(region, parsed).second)
            fail("split table line " + std::to_string(line_no) + ": region '" + region + "' listed twice");
    }
    if (table.regions.empty()) fail("split table is empty");
    return table;
}

SplitTable SplitTable::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open split table: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

SplitGroups apply_split(const std::map<std::string, PointCloud>& clouds, const SplitTable& table) {
    for (const auto& [region, role] : table.regions)
        if (!clouds.contains(region)) fail("split table region '" + region + "' missing from input clouds");
    SplitGroups groups;
    for (const auto& [region, cloud] : clouds) {
        const auto it = table.regions.find(region);
        if (it == table.regions.end()) fail("region '" + region + "' is not in the split table");
        switch (it->second) {
            case SplitRole::train: groups.train.push_back(region); break;
            case SplitRole::validation: groups.validation.push_back(region); break;
            case SplitRole::test: groups.test.push_back(region); break;
        }
    }
    return groups;
}

CloudStats cloud_stats(const PointCloud& pc) {
    if (pc.size() == 0) fail("stats of an empty cloud");
    CloudStats s;
    s.count = pc.size();
    s.min_x = s.max_x = pc.x[0];
    s.min_y = s.max_y = pc.y[0];
    s.min_z = s.max_z = pc.z[0];
    double z_sum = 0.0;
    for (std::size_t i = 0; i < pc.size(); ++i) {
        s.min_x = std::min(s.min_x, pc.x[i]);
        s.max_x = std::max(s.max_x, pc.x[i]);
        s.min_y = std::min(s.min_y, pc.y[i]);
        s.max_y = std::max(s.max_y, pc.y[i]);
        s.min_z = std::min(s.min_z, pc.z[i]);
        s.max_z = std::max(s.max_z, pc.z[i]);
        z_sum += pc.z[i];
    }
    s.mean_height = z_sum / static_cast<double>(pc.size());
    const double area = (s.max_x - s.min_x) * (s.max_y - s.min_y);
    s.density = area > 0.0 ? static_cast<double>(pc.size()) / area
                           : std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace hiercloud
