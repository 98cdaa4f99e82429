#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hiercloud/distributions.hpp"
#include "hiercloud/hierarchy.hpp"
#include "hiercloud/point_cloud.hpp"

namespace hiercloud {

enum class CloudFormat { binary, csv };

// Binary cloud container: magic "HCPC", version u16, flags u16 (bit0
// color, bit1 labels, bit2 instance), point count u64, then when labels
// are present their level count u16, then the little-endian columnar
// blocks in declared order (x,y,z f64; r,g,b u8; labels i16 per level;
// instance i32).
void write_cloud(const std::string& path, const PointCloud& pc,
                 CloudFormat format = CloudFormat::binary);
PointCloud read_cloud(const std::string& path, CloudFormat format = CloudFormat::binary);

// Guess by file suffix: ".csv" -> csv, anything else binary.
CloudFormat cloud_format_for(const std::string& path);

// Prediction container: magic "HCPD", version u16, point count u64, level
// count u16, per-level class counts u16, then per level a row-major
// N x |C^h| float32 block.
void write_predictions(const std::string& path, const LevelDistributions& d);
LevelDistributions read_predictions(const std::string& path);

// Decoded-labels CSV: header "label1,...,labelH" (or "label" when H = 1),
// one row of class indices per point.
void write_labels(const std::string& path, const LabelMatrix& labels);
LabelMatrix read_labels(const std::string& path);

// Region split table: lines "region=train|val|test".
enum class SplitRole { train, validation, test };

struct SplitTable {
    std::map<std::string, SplitRole> regions;

    static SplitTable parse(std::string_view text);
    static SplitTable parse_file(const std::string& path);
};

struct SplitGroups {
    std::vector<std::string> train, validation, test;  // region names, input order
};

// Partitions named clouds by the table; throws when a table region is
// missing from the input.
SplitGroups apply_split(const std::map<std::string, PointCloud>& clouds, const SplitTable& table);

struct CloudStats {
    std::size_t count = 0;
    double min_x = 0, min_y = 0, min_z = 0;
    double max_x = 0, max_y = 0, max_z = 0;
    double mean_height = 0;
    // Points per square meter of the bounding-box footprint (infinite for
    // a degenerate footprint).
    double density = 0;
};

CloudStats cloud_stats(const PointCloud& pc);

}  // namespace hiercloud
