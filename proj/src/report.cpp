#include "hiercloud/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hiercloud/error.hpp"
#include "hiercloud/parallel.hpp"

namespace hiercloud {

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt17(*v) : "undefined"; }

std::string pct(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
    return buf;
}

}  // namespace

MetricReport evaluate(const LabelHierarchy& h, const LabelMatrix& truth, const LabelMatrix& predicted,
                      std::span<const double> alphas, int threads) {
    const auto depth = static_cast<std::size_t>(h.depth());
    if (truth.points != predicted.points) fail("truth and prediction cover different point counts");
    if (truth.levels != depth || predicted.levels != depth)
        fail("label level count does not match hierarchy depth");

    // Chunked accumulation with in-order merges; counts are integers, so
    // the result is identical for any thread count.
    const std::size_t chunks = chunk_count(truth.points, threads);
    std::vector<std::vector<LevelConfusion>> conf(chunks);
    std::vector<ConsistencyAccumulator> cons(chunks, ConsistencyAccumulator(h.depth()));
    const auto leaf_ignore = h.ignore_index(h.depth());

    parallel_chunks(truth.points, threads, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        auto& local = conf[chunk];
        local.reserve(depth);
        for (std::size_t lvl = 0; lvl < depth; ++lvl)
            local.emplace_back(static_cast<int>(lvl) + 1, h.level_size(static_cast<int>(lvl) + 1),
                               h.ignore_index(static_cast<int>(lvl) + 1));
        for (std::size_t i = begin; i < end; ++i) {
            const auto gt = truth.row(i);
            const auto pred = predicted.row(i);
            for (std::size_t lvl = 0; lvl < depth; ++lvl) local[lvl].add(gt[lvl], pred[lvl]);
            if (!leaf_ignore || gt[depth - 1] != *leaf_ignore)
                cons[chunk].add(consistency_proportion(h, pred));
        }
    });
    for (std::size_t chunk = 1; chunk < chunks; ++chunk) {
        for (std::size_t lvl = 0; lvl < depth; ++lvl) conf[0][lvl].merge(conf[chunk][lvl]);
        cons[0].merge(cons[chunk]);
    }

    MetricReport report;
    report.levels.resize(depth);
    for (std::size_t lvl = 0; lvl < depth; ++lvl) {
        auto& out = report.levels[lvl];
        out.oa = overall_accuracy(conf[0][lvl]);
        out.class_iou = per_class_iou(conf[0][lvl]);
        double sum = 0.0;
        std::size_t defined = 0;
        for (const auto& iou : out.class_iou)
            if (iou) {
                sum += *iou;
                ++defined;
            }
        if (defined > 0) out.miou = sum / static_cast<double>(defined);
    }
    report.alphas.assign(alphas.begin(), alphas.end());
    for (double a : alphas) report.cr.push_back(cons[0].consistency_rate(a));
    return report;
}

std::string report_to_text(const MetricReport& report) {
    std::ostringstream out;
    out << "levels=" << report.levels.size() << "\n";
    out << "alphas=";
    for (std::size_t i = 0; i < report.alphas.size(); ++i) out << (i ? "," : "") << fmt17(report.alphas[i]);
    out << "\ncr=";
    for (std::size_t i = 0; i < report.cr.size(); ++i) out << (i ? "," : "") << fmt17(report.cr[i]);
    out << "\n";
    for (std::size_t lvl = 0; lvl < report.levels.size(); ++lvl) {
        const auto& l = report.levels[lvl];
        out << "level." << lvl + 1 << ".classes=" << l.class_iou.size() << "\n";
        out << "level." << lvl + 1 << ".oa=" << fmt17(l.oa) << "\n";
        out << "level." << lvl + 1 << ".miou=" << fmt_opt(l.miou) << "\n";
        for (std::size_t c = 0; c < l.class_iou.size(); ++c)
            out << "level." << lvl + 1 << ".iou." << c << "=" << fmt_opt(l.class_iou[c]) << "\n";
    }
    if (!report.wcov.empty()) {
        out << "wcov.level=" << report.wcov_level << "\n";
        for (std::size_t c = 0; c < report.wcov.size(); ++c)
            out << "wcov." << c << "=" << fmt_opt(report.wcov[c]) << "\n";
    }
    return out.str();
}

namespace {

double parse_report_double(std::string_view v) {
    const std::string s(v);
    char* end = nullptr;
    const double parsed = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty()) fail("report parse error: bad number '" + s + "'");
    return parsed;
}

std::optional<double> parse_report_opt(std::string_view v) {
    if (v == "undefined") return std::nullopt;
    return parse_report_double(v);
}

std::vector<double> parse_report_list(std::string_view v) {
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        out.push_back(parse_report_double(v.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

std::size_t parse_report_size(std::string_view v) {
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc{} || p != v.data() + v.size())
        fail("report parse error: bad count '" + std::string(v) + "'");
    return n;
}

}  // namespace

MetricReport report_from_text(std::string_view text) {
    MetricReport report;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("report parse error: missing '=' in '" + line + "'");
        const std::string_view key{line.data(), eq};
        const std::string_view value{line.data() + eq + 1, line.size() - eq - 1};

        if (key == "levels") {
            report.levels.resize(parse_report_size(value));
        } else if (key == "alphas") {
            report.alphas = parse_report_list(value);
        } else if (key == "cr") {
            report.cr = parse_report_list(value);
        } else if (key == "wcov.level") {
            report.wcov_level = static_cast<int>(parse_report_size(value));
        } else if (key.starts_with("wcov.")) {
            const auto idx = parse_report_size(key.substr(5));
            if (report.wcov.size() <= idx) report.wcov.resize(idx + 1);
            report.wcov[idx] = parse_report_opt(value);
        } else if (key.starts_with("level.")) {
            auto rest = key.substr(6);
            const auto dot = rest.find('.');
            if (dot == std::string_view::npos) fail("report parse error: bad key '" + line + "'");
            const auto lvl = parse_report_size(rest.substr(0, dot));
            if (lvl == 0 || lvl > report.levels.size())
                fail("report parse error: level " + std::to_string(lvl) + " out of range");
            auto& level = report.levels[lvl - 1];
            rest = rest.substr(dot + 1);
            if (rest == "classes") {
                level.class_iou.resize(parse_report_size(value));
            } else if (rest == "oa") {
                level.oa = parse_report_double(value);
            } else if (rest == "miou") {
                level.miou = parse_report_opt(value);
            } else if (rest.starts_with("iou.")) {
                const auto idx = parse_report_size(rest.substr(4));
                if (idx >= level.class_iou.size()) fail("report parse error: class index out of range");
                level.class_iou[idx] = parse_report_opt(value);
            } else {
                fail("report parse error: unknown key '" + std::string(key) + "'");
            }
        } else {
            fail("report parse error: unknown key '" + std::string(key) + "'");
        }
    }
    return report;
}

std::string report_table(const LabelHierarchy& h,
                         const std::vector<std::pair<std::string, MetricReport>>& methods) {
    if (methods.empty()) fail("report table needs at least one method");
    const auto depth = static_cast<std::size_t>(h.depth());
    for (const auto& [name, report] : methods)
        if (report.levels.size() != depth) fail("report for '" + name + "' does not match hierarchy depth");

    std::vector<std::vector<std::string>> rows;
    auto row = [&](const std::string& level, const std::string& cls) {
        rows.push_back({level, cls});
        return rows.size() - 1;
    };

    rows.push_back({"Level", "Class"});
    for (const auto& [name, report] : methods) rows.back().push_back(name);

    for (std::size_t lvl = 0; lvl < depth; ++lvl) {
        const auto& names = h.level_classes(static_cast<int>(lvl) + 1);
        const auto ignore = h.ignore_index(static_cast<int>(lvl) + 1);
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (ignore && static_cast<int>(c) == *ignore) continue;
            const auto r = row("C" + std::to_string(lvl + 1), names[c]);
            for (const auto& [name, report] : methods)
                rows[r].push_back(pct(report.levels[lvl].class_iou[c]));
        }
        const auto oa_row = row("C" + std::to_string(lvl + 1), "(OA)");
        for (const auto& [name, report] : methods) rows[oa_row].push_back(pct(report.levels[lvl].oa));
        const auto miou_row = row("C" + std::to_string(lvl + 1), "(mIoU)");
        for (const auto& [name, report] : methods) rows[miou_row].push_back(pct(report.levels[lvl].miou));
    }

    const auto& alphas = methods.front().second.alphas;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        char label[32];
        std::snprintf(label, sizeof label, "CR(%.2g)", alphas[a]);
        const auto r = row("", label);
        for (const auto& [name, report] : methods)
            rows[r].push_back(a < report.cr.size() ? pct(report.cr[a]) : "-");
    }

    if (!methods.front().second.wcov.empty()) {
        const int wl = methods.front().second.wcov_level;
        const auto& names = h.level_classes(wl);
        for (std::size_t c = 0; c < methods.front().second.wcov.size() && c < names.size(); ++c) {
            bool any = false;
            for (const auto& [name, report] : methods)
                if (c < report.wcov.size() && report.wcov[c]) any = true;
            if (!any) continue;
            const auto r = row("C" + std::to_string(wl), "WCov " + names[c]);
            for (const auto& [name, report] : methods)
                rows[r].push_back(c < report.wcov.size() ? pct(report.wcov[c]) : "-");
        }
    }

    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        if (width.size() < r.size()) width.resize(r.size(), 0);
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream out;
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) out << "  ";
            // Numeric columns right-aligned, the two name columns left.
            if (c >= 2) out << std::string(width[c] - r[c].size(), ' ') << r[c];
            else out << r[c] << std::string(width[c] - r[c].size(), ' ');
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace hiercloud
