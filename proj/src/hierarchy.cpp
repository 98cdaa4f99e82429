#include "hiercloud/hierarchy.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hiercloud/error.hpp"

namespace hiercloud {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void parse_fail(int line_no, const std::string& msg) {
    fail("hierarchy parse error: line " + std::to_string(line_no) + ": " + msg);
}

// "h:name" with h a level number; name may contain spaces.
std::pair<int, std::string> split_level_name(std::string_view tok, int line_no) {
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) parse_fail(line_no, "expected level:name, got '" + std::string(tok) + "'");
    int level = 0;
    const auto lvl = trim(tok.substr(0, colon));
    auto [p, ec] = std::from_chars(lvl.data(), lvl.data() + lvl.size(), level);
    if (ec != std::errc{} || p != lvl.data() + lvl.size())
        parse_fail(line_no, "bad level number '" + std::string(lvl) + "'");
    const auto name = trim(tok.substr(colon + 1));
    if (name.empty()) parse_fail(line_no, "empty class name");
    return {level, std::string(name)};
}

}  // namespace

LabelHierarchy LabelHierarchy::parse(std::string_view text) {
    LabelHierarchy h;
    int depth = 0;
    // edges as (child_level, child_name, parent_name) until names resolve
    struct RawEdge {
        int child_level;
        std::string child, parent;
        int line_no;
    };
    std::vector<RawEdge> edges;
    std::vector<int> seen_level_lines;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (line.starts_with("levels")) {
            if (depth != 0) parse_fail(line_no, "duplicate 'levels' header");
            const auto rest = trim(line.substr(6));
            auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), depth);
            if (ec != std::errc{} || depth < 1) parse_fail(line_no, "bad depth '" + std::string(rest) + "'");
            h.level_names_.assign(depth, {});
            seen_level_lines.assign(depth, 0);
        } else if (line.starts_with("level")) {
            if (depth == 0) parse_fail(line_no, "'level' before 'levels'");
            const auto colon = line.find(':');
            if (colon == std::string_view::npos) parse_fail(line_no, "missing ':' in level line");
            int lvl = 0;
            const auto num = trim(line.substr(5, colon - 5));
            auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), lvl);
            if (ec != std::errc{} || lvl < 1 || lvl > depth)
                parse_fail(line_no, "level number out of range: '" + std::string(num) + "'");
            if (seen_level_lines[lvl - 1]++) parse_fail(line_no, "duplicate level " + std::to_string(lvl) + " line");
            std::string_view rest = line.substr(colon + 1);
            while (!rest.empty()) {
                auto comma = rest.find(',');
                const auto name = trim(rest.substr(0, comma));
                if (name.empty()) parse_fail(line_no, "empty class name in level " + std::to_string(lvl));
                h.level_names_[lvl - 1].emplace_back(name);
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
            if (h.level_names_[lvl - 1].empty()) parse_fail(line_no, "level " + std::to_string(lvl) + " has no classes");
        } else if (line.starts_with("ignore")) {
            const auto name = trim(line.substr(6));
            if (name.empty()) parse_fail(line_no, "ignore line without a class name");
            h.ignore_name_ = std::string(name);
        } else if (line.starts_with("edge")) {
            const auto arrow = line.find("->");
            if (arrow == std::string_view::npos) parse_fail(line_no, "missing '->' in edge line");
            auto [cl, cn] = split_level_name(trim(line.substr(4, arrow - 4)), line_no);
            auto [pl, pn] = split_level_name(trim(line.substr(arrow + 2)), line_no);
            if (pl != cl - 1)
                parse_fail(line_no, "edge must connect adjacent levels (got " + std::to_string(cl) + " -> " +
                                        std::to_string(pl) + ")");
            edges.push_back({cl, std::move(cn), std::move(pn), line_no});
        } else {
            parse_fail(line_no, "unrecognized line '" + std::string(line) + "'");
        }
    }

    if (depth == 0) fail("hierarchy parse error: missing 'levels' header");
    for (int lvl = 1; lvl <= depth; ++lvl)
        if (!seen_level_lines[lvl - 1]) fail("hierarchy parse error: no 'level " + std::to_string(lvl) + "' line");

    h.parent_of_.assign(depth > 1 ? depth - 1 : 0, {});
    for (int lvl = 2; lvl <= depth; ++lvl)
        h.parent_of_[lvl - 2].assign(h.level_names_[lvl - 1].size(), -1);

    for (const auto& e : edges) {
        if (e.child_level < 2 || e.child_level > depth)
            parse_fail(e.line_no, "edge child level out of range: " + std::to_string(e.child_level));
        const auto child = h.find_class(e.child_level, e.child);
        if (!child) parse_fail(e.line_no, "unknown class '" + e.child + "' at level " + std::to_string(e.child_level));
        const auto parent = h.find_class(e.child_level - 1, e.parent);
        if (!parent)
            parse_fail(e.line_no, "unknown class '" + e.parent + "' at level " + std::to_string(e.child_level - 1));
        int& slot = h.parent_of_[e.child_level - 2][*child];
        if (slot != -1)
            parse_fail(e.line_no, "class '" + e.child + "' at level " + std::to_string(e.child_level) +
                                      " has more than one parent");
        slot = *parent;
    }

    h.validate_and_build();
    return h;
}

LabelHierarchy LabelHierarchy::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open hierarchy file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void LabelHierarchy::validate_and_build() {
    const int depth = this->depth();

    // Unique names per level.
    for (int lvl = 1; lvl <= depth; ++lvl) {
        std::unordered_set<std::string_view> seen;
        for (const auto& name : level_names_[lvl - 1])
            if (!seen.insert(name).second)
                fail("hierarchy validation error: duplicate class '" + name + "' at level " + std::to_string(lvl));
    }

    // Every class below the root level needs exactly one parent; the parse
    // step already rejected multi-parent, so only orphans remain.
    for (int lvl = 2; lvl <= depth; ++lvl)
        for (std::size_t i = 0; i < level_names_[lvl - 1].size(); ++i)
            if (parent_of_[lvl - 2][i] == -1)
                fail("hierarchy validation error: class '" + level_names_[lvl - 1][i] + "' at level " +
                     std::to_string(lvl) + " has no parent");

    children_of_.assign(depth, {});
    for (int lvl = 1; lvl <= depth; ++lvl) children_of_[lvl - 1].assign(level_names_[lvl - 1].size(), {});
    for (int lvl = 2; lvl <= depth; ++lvl)
        for (std::size_t i = 0; i < level_names_[lvl - 1].size(); ++i)
            children_of_[lvl - 2][parent_of_[lvl - 2][i]].push_back(static_cast<int>(i));

    if (has_ignore()) {
        // The excluded class must form its own chain: its parent is the
        // excluded class of the level above and all its children are
        // excluded classes, so ignoring at one level ignores everywhere.
        for (int lvl = 1; lvl <= depth; ++lvl) {
            const auto idx = ignore_index(lvl);
            if (!idx) continue;
            if (lvl >= 2) {
                const int parent = parent_of_[lvl - 2][*idx];
                if (level_names_[lvl - 2][parent] != ignore_name_)
                    fail("hierarchy validation error: ignore class '" + ignore_name_ + "' at level " +
                         std::to_string(lvl) + " has non-ignore parent '" + level_names_[lvl - 2][parent] + "'");
            }
            if (lvl < depth) {
                for (int child : children_of_[lvl - 1][*idx])
                    if (level_names_[lvl][child] != ignore_name_)
                        fail("hierarchy validation error: ignore class '" + ignore_name_ + "' at level " +
                             std::to_string(lvl) + " has non-ignore child '" + level_names_[lvl][child] + "'");
            }
        }
    }

    // Cache one root-to-leaf path per level-H class.
    const std::size_t leaves = level_names_.back().size();
    fc_paths_ = LabelMatrix(leaves, static_cast<std::size_t>(depth));
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
        auto row = fc_paths_.row(leaf);
        int idx = static_cast<int>(leaf);
        for (int lvl = depth; lvl >= 1; --lvl) {
            row[lvl - 1] = idx;
            if (lvl >= 2) idx = parent_of_[lvl - 2][idx];
        }
    }
}

std::string LabelHierarchy::serialize() const {
    std::ostringstream out;
    const int depth = this->depth();
    out << "levels " << depth << "\n";
    for (int lvl = 1; lvl <= depth; ++lvl) {
        out << "level " << lvl << ": ";
        const auto& names = level_names_[lvl - 1];
        for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
        out << "\n";
    }
    if (has_ignore()) out << "ignore " << ignore_name_ << "\n";
    for (int lvl = 2; lvl <= depth; ++lvl)
        for (std::size_t i = 0; i < level_names_[lvl - 1].size(); ++i)
            out << "edge " << lvl << ":" << level_names_[lvl - 1][i] << " -> " << lvl - 1 << ":"
                << level_names_[lvl - 2][parent_of_[lvl - 2][i]] << "\n";
    return out.str();
}

std::optional<int> LabelHierarchy::find_class(int level, std::string_view name) const {
    const auto& names = level_names_[level - 1];
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<int>(it - names.begin());
}

std::optional<int> LabelHierarchy::ignore_index(int level) const {
    if (!has_ignore()) return std::nullopt;
    return find_class(level, ignore_name_);
}

ClassRef LabelHierarchy::project(ClassRef c, int target_level) const {
    if (c.level < 1 || c.level > depth() || c.index < 0 ||
        static_cast<std::size_t>(c.index) >= level_size(c.level))
        fail("project: class reference (" + std::to_string(c.level) + ", " + std::to_string(c.index) +
             ") is out of range");
    if (target_level < 1 || target_level > c.level)
        fail("project: target level " + std::to_string(target_level) + " out of range for class at level " +
             std::to_string(c.level));
    int idx = c.index;
    for (int lvl = c.level; lvl > target_level; --lvl) idx = parent_of_[lvl - 2][idx];
    return {target_level, idx};
}

bool LabelHierarchy::is_fully_consistent(std::span<const std::int32_t> label) const {
    for (std::size_t h = 1; h < label.size(); ++h)
        if (parent_of_[h - 1][label[h]] != label[h - 1]) return false;
    return true;
}

LabelMatrix LabelHierarchy::lift_leaf_labels(std::span<const std::int32_t> leaf_labels) const {
    const auto depth = static_cast<std::size_t>(this->depth());
    LabelMatrix out(leaf_labels.size(), depth);
    const auto leaves = static_cast<std::int32_t>(leaf_count());
    for (std::size_t i = 0; i < leaf_labels.size(); ++i) {
        const auto leaf = leaf_labels[i];
        if (leaf < 0 || leaf >= leaves)
            fail("lift_leaf_labels: leaf index " + std::to_string(leaf) + " out of range at point " +
                 std::to_string(i));
        const auto path = fc_paths_.row(static_cast<std::size_t>(leaf));
        std::copy(path.begin(), path.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace hiercloud
