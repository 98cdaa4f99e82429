#include "hiercloud/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "hiercloud/dataset_io.hpp"
#include "hiercloud/ensemble.hpp"
#include "hiercloud/error.hpp"
#include "hiercloud/loss.hpp"
#include "hiercloud/parallel.hpp"
#include "hiercloud/report.hpp"
#include "hiercloud/sampling.hpp"
#include "hiercloud/synth.hpp"

namespace hiercloud::cli {

namespace {

// Ground-truth labels can arrive as a binary/CSV cloud carrying a leaf
// column (lifted here) or full tuples, or as a decoded-labels CSV.
LabelMatrix load_labels_any(const std::string& path, const LabelHierarchy& h) {
    const auto depth = static_cast<std::size_t>(h.depth());
    bool is_cloud = cloud_format_for(path) == CloudFormat::binary;
    if (!is_cloud) {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) fail("cannot open: " + path);
        std::string header;
        std::getline(probe, header);
        is_cloud = header.find('x') != std::string::npos && header.find("label") != 0;
    }
    LabelMatrix labels;
    if (is_cloud) {
        const PointCloud pc = read_cloud(path, cloud_format_for(path));
        if (!pc.has_labels()) fail(path + " carries no labels");
        if (pc.label_levels() == 1) {
            std::vector<std::int32_t> leaf(pc.size());
            for (std::size_t i = 0; i < pc.size(); ++i) leaf[i] = pc.label_columns[0][i];
            return h.lift_leaf_labels(leaf);
        }
        if (pc.label_levels() != depth)
            fail(path + " has " + std::to_string(pc.label_levels()) + " label columns, expected 1 or " +
                 std::to_string(depth));
        labels.points = pc.size();
        labels.levels = depth;
        labels.values.resize(pc.size() * depth);
        for (std::size_t i = 0; i < pc.size(); ++i)
            for (std::size_t l = 0; l < depth; ++l)
                labels.values[i * depth + l] = pc.label_columns[l][i];
    } else {
        labels = read_labels(path);
        if (labels.levels == 1 && depth > 1) {
            std::vector<std::int32_t> leaf(labels.values.begin(), labels.values.end());
            return h.lift_leaf_labels(leaf);
        }
        if (labels.levels != depth)
            fail(path + " has " + std::to_string(labels.levels) + " label columns, expected " +
                 std::to_string(depth));
    }
    for (std::size_t i = 0; i < labels.points; ++i) {
        const auto row = labels.row(i);
        for (std::size_t l = 0; l < depth; ++l)
            if (row[l] < 0 || static_cast<std::size_t>(row[l]) >= h.level_size(static_cast<int>(l) + 1))
                fail(path + ": label " + std::to_string(row[l]) + " out of range at level " +
                     std::to_string(l + 1) + ", point " + std::to_string(i));
    }
    return labels;
}

// "name=path" or bare path (auto-named by the caller).
std::pair<std::string, std::string> split_named(const std::string& value, const std::string& fallback) {
    const auto eq = value.find('=');
    if (eq == std::string::npos) return {fallback, value};
    return {value.substr(0, eq), value.substr(eq + 1)};
}

std::string numbered_path(const std::string& pattern, std::size_t index, std::size_t total) {
    if (total <= 1) return pattern;
    const std::filesystem::path p(pattern);
    auto stem = p.stem().string() + "_" + std::to_string(index);
    return (p.parent_path() / (stem + p.extension().string())).string();
}

void write_index_list(const std::string& path, std::span<const std::size_t> indices) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    for (auto i : indices) out << i << "\n";
    if (!out) fail("write failed: " + path);
}

LossWeights expand_weights(const std::vector<double>& beta, const std::vector<double>& gamma, int depth) {
    LossWeights w = LossWeights::defaults(depth);
    if (beta.size() == 1) w.beta.assign(depth, beta[0]);
    else if (!beta.empty()) {
        if (beta.size() != static_cast<std::size_t>(depth))
            fail("expected 1 or " + std::to_string(depth) + " beta values, got " + std::to_string(beta.size()));
        w.beta = beta;
    }
    if (gamma.size() == 1) w.gamma.assign(depth > 0 ? depth - 1 : 0, gamma[0]);
    else if (!gamma.empty()) {
        if (gamma.size() != static_cast<std::size_t>(depth - 1))
            fail("expected 1 or " + std::to_string(depth - 1) + " gamma values, got " +
                 std::to_string(gamma.size()));
        w.gamma = gamma;
    }
    return w;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    out << text;
    if (!out) fail("write failed: " + path);
}

int run_validate(const std::string& hier_path) {
    const LabelHierarchy h = LabelHierarchy::parse_file(hier_path);
    std::cout << "levels: " << h.depth() << "\n";
    for (int lvl = 1; lvl <= h.depth(); ++lvl)
        std::cout << "level " << lvl << ": " << h.level_size(lvl) << " classes\n";
    std::cout << "fc paths: " << h.leaf_count() << "\n";
    if (h.has_ignore()) std::cout << "ignore class: " << h.ignore_name() << "\n";
    return 0;
}

int run_stats(const std::string& cloud_path) {
    const PointCloud pc = read_cloud(cloud_path, cloud_format_for(cloud_path));
    const CloudStats s = cloud_stats(pc);
    std::cout << "points: " << s.count << "\n";
    std::cout << "bbox min: " << s.min_x << " " << s.min_y << " " << s.min_z << "\n";
    std::cout << "bbox max: " << s.max_x << " " << s.max_y << " " << s.max_z << "\n";
    std::cout << "mean height: " << s.mean_height << "\n";
    std::cout << "points per m^2 (bbox footprint): " << s.density << "\n";
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"hierarchical point-cloud segmentation toolkit"};
    app.require_subcommand(1);

    // validate
    std::string hier_path;
    auto* validate = app.add_subcommand("validate", "parse and check a hierarchy file");
    validate->add_option("hierarchy", hier_path, "hierarchy config file")->required();

    // stats
    std::string stats_cloud;
    auto* stats = app.add_subcommand("stats", "descriptive statistics of a cloud");
    stats->add_option("cloud", stats_cloud, "point cloud file")->required();

    // sample
    std::string sample_cloud, sample_method = "rbs", sample_out;
    SampleSpec sspec;
    std::size_t sample_count = 1;
    bool sample_indices = false;
    auto* sample = app.add_subcommand("sample", "subsample a cloud (voxel, rbs, rc-knn)");
    sample->add_option("cloud", sample_cloud, "point cloud file")->required();
    sample->add_option("--method", sample_method, "voxel|rbs|rc-knn")
        ->check(CLI::IsMember({"voxel", "rbs", "rc-knn"}));
    sample->add_option("--voxel-size", sspec.voxel_size, "voxel edge in meters");
    sample->add_option("--block", [&sspec](const std::vector<std::string>& vals) {
        try {
            std::size_t used_l = 0, used_w = 0;
            sspec.block_l = std::stod(vals[0], &used_l);
            sspec.block_w = std::stod(vals[1], &used_w);
            return used_l == vals[0].size() && used_w == vals[1].size();
        } catch (const std::exception&) {
            return false;
        }
    }, "block length and width in meters")->expected(2);
    sample->add_option("--n", sspec.sample_size, "points per sample");
    sample->add_option("--seed", sspec.seed, "RNG seed");
    sample->add_option("--count", sample_count, "number of samples to draw");
    sample->add_option("--out", sample_out, "output path (suffixed when --count > 1)")->required();
    sample->add_flag("--indices", sample_indices, "write index lists instead of point subsets");

    // synth
    std::string synth_hier, synth_mode = "uniform", synth_cloud_out, synth_pred_out, synth_labels_out;
    SynthSpec yspec;
    auto* synth = app.add_subcommand("synth", "generate synthetic ground truth and predictions");
    synth->add_option("--hier", synth_hier, "hierarchy config file")->required();
    synth->add_option("--points", yspec.points, "number of points");
    synth->add_option("--mode", synth_mode, "uniform|clustered")
        ->check(CLI::IsMember({"uniform", "clustered"}));
    synth->add_option("--extent", yspec.extent, "scene extent in meters");
    synth->add_option("--blobs-per-leaf", yspec.blobs_per_leaf, "clusters per leaf class");
    synth->add_option("--blob-sigma", yspec.blob_sigma, "cluster spread in meters");
    synth->add_option("--noise", yspec.label_noise, "leaf label noise rate");
    synth->add_option("--inconsistency", yspec.inconsistency, "per-point level corruption rate");
    synth->add_option("--sharpness", yspec.sharpness, "probability concentration on the true class");
    synth->add_option("--seed", yspec.seed, "RNG seed");
    synth->add_option("--out-cloud", synth_cloud_out, "ground-truth cloud output");
    synth->add_option("--out-pred", synth_pred_out, "predictions output");
    synth->add_option("--out-labels", synth_labels_out, "full-tuple labels CSV output");

    // ensemble
    std::string ens_pred, ens_hier, ens_out, ens_mode = "he";
    int ens_threads = default_thread_count();
    auto* ensemble = app.add_subcommand("ensemble", "decode a predictions file into labels");
    ensemble->add_option("predictions", ens_pred, "predictions file")->required();
    ensemble->add_option("--hier", ens_hier, "hierarchy config file")->required();
    ensemble->add_option("--out", ens_out, "decoded-labels CSV output")->required();
    ensemble->add_option("--mode", ens_mode, "he (path decoder) or mc (per-level argmax)")
        ->check(CLI::IsMember({"he", "mc"}));
    ensemble->add_option("--threads", ens_threads, "worker threads");

    // eval
    std::string eval_hier, eval_gt, eval_out, eval_machine_out, eval_pred_cloud;
    std::vector<std::string> eval_pred, eval_pred_mc, eval_labels;
    std::vector<double> eval_alphas;
    int eval_threads = default_thread_count();
    bool eval_wcov = false;
    int eval_wcov_level = 0;
    auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
    eval->add_option("--hier", eval_hier, "hierarchy config file")->required();
    eval->add_option("--gt", eval_gt, "ground-truth cloud or labels file")->required();
    eval->add_option("--pred", eval_pred, "predictions file, decoded with HE (name=path accepted)");
    eval->add_option("--pred-mc", eval_pred_mc, "predictions file, decoded with MC (name=path accepted)");
    eval->add_option("--labels", eval_labels, "pre-decoded labels file (name=path accepted)");
    eval->add_option("--alpha", eval_alphas, "CR threshold(s)");
    eval->add_option("--out", eval_out, "table output file (default stdout)");
    eval->add_option("--machine-out", eval_machine_out, "machine-readable report output");
    eval->add_flag("--wcov", eval_wcov, "compute per-class weighted coverage from instance ids");
    eval->add_option("--pred-cloud", eval_pred_cloud, "cloud with predicted instance ids (for --wcov)");
    eval->add_option("--wcov-level", eval_wcov_level, "granularity level for --wcov (default H-1)");
    eval->add_option("--threads", eval_threads, "worker threads");

    // loss
    std::string loss_hier, loss_pred, loss_gt;
    std::vector<double> loss_beta, loss_gamma;
    auto* loss_cmd = app.add_subcommand("loss", "evaluate the training objective over a predictions file");
    loss_cmd->add_option("--hier", loss_hier, "hierarchy config file")->required();
    loss_cmd->add_option("--pred", loss_pred, "predictions file")->required();
    loss_cmd->add_option("--gt", loss_gt, "ground-truth cloud or labels file")->required();
    loss_cmd->add_option("--beta", loss_beta, "prediction weights (1 value broadcasts)");
    loss_cmd->add_option("--gamma", loss_gamma, "consistency weights (1 value broadcasts)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (validate->parsed()) return run_validate(hier_path);
        if (stats->parsed()) return run_stats(stats_cloud);

        if (sample->parsed()) {
            sspec.validate();
            const PointCloud pc = read_cloud(sample_cloud, cloud_format_for(sample_cloud));
            if (sample_method == "voxel") {
                const auto kept = voxel_downsample(pc, sspec.voxel_size);
                if (sample_indices) write_index_list(sample_out, kept);
                else write_cloud(sample_out, pc.subset(kept), cloud_format_for(sample_out));
                std::cout << "voxel " << sspec.voxel_size << " m: kept " << kept.size() << " of "
                          << pc.size() << " points\n";
                return 0;
            }
            for (std::size_t b = 0; b < sample_count; ++b) {
                // Per-sample streams derive from (seed, sample index).
                const std::uint64_t sample_seed = sspec.seed + 0x9E3779B97F4A7C15ULL * b;
                std::vector<std::size_t> indices;
                std::string note;
                if (sample_method == "rbs") {
                    const auto block =
                        rbs(pc, sspec.block_l, sspec.block_w, sspec.sample_size, sample_seed);
                    indices = block.indices;
                    if (block.padded) note = " (padded)";
                } else {
                    indices = rc_knn(pc, sspec.sample_size, sample_seed);
                }
                const auto path = numbered_path(sample_out, b, sample_count);
                if (sample_indices) write_index_list(path, indices);
                else write_cloud(path, pc.subset(indices), cloud_format_for(path));
                std::cout << "sample " << b << ": " << indices.size() << " points -> " << path << note
                          << "\n";
            }
            return 0;
        }

        if (synth->parsed()) {
            yspec.geometry =
                synth_mode == "clustered" ? SynthGeometry::clustered : SynthGeometry::uniform_box;
            const LabelHierarchy h = LabelHierarchy::parse_file(synth_hier);
            const SynthGroundTruth gt = gen_ground_truth(h, yspec);
            if (!synth_cloud_out.empty())
                write_cloud(synth_cloud_out, gt.cloud, cloud_format_for(synth_cloud_out));
            if (!synth_labels_out.empty()) write_labels(synth_labels_out, gt.labels);
            if (!synth_pred_out.empty())
                write_predictions(synth_pred_out, gen_predictions(h, yspec, gt.labels));
            std::cout << "generated " << yspec.points << " points over " << h.leaf_count()
                      << " leaf classes\n";
            return 0;
        }

        if (ensemble->parsed()) {
            const LabelHierarchy h = LabelHierarchy::parse_file(ens_hier);
            const LevelDistributions d = read_predictions(ens_pred);
            const LabelMatrix decoded = ens_mode == "mc" ? mc_decision(h, d, ens_threads)
                                                          : hierarchical_ensemble(h, d, {}, ens_threads);
            write_labels(ens_out, decoded);
            std::cout << "decoded " << decoded.points << " points (" << ens_mode << ") -> " << ens_out
                      << "\n";
            return 0;
        }

        if (eval->parsed()) {
            const LabelHierarchy h = LabelHierarchy::parse_file(eval_hier);
            const LabelMatrix truth = load_labels_any(eval_gt, h);
            if (eval_alphas.empty()) eval_alphas.push_back(1.0);

            std::vector<std::pair<std::string, MetricReport>> methods;
            auto add_method = [&](const std::string& name, const LabelMatrix& predicted) {
                methods.emplace_back(name, evaluate(h, truth, predicted, eval_alphas, eval_threads));
            };
            for (std::size_t i = 0; i < eval_pred.size(); ++i) {
                const auto [name, path] =
                    split_named(eval_pred[i], eval_pred.size() > 1 ? "HE" + std::to_string(i + 1) : "HE");
                add_method(name, hierarchical_ensemble(h, read_predictions(path), {}, eval_threads));
            }
            for (std::size_t i = 0; i < eval_pred_mc.size(); ++i) {
                const auto [name, path] = split_named(
                    eval_pred_mc[i], eval_pred_mc.size() > 1 ? "MC" + std::to_string(i + 1) : "MC");
                add_method(name, mc_decision(h, read_predictions(path), eval_threads));
            }
            for (std::size_t i = 0; i < eval_labels.size(); ++i) {
                const auto [name, path] = split_named(
                    eval_labels[i], eval_labels.size() > 1 ? "labels" + std::to_string(i + 1) : "labels");
                add_method(name, load_labels_any(path, h));
            }
            if (methods.empty()) fail("eval needs at least one of --pred, --pred-mc, --labels");

            if (eval_wcov) {
                if (eval_pred_cloud.empty()) fail("--wcov needs --pred-cloud with instance ids");
                const PointCloud gt_cloud = read_cloud(eval_gt, cloud_format_for(eval_gt));
                const PointCloud pred_cloud =
                    read_cloud(eval_pred_cloud, cloud_format_for(eval_pred_cloud));
                if (!gt_cloud.has_instances()) fail(eval_gt + " carries no instance ids");
                if (!pred_cloud.has_instances()) fail(eval_pred_cloud + " carries no instance ids");
                if (pred_cloud.size() != gt_cloud.size())
                    fail("instance clouds cover different point counts");
                const int wl = eval_wcov_level > 0 ? eval_wcov_level : std::max(1, h.depth() - 1);
                const auto ignore = h.ignore_index(wl);
                auto& target = methods.front().second;
                target.wcov_level = wl;
                target.wcov.assign(h.level_size(wl), std::nullopt);
                for (std::size_t c = 0; c < h.level_size(wl); ++c) {
                    if (ignore && static_cast<int>(c) == *ignore) continue;
                    // Restrict both id sets to points of this ground-truth class.
                    InstanceSet gt_set, pred_set;
                    gt_set.ids.resize(gt_cloud.size(), -1);
                    pred_set.ids.resize(gt_cloud.size(), -1);
                    bool any = false;
                    for (std::size_t i = 0; i < gt_cloud.size(); ++i) {
                        if (truth.row(i)[wl - 1] != static_cast<std::int32_t>(c)) continue;
                        gt_set.ids[i] = gt_cloud.instance[i];
                        pred_set.ids[i] = pred_cloud.instance[i];
                        if (gt_cloud.instance[i] >= 0) any = true;
                    }
                    if (any) target.wcov[c] = wcov(gt_set, pred_set);
                }
            }

            emit(report_table(h, methods), eval_out);
            if (!eval_machine_out.empty()) {
                for (const auto& [name, report] : methods) {
                    const std::string path =
                        methods.size() > 1 ? eval_machine_out + "." + name : eval_machine_out;
                    emit(report_to_text(report), path);
                }
            }
            return 0;
        }

        if (loss_cmd->parsed()) {
            const LabelHierarchy h = LabelHierarchy::parse_file(loss_hier);
            LevelDistributions d = read_predictions(loss_pred);
            d.validate(h);
            if (!d.normalized) d.normalize_rows();
            const LabelMatrix targets = load_labels_any(loss_gt, h);
            const LossWeights w = expand_weights(loss_beta, loss_gamma, h.depth());
            const LossValue v = total_loss(h, d, targets, w);
            std::cout << "total: " << v.total << "\n";
            std::cout << "prediction: " << v.prediction << "\n";
            std::cout << "consistency: " << v.consistency << "\n";
            for (std::size_t lvl = 0; lvl < v.level_ce.size(); ++lvl)
                std::cout << "level " << lvl + 1 << " cross-entropy: " << v.level_ce[lvl] << "\n";
            for (std::size_t lvl = 0; lvl < v.level_hinge.size(); ++lvl)
                std::cout << "level " << lvl + 1 << "->" << lvl + 2 << " hinge: " << v.level_hinge[lvl]
                          << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace hiercloud::cli
