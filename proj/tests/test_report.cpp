#include <doctest.h>

#include "hiercloud/ensemble.hpp"
#include "hiercloud/report.hpp"
#include "hiercloud/synth.hpp"
#include "oracles.hpp"

using namespace hiercloud;

namespace {

LabelHierarchy campus3d() {
    return LabelHierarchy::parse_file(std::string(HIERCLOUD_DATA_DIR) + "/campus3d.hier");
}

MetricReport sample_report() {
    const auto h = campus3d();
    SynthSpec spec;
    spec.points = 400;
    spec.label_noise = 0.0;
    spec.inconsistency = 0.4;
    spec.sharpness = 6.0;
    spec.seed = 9;
    const auto gt = gen_ground_truth(h, spec);
    const auto d = gen_predictions(h, spec, gt.labels);
    const std::vector<double> alphas{0.0, 0.5, 1.0};
    return evaluate(h, gt.labels, mc_decision(h, d), alphas);
}

}  // namespace

TEST_CASE("evaluate on identical labels is perfect") {
    const auto h = campus3d();
    SynthSpec spec;
    spec.points = 250;
    spec.seed = 4;
    const auto gt = gen_ground_truth(h, spec);
    const std::vector<double> alphas{1.0};
    const auto report = evaluate(h, gt.labels, gt.labels, alphas);
    REQUIRE(report.levels.size() == 5);
    for (const auto& level : report.levels) {
        CHECK(level.oa == 1.0);
        REQUIRE(level.miou.has_value());
        CHECK(*level.miou == 1.0);
    }
    REQUIRE(report.cr.size() == 1);
    CHECK(report.cr[0] == 1.0);
}

TEST_CASE("evaluate is thread-count independent") {
    const auto h = campus3d();
    SynthSpec spec;
    spec.points = 321;
    spec.inconsistency = 0.5;
    spec.seed = 15;
    const auto gt = gen_ground_truth(h, spec);
    const auto pred = mc_decision(h, gen_predictions(h, spec, gt.labels));
    const std::vector<double> alphas{0.2, 1.0};
    const auto one = evaluate(h, gt.labels, pred, alphas, 1);
    const auto four = evaluate(h, gt.labels, pred, alphas, 4);
    const auto nine = evaluate(h, gt.labels, pred, alphas, 9);
    CHECK(one == four);
    CHECK(one == nine);
    CHECK(report_to_text(one) == report_to_text(nine));
}

TEST_CASE("machine-readable report round trips losslessly") {
    auto report = sample_report();
    report.wcov_level = 4;
    report.wcov.assign(9, std::nullopt);
    report.wcov[5] = 0.5341234567890123;
    const auto text = report_to_text(report);
    const auto back = report_from_text(text);
    CHECK(back == report);
    CHECK(report_to_text(back) == text);
}

TEST_CASE("report table mirrors the per-level class layout") {
    const auto h = campus3d();
    const auto report = sample_report();
    const auto table = report_table(h, {{"MC", report}, {"HE", report}});
    // Header with both method columns.
    CHECK(table.find("MC") != std::string::npos);
    CHECK(table.find("HE") != std::string::npos);
    // Class rows grouped by level, OA/mIoU summary rows, CR footer.
    CHECK(table.find("C1") != std::string::npos);
    CHECK(table.find("C5") != std::string::npos);
    CHECK(table.find("construction") != std::string::npos);
    CHECK(table.find("roof") != std::string::npos);
    CHECK(table.find("(OA)") != std::string::npos);
    CHECK(table.find("(mIoU)") != std::string::npos);
    CHECK(table.find("CR(1)") != std::string::npos);
    // The ignore class never shows up.
    CHECK(table.find("unclassified") == std::string::npos);
}

TEST_CASE("report values are percentages with one decimal in the table") {
    const auto h = LabelHierarchy::parse("levels 1\nlevel 1: a,b\n");
    MetricReport report;
    report.levels.resize(1);
    report.levels[0].oa = 2.0 / 3.0;
    report.levels[0].class_iou = {0.123456, std::nullopt};
    report.levels[0].miou = 0.123456;
    report.alphas = {1.0};
    report.cr = {1.0};
    const auto table = report_table(h, {{"M", report}});
    CHECK(table.find("66.7") != std::string::npos);
    CHECK(table.find("12.3") != std::string::npos);
    CHECK(table.find("100.0") != std::string::npos);
    CHECK(table.find('-') != std::string::npos);  // undefined IoU prints as '-'
}
