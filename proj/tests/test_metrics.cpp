#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fstnet/metrics.hpp"
#include "metrics_oracle.hpp"
#include "test_util.hpp"

using namespace fstnet;

namespace {

std::vector<ScoreRecord> separated_scores() {
    return {{"l1", Label::Live, 0.05}, {"l2", Label::Live, 0.1},
            {"s1", Label::Spoof, 0.9}, {"s2", Label::Spoof, 0.95}};
}

}  // namespace

TEST_CASE("apcer_bpcer on separated scores is (0,0)") {
    const auto [a, b] = apcer_bpcer(separated_scores(), 0.5);
    CHECK(a == 0.0);
    CHECK(b == 0.0);
}

TEST_CASE("all-zero scores decide everything live") {
    std::vector<ScoreRecord> scores = {{"l", Label::Live, 0.0}, {"s", Label::Spoof, 0.0}};
    const auto [a, b] = apcer_bpcer(scores, 0.5);
    CHECK(a == 1.0);
    CHECK(b == 0.0);
}

TEST_CASE("apcer_bpcer matches the counting oracle exactly on random sets") {
    Rng rng(500);
    for (int trial = 0; trial < 20; ++trial) {
        const auto records = oracle::random_records(rng, 200);
        const double th = rng.uniform();
        const auto [a, b] = apcer_bpcer(records, th);
        CHECK(a == oracle::apcer_at(records, th));
        CHECK(b == oracle::bpcer_at(records, th));
    }
}

TEST_CASE("apcer_bpcer rejects single-class input") {
    std::vector<ScoreRecord> only_live = {{"l", Label::Live, 0.2}};
    CHECK_THROWS_AS(apcer_bpcer(only_live, 0.5), std::invalid_argument);
}

TEST_CASE("acer is the exact midpoint of the error rates") {
    CHECK(acer(0.023, 0.010) == doctest::Approx(0.0165).epsilon(1e-12));
    CHECK(acer(0.049, 0.033) == doctest::Approx(0.041).epsilon(1e-12));
    CHECK(acer(0.0, 0.0) == 0.0);
    // bit-exact midpoint arithmetic
    CHECK(acer(0.023, 0.010) == (0.023 + 0.010) / 2.0);
}

TEST_CASE("hter examples and oracle equality") {
    CHECK(hter(0.0, 0.0) == 0.0);
    CHECK(hter(1.0, 0.0) == 0.5);
    Rng rng(501);
    for (int trial = 0; trial < 10; ++trial) {
        const auto records = oracle::random_records(rng, 100);
        const double th = rng.uniform();
        const double frr = oracle::bpcer_at(records, th);
        const double far = oracle::apcer_at(records, th);
        CHECK(hter(frr, far) == oracle::hter_of(frr, far));
    }
}

TEST_CASE("tpr_at_fpr on separated scores reaches 1 at every target") {
    const auto tprs = tpr_at_fpr(separated_scores(), {1e-2, 1e-3});
    CHECK(tprs[0] == 1.0);
    CHECK(tprs[1] == 1.0);
}

TEST_CASE("tpr_at_fpr with identical scores for both classes stays under the target") {
    std::vector<ScoreRecord> scores = {{"l1", Label::Live, 0.5},
                                       {"l2", Label::Live, 0.5},
                                       {"s1", Label::Spoof, 0.5},
                                       {"s2", Label::Spoof, 0.5}};
    for (double target : {0.01, 0.1, 0.5}) {
        const auto tprs = tpr_at_fpr(scores, {target});
        CHECK(tprs[0] <= target);
        CHECK(tprs[0] == 0.0);  // no operating point satisfies the constraint
    }
}

TEST_CASE("tpr_at_fpr matches the exhaustive sweep oracle exactly") {
    Rng rng(502);
    for (int trial = 0; trial < 10; ++trial) {
        const auto records = oracle::random_records(rng, 200);
        const std::vector<double> targets = {1e-3, 1e-2, 0.1, 0.3};
        const auto tprs = tpr_at_fpr(records, targets);
        for (std::size_t i = 0; i < targets.size(); ++i)
            CHECK(tprs[i] == oracle::tpr_at_fpr_target(records, targets[i]));
        // non-decreasing in the target
        for (std::size_t i = 1; i < targets.size(); ++i) CHECK(tprs[i] >= tprs[i - 1]);
    }
}

TEST_CASE("eer on separated scores is zero") {
    const auto [th, eer] = eer_threshold(separated_scores());
    CHECK(eer == 0.0);
    CHECK(th > 0.1);
    CHECK(th <= 0.9);
}

TEST_CASE("eer on the symmetric overlapping quartet is 0.5") {
    std::vector<ScoreRecord> scores = {{"l1", Label::Live, 0.4},
                                       {"l2", Label::Live, 0.6},
                                       {"s1", Label::Spoof, 0.4},
                                       {"s2", Label::Spoof, 0.6}};
    const auto [th, eer] = eer_threshold(scores);
    CHECK(eer == 0.5);
}

TEST_CASE("eer is invariant to record order and matches the oracle") {
    Rng rng(503);
    for (int trial = 0; trial < 10; ++trial) {
        auto records = oracle::random_records(rng, 150);
        const auto [th, eer] = eer_threshold(records);
        const auto [oth, oeer] = oracle::eer_of(records);
        CHECK(th == oth);
        CHECK(eer == oeer);

        rng.shuffle(records);
        const auto [th2, eer2] = eer_threshold(records);
        CHECK(th2 == th);
        CHECK(eer2 == eer);
    }
}

TEST_CASE("apcer rises and bpcer falls as the threshold rises") {
    Rng rng(504);
    for (int trial = 0; trial < 10; ++trial) {
        const auto records = oracle::random_records(rng, 120);
        double prev_a = -1.0, prev_b = 2.0;
        for (double th = 0.0; th <= 1.0001; th += 0.05) {
            const auto [a, b] = apcer_bpcer(records, th);
            CHECK(a >= prev_a);
            CHECK(b <= prev_b);
            prev_a = a;
            prev_b = b;
        }
    }
}

TEST_CASE("compute_report keeps the exact midpoint identity") {
    Rng rng(505);
    const auto records = oracle::random_records(rng, 80);
    const MetricsReport rep = compute_report(records, 0.5);
    CHECK(rep.acer == (rep.apcer + rep.bpcer) / 2.0);
    CHECK(rep.hter == (rep.bpcer + rep.apcer) / 2.0);
    CHECK(rep.threshold == 0.5);
    REQUIRE(rep.tpr_at_fpr.size() == 2);
    CHECK(rep.tpr_at_fpr[0].first == 1e-2);
    CHECK(rep.tpr_at_fpr[1].first == 1e-3);
}

TEST_CASE("scores CSV round trip") {
    testutil::TempDir tmp("scores");
    Rng rng(506);
    const auto records = oracle::random_records(rng, 50);
    const auto path = tmp.path() / "scores.csv";
    save_scores_csv(path, records);
    const auto back = load_scores_csv(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].id == records[i].id);
        CHECK(back[i].label == records[i].label);
        CHECK(back[i].score == records[i].score);
    }
}

TEST_CASE("scores CSV loader rejects malformed input") {
    testutil::TempDir tmp("scoresbad");
    const auto path = tmp.path() / "bad.csv";
    std::ofstream(path) << "id,label,score\nx,alien,0.5\n";
    CHECK_THROWS_AS(load_scores_csv(path), DataError);
    std::ofstream(path, std::ios::trunc) << "wrong,header\n";
    CHECK_THROWS_AS(load_scores_csv(path), DataError);
    std::ofstream(path, std::ios::trunc) << "id,label,score\nx,live,1.7\n";
    CHECK_THROWS_AS(load_scores_csv(path), DataError);
}

TEST_CASE("report serializes as a key=value block") {
    MetricsReport rep;
    rep.apcer = 0.023;
    rep.bpcer = 0.010;
    rep.acer = acer(rep.apcer, rep.bpcer);
    rep.hter = hter(rep.bpcer, rep.apcer);
    rep.threshold = 0.5;
    rep.tpr_at_fpr = {{1e-2, 0.958}};
    std::ostringstream os;
    write_report(os, rep);
    const std::string text = os.str();
    CHECK(text.find("acer=0.0165") != std::string::npos);
    CHECK(text.find("apcer=0.023") != std::string::npos);
    CHECK(text.find("tpr@fpr=0.01") != std::string::npos);
}

TEST_CASE("roc CSV sweeps the distinct thresholds") {
    testutil::TempDir tmp("roc");
    const auto path = tmp.path() / "roc.csv";
    save_roc_csv(path, separated_scores());
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "threshold,fpr,tpr");
    int rows = 0;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);  // four distinct scores
}
