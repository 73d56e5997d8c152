#include "courtaudit/evaluation.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "courtaudit/rng.hpp"

using namespace courtaudit;

namespace {

CasePrediction make_case(int idx, const std::string& judge, double prob, int label) {
    return {"c" + std::to_string(idx), judge, prob, label};
}

// n_right cases where the thresholded prediction hits the label and
// n_wrong where it misses, split as evenly as possible between classes
std::vector<CasePrediction> judge_block(const std::string& judge, int n_wins,
                                        int n_losses, int wins_right,
                                        int losses_right, int* counter) {
    std::vector<CasePrediction> out;
    for (int i = 0; i < n_wins; ++i)
        out.push_back(make_case((*counter)++, judge, i < wins_right ? 0.7 : 0.3, 1));
    for (int i = 0; i < n_losses; ++i)
        out.push_back(make_case((*counter)++, judge, i < losses_right ? 0.3 : 0.7, 0));
    return out;
}

void append(std::vector<CasePrediction>& all, std::vector<CasePrediction> more) {
    for (auto& c : more) all.push_back(std::move(c));
}

}  // namespace

TEST_CASE("quintile bins score a perfect classifier at 1.0 and skip empty bins") {
    std::vector<CasePrediction> cases = {
        make_case(0, "j1", 0.1, 0),
        make_case(1, "j1", 0.3, 0),
        make_case(2, "j2", 0.7, 1),
        make_case(3, "j2", 0.9, 1),
    };
    const PredictionEval eval = bin_accuracy(cases, 50, 7);
    CHECK(eval.overall_accuracy == 1.0);
    CHECK(eval.bins[0].count == 1);
    CHECK(eval.bins[1].count == 1);
    CHECK(eval.bins[2].count == 0);
    CHECK(eval.bins[3].count == 1);
    CHECK(eval.bins[4].count == 1);
    for (const std::size_t b : {0ul, 1ul, 3ul, 4ul}) {
        REQUIRE(eval.bins[b].accuracy.has_value());
        CHECK(*eval.bins[b].accuracy == 1.0);
        REQUIRE(eval.bins[b].bootstrap_mean.has_value());
        CHECK(*eval.bins[b].bootstrap_mean == 1.0);  // every resample is perfect
        CHECK(*eval.bins[b].bootstrap_std == 0.0);
    }
    CHECK_FALSE(eval.bins[2].accuracy.has_value());
    CHECK_FALSE(eval.bins[2].bootstrap_mean.has_value());
    CHECK_FALSE(eval.bins[2].bootstrap_std.has_value());
}

TEST_CASE("bin edges are inclusive below and every case lands in exactly one bin") {
    std::vector<CasePrediction> cases;
    const std::vector<double> edge_probs = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int counter = 0;
    for (const double p : edge_probs) cases.push_back(make_case(counter++, "j", p, 1));
    const PredictionEval eval = bin_accuracy(cases, 0, 0);
    // 0.0 -> bin0, 0.2 -> bin1, 0.4 -> bin2, 0.6 -> bin3, 0.8 and 1.0 -> bin4
    CHECK(eval.bins[0].count == 1);
    CHECK(eval.bins[1].count == 1);
    CHECK(eval.bins[2].count == 1);
    CHECK(eval.bins[3].count == 1);
    CHECK(eval.bins[4].count == 2);

    Rng rng(11);
    std::vector<CasePrediction> uniform;
    for (int i = 0; i < 1000; ++i)
        uniform.push_back(make_case(i, "j", rng.uniform(), rng.bernoulli(0.5) ? 1 : 0));
    const PredictionEval many = bin_accuracy(uniform, 0, 0);
    int total = 0;
    for (const auto& b : many.bins) total += b.count;
    CHECK(total == 1000);
}

TEST_CASE("near-coin-flip probabilities on balanced labels score exactly 0.5") {
    std::vector<CasePrediction> cases;
    for (int i = 0; i < 40; ++i)
        cases.push_back(make_case(i, "j", 0.49, i % 2));  // all predicted as losses
    const PredictionEval eval = bin_accuracy(cases, 0, 0);
    CHECK(eval.overall_accuracy == 0.5);
    REQUIRE(eval.bins[2].accuracy.has_value());
    CHECK(*eval.bins[2].accuracy == 0.5);
}

TEST_CASE("calibrated synthetic probabilities give the U-shaped accuracy profile") {
    Rng rng(314);
    std::vector<CasePrediction> cases;
    for (int i = 0; i < 20000; ++i) {
        const double p = rng.uniform();
        cases.push_back(make_case(i, "j" + std::to_string(i % 7), p,
                                  rng.bernoulli(p) ? 1 : 0));
    }
    const PredictionEval eval = bin_accuracy(cases, 100, 5);
    for (const auto& b : eval.bins) REQUIRE(b.accuracy.has_value());
    // expected per-bin accuracy: 0.9, 0.7, ~0.55, 0.7, 0.9
    CHECK(*eval.bins[0].accuracy > *eval.bins[1].accuracy);
    CHECK(*eval.bins[1].accuracy > *eval.bins[2].accuracy);
    CHECK(*eval.bins[4].accuracy > *eval.bins[3].accuracy);
    CHECK(*eval.bins[3].accuracy > *eval.bins[2].accuracy);
    CHECK(*eval.bins[0].accuracy > 0.85);
    CHECK(*eval.bins[4].accuracy > 0.85);
    CHECK(*eval.bins[2].accuracy < 0.62);
    for (const auto& b : eval.bins) {
        REQUIRE(b.bootstrap_mean.has_value());
        REQUIRE(b.bootstrap_std.has_value());
        CHECK(std::abs(*b.bootstrap_mean - *b.accuracy) < 0.02);
        CHECK(*b.bootstrap_std > 0.0);
        CHECK(*b.bootstrap_std < 0.05);
    }
}

TEST_CASE("bootstrap summaries are seed-deterministic") {
    Rng rng(99);
    std::vector<CasePrediction> cases;
    for (int i = 0; i < 500; ++i) {
        const double p = rng.uniform();
        cases.push_back(make_case(i, "j", p, rng.bernoulli(p) ? 1 : 0));
    }
    const PredictionEval a = bin_accuracy(cases, 100, 21);
    const PredictionEval b = bin_accuracy(cases, 100, 21);
    const PredictionEval c = bin_accuracy(cases, 100, 22);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json() != c.to_json());
    CHECK(a.overall_accuracy == c.overall_accuracy);  // only the bootstrap moves
}

TEST_CASE("prediction eval reports serialize with blanks for empty bins") {
    std::vector<CasePrediction> cases = {make_case(0, "j", 0.1, 0),
                                         make_case(1, "j", 0.9, 1)};
    const PredictionEval eval = bin_accuracy(cases, 10, 0);
    const std::string csv = eval.bins_to_csv();
    CHECK(csv.substr(0, csv.find('\n')) ==
          "lo,hi,count,accuracy,bootstrap_mean,bootstrap_std");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(csv.find("0.4,0.6,0,,,") != std::string::npos);  // empty middle bin

    const nlohmann::json j = nlohmann::json::parse(eval.to_json());
    CHECK(j.at("overall_accuracy").get<double>() == 1.0);
    CHECK(j.at("n_cases").get<int>() == 2);
    CHECK(j.at("bins").size() == 5);
    CHECK_FALSE(j.at("bins")[2].contains("accuracy"));
    CHECK(j.at("bins")[0].at("accuracy").get<double>() == 1.0);
}

TEST_CASE("bin accuracy rejects malformed predictions") {
    CHECK_THROWS_AS(bin_accuracy({}, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(bin_accuracy({make_case(0, "j", 1.5, 1)}, 10, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(bin_accuracy({make_case(0, "j", -0.1, 1)}, 10, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(bin_accuracy({make_case(0, "j", 0.5, 2)}, 10, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(bin_accuracy({make_case(0, "j", 0.5, 1)}, -1, 0),
                    std::invalid_argument);
}

TEST_CASE("judge significance on a fixed balanced court matches the exact binomial") {
    // three judges, each 25 wins + 25 losses of confident cases, with
    // 40 / 25 / 12 correct predictions out of 50
    std::vector<CasePrediction> cases;
    int counter = 0;
    append(cases, judge_block("judge_a", 25, 25, 20, 20, &counter));
    append(cases, judge_block("judge_b", 25, 25, 13, 12, &counter));
    append(cases, judge_block("judge_c", 25, 25, 6, 6, &counter));

    const JudgeSignificance sig = judge_significance(cases, 50, 0.025, 0.10, 30, 123);
    CHECK(sig.n_qualified == 3);
    REQUIRE(sig.repetitions.size() == 30);

    for (const auto& rep : sig.repetitions) {
        REQUIRE(rep.per_judge.size() == 3);
        const auto& a = rep.per_judge[0];
        const auto& b = rep.per_judge[1];
        const auto& c = rep.per_judge[2];
        CHECK(a.judge_id == "judge_a");
        CHECK(b.judge_id == "judge_b");
        CHECK(c.judge_id == "judge_c");
        // already balanced, so every repetition keeps all 50 cases
        CHECK(a.n_balanced == 50);
        CHECK(a.n_correct == 40);
        CHECK(b.n_correct == 25);
        CHECK(c.n_correct == 12);
        CHECK(a.accuracy == 0.8);
        CHECK(a.ci_low == doctest::Approx(18.0 / 50.0).epsilon(1e-15));
        CHECK(a.ci_high == doctest::Approx(32.0 / 50.0).epsilon(1e-15));
        CHECK(a.p_raw == doctest::Approx(2.3861331676755526e-05).epsilon(1e-12));
        CHECK(b.p_raw == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.p_raw == doctest::Approx(0.00030586400160359517).epsilon(1e-12));
        CHECK(a.p_bh == doctest::Approx(7.158399503026658e-05).epsilon(1e-12));
        CHECK(b.p_bh == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.p_bh == doctest::Approx(0.00045879600240539276).epsilon(1e-12));
        CHECK(a.flag == PredictabilityFlag::over);
        CHECK(b.flag == PredictabilityFlag::within);
        CHECK(c.flag == PredictabilityFlag::under);
        CHECK(rep.n_over == 1);
        CHECK(rep.n_under == 1);
        CHECK(rep.n_bh_flagged == 2);  // BH at 0.10 rejects judges a and c
        CHECK(rep.fraction_flagged_raw == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(rep.fraction_flagged_bh == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }
    CHECK(sig.mean_fraction_raw == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(sig.std_fraction_raw == 0.0);  // identical repetitions
    CHECK(sig.mean_fraction_bh == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(sig.std_fraction_bh == 0.0);
}

TEST_CASE("flags are monotone in the number of correct predictions at n = 50") {
    // thresholds from the exact Binomial(50, 0.5) central 90% bounds:
    // under iff n_correct <= 18, over iff n_correct >= 32
    std::vector<CasePrediction> cases;
    int counter = 0;
    append(cases, judge_block("j18", 25, 25, 9, 9, &counter));
    append(cases, judge_block("j19", 25, 25, 10, 9, &counter));
    append(cases, judge_block("j31", 25, 25, 16, 15, &counter));
    append(cases, judge_block("j32", 25, 25, 16, 16, &counter));
    const JudgeSignificance sig = judge_significance(cases, 50, 0.025, 0.10, 1, 0);
    const auto& judges = sig.repetitions[0].per_judge;
    REQUIRE(judges.size() == 4);
    CHECK(judges[0].flag == PredictabilityFlag::under);   // 18 correct
    CHECK(judges[1].flag == PredictabilityFlag::within);  // 19 correct
    CHECK(judges[2].flag == PredictabilityFlag::within);  // 31 correct
    CHECK(judges[3].flag == PredictabilityFlag::over);    // 32 correct
    for (const auto& j : judges) {
        CHECK(j.ci_low == doctest::Approx(0.36).epsilon(1e-15));
        CHECK(j.ci_high == doctest::Approx(0.64).epsilon(1e-15));
    }
}

TEST_CASE("kappa filtering drops near-coin-flip cases before balancing") {
    // 25+25 confident cases at probability 0.525 / 0.475 survive kappa = 0.025
    // and are all predicted correctly; padding cases at 0.51 / 0.49 carry the
    // opposite labels, so leaking them through the filter would change both
    // n_balanced and n_correct
    std::vector<CasePrediction> cases;
    int counter = 0;
    for (int i = 0; i < 25; ++i) {
        cases.push_back(make_case(counter++, "j", 0.525, 1));
        cases.push_back(make_case(counter++, "j", 0.475, 0));
    }
    for (int i = 0; i < 40; ++i)
        cases.push_back(make_case(counter++, "j", i % 2 ? 0.51 : 0.49, i % 2 ? 0 : 1));

    const JudgeSignificance sig = judge_significance(cases, 50, 0.025, 0.10, 1, 0);
    CHECK(sig.n_qualified == 1);
    CHECK(sig.repetitions[0].per_judge[0].n_balanced == 50);
    CHECK(sig.repetitions[0].per_judge[0].n_correct == 50);
    CHECK(sig.repetitions[0].per_judge[0].flag == PredictabilityFlag::over);

    // with a wider kappa nothing survives
    CHECK_THROWS_AS(judge_significance(cases, 50, 0.20, 0.10, 1, 0),
                    std::runtime_error);
}

TEST_CASE("judges without enough balanced confident cases are excluded") {
    std::vector<CasePrediction> cases;
    int counter = 0;
    // 40 wins vs 20 losses: balancing keeps only 40 < 50
    append(cases, judge_block("unbalanced", 40, 20, 20, 10, &counter));
    // 30 confident cases in total
    append(cases, judge_block("thin", 15, 15, 8, 8, &counter));
    // exactly at the threshold: 25+25
    append(cases, judge_block("qualified", 25, 25, 15, 15, &counter));

    const JudgeSignificance sig = judge_significance(cases, 50, 0.025, 0.10, 2, 9);
    CHECK(sig.n_qualified == 1);
    CHECK(sig.repetitions[0].per_judge[0].judge_id == "qualified");

    std::vector<CasePrediction> only_thin;
    counter = 0;
    append(only_thin, judge_block("thin", 15, 15, 8, 8, &counter));
    CHECK_THROWS_WITH_AS(judge_significance(only_thin, 50, 0.025, 0.10, 1, 0),
                         doctest::Contains("no judge"), std::runtime_error);
}

TEST_CASE("per-repetition down-sampling varies while staying deterministic") {
    // 35 wins (20 predicted correctly) vs 25 losses (all correct): the sampled
    // win subset changes across repetitions, so n_correct moves within [35, 45]
    std::vector<CasePrediction> cases;
    int counter = 0;
    append(cases, judge_block("j", 35, 25, 20, 25, &counter));

    const JudgeSignificance sig = judge_significance(cases, 50, 0.025, 0.10, 30, 77);
    std::set<int> observed;
    for (const auto& rep : sig.repetitions) {
        const auto& record = rep.per_judge[0];
        CHECK(record.n_balanced == 50);
        CHECK(record.n_correct >= 35);
        CHECK(record.n_correct <= 45);
        observed.insert(record.n_correct);
    }
    CHECK(observed.size() > 1);  // the balancing really is re-drawn per repetition

    const JudgeSignificance again = judge_significance(cases, 50, 0.025, 0.10, 30, 77);
    CHECK(sig.to_csv() == again.to_csv());
    CHECK(sig.to_json() == again.to_json());
    const JudgeSignificance other = judge_significance(cases, 50, 0.025, 0.10, 30, 78);
    CHECK(sig.to_csv() != other.to_csv());
}

TEST_CASE("null courts flag about a tenth of judges raw and almost none after BH") {
    // coin-flip correctness at n = 60: the exact central bounds (23, 37) flag a
    // judge with probability 0.0924609810729237
    const int n_courts = 300;
    const int judges_per_court = 12;
    double raw_total = 0.0;
    double bh_total = 0.0;
    for (int court = 0; court < n_courts; ++court) {
        Rng rng(9000 + static_cast<std::uint64_t>(court));
        std::vector<CasePrediction> cases;
        int counter = 0;
        for (int j = 0; j < judges_per_court; ++j) {
            const std::string judge = "j" + std::to_string(j);
            for (int k = 0; k < 60; ++k) {
                const int label = k % 2;
                const bool right = rng.bernoulli(0.5);
                const double prob = (label == 1) == right ? 0.7 : 0.3;
                cases.push_back(make_case(counter++, judge, prob, label));
            }
        }
        const JudgeSignificance sig =
            judge_significance(cases, 50, 0.025, 0.10, 1, 500 + court);
        raw_total += sig.mean_fraction_raw;
        bh_total += sig.mean_fraction_bh;
    }
    const double raw_rate = raw_total / n_courts;
    const double bh_rate = bh_total / n_courts;
    CHECK(raw_rate > 0.0724);  // 0.0925 +/- 0.02
    CHECK(raw_rate < 0.1125);
    CHECK(bh_rate < 0.02);
    CHECK(bh_rate < raw_rate / 2.0);
}

TEST_CASE("BH-flagged judges are always a subset of the raw-flagged set") {
    Rng rng(4242);
    std::vector<CasePrediction> cases;
    int counter = 0;
    for (int j = 0; j < 15; ++j) {
        const std::string judge = "j" + std::to_string(j);
        const double hit_rate = j < 5 ? 0.65 : 0.5;  // a third of judges biased
        for (int k = 0; k < 70; ++k) {
            const int label = k % 2;
            const bool right = rng.bernoulli(hit_rate);
            cases.push_back(
                make_case(counter++, judge, (label == 1) == right ? 0.7 : 0.3, label));
        }
    }
    const JudgeSignificance sig = judge_significance(cases, 50, 0.025, 0.10, 10, 1);
    for (const auto& rep : sig.repetitions) {
        CHECK(rep.n_bh_flagged <= rep.n_over + rep.n_under);
        for (const auto& j : rep.per_judge) {
            CHECK(j.p_bh >= j.p_raw - 1e-15);
            if (j.p_bh <= 0.10) CHECK(j.flag != PredictabilityFlag::within);
        }
    }
}

TEST_CASE("judge significance serializes one CSV row per repetition and judge") {
    std::vector<CasePrediction> cases;
    int counter = 0;
    append(cases, judge_block("a", 25, 25, 20, 20, &counter));
    append(cases, judge_block("b", 25, 25, 13, 12, &counter));
    const JudgeSignificance sig = judge_significance(cases, 50, 0.025, 0.10, 3, 0);
    const std::string csv = sig.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 2);
    CHECK(csv.find("repetition,judge_id,n_balanced,n_correct,accuracy,ci_low,"
                   "ci_high,p_raw,p_bh,flag") == 0);
    CHECK(csv.find(",over") != std::string::npos);
    CHECK(csv.find(",within") != std::string::npos);

    const nlohmann::json j = nlohmann::json::parse(sig.to_json());
    CHECK(j.at("n_qualified").get<int>() == 2);
    CHECK(j.at("repetitions").size() == 3);
    CHECK(j.at("kappa").get<double>() == 0.025);
}

TEST_CASE("judge significance rejects malformed parameters") {
    std::vector<CasePrediction> cases;
    int counter = 0;
    append(cases, judge_block("a", 25, 25, 20, 20, &counter));
    CHECK_THROWS_AS(judge_significance({}, 50, 0.025, 0.10, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(judge_significance(cases, 1, 0.025, 0.10, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(judge_significance(cases, 50, 0.5, 0.10, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(judge_significance(cases, 50, -0.01, 0.10, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(judge_significance(cases, 50, 0.025, 0.0, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(judge_significance(cases, 50, 0.025, 1.0, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(judge_significance(cases, 50, 0.025, 0.10, 0, 0),
                    std::invalid_argument);
}
