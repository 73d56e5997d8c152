#include <doctest.h>

#include <numeric>

#include "courtaudit/deviation_audit.hpp"
#include "test_helpers.hpp"

using namespace courtaudit;
using courtaudit::testing::CourtSpec;
using courtaudit::testing::make_court;
using courtaudit::testing::padded_id;

namespace {

// One judge with an exact (n, k) record plus a large neutral bench so the
// pooled rate stays wherever we put it.
Dataset court_with_record(std::size_t n, std::size_t k) {
    Dataset data;
    JudgeProfile judge;
    judge.judge_id = "j-exact";
    judge.appointment_date = Date::from_ymd(1970, 1, 1);
    data.judges.push_back(judge);
    for (std::size_t i = 0; i < n; ++i) {
        CaseRecord c;
        c.case_id = padded_id("c-", i);
        c.judge_id = "j-exact";
        c.decision_date = Date::from_ymd(1985, 1, 1).plus_days(static_cast<std::int64_t>(i));
        c.circuit = Circuit::third;
        c.case_type = CaseType::torts;
        c.outcome = i < k ? 1 : 0;
        data.cases.push_back(c);
    }
    data.build_index();
    return data;
}

}  // namespace

TEST_CASE("strong deviations are flagged in both directions") {
    {
        const auto audit = judge_deviation_test(court_with_record(158, 107), 0.25, 0.10);
        REQUIRE(audit.entries.size() == 1);
        const auto& e = audit.entries[0];
        CHECK(e.win_rate == doctest::Approx(107.0 / 158.0).epsilon(1e-12));
        CHECK(e.p_raw == doctest::Approx(1.8632903566418977e-29).epsilon(1e-9));
        CHECK(e.flag == DeviationFlag::above);
    }
    {
        const auto audit = judge_deviation_test(court_with_record(330, 20), 0.25, 0.10);
        const auto& e = audit.entries[0];
        CHECK(e.win_rate == doctest::Approx(20.0 / 330.0).epsilon(1e-12));
        CHECK(e.p_raw == doctest::Approx(2.0855024439087455e-19).epsilon(1e-9));
        CHECK(e.flag == DeviationFlag::below);
    }
}

TEST_CASE("a record at the mode is untouchable") {
    const auto audit = judge_deviation_test(court_with_record(4, 1), 0.25, 0.10);
    const auto& e = audit.entries[0];
    CHECK(e.p_raw == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.flag == DeviationFlag::within);
}

TEST_CASE("default null rate is the pooled win rate") {
    CourtSpec spec;
    spec.n_judges = 20;
    spec.cases_per_judge = 30;
    spec.win_p = 0.31;
    const Dataset data = make_court(spec, 9);
    const auto audit = judge_deviation_test(data);
    CHECK(audit.p0 == doctest::Approx(data.pooled_win_rate()).epsilon(1e-12));
    // pooled rate equals the case-weighted mean of judge win rates
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& e : audit.entries) {
        weighted += e.win_rate * static_cast<double>(e.n);
        total += e.n;
    }
    CHECK(weighted / static_cast<double>(total) ==
          doctest::Approx(data.pooled_win_rate()).epsilon(1e-12));
    // and the override wins when supplied
    CHECK(judge_deviation_test(data, 0.25).p0 == doctest::Approx(0.25));
}

TEST_CASE("entries ignore case ordering") {
    CourtSpec spec;
    spec.n_judges = 10;
    spec.cases_per_judge = 25;
    Dataset data = make_court(spec, 17);
    const auto before = judge_deviation_test(data, 0.25);
    Rng rng(55);
    rng.shuffle(data.cases);
    data.build_index();
    const auto after = judge_deviation_test(data, 0.25);
    REQUIRE(before.entries.size() == after.entries.size());
    for (std::size_t i = 0; i < before.entries.size(); ++i) {
        CHECK(before.entries[i].judge_id == after.entries[i].judge_id);
        CHECK(before.entries[i].k == after.entries[i].k);
        CHECK(before.entries[i].p_raw == after.entries[i].p_raw);
    }
}

TEST_CASE("summary histogram accounts for every judge") {
    CourtSpec spec;
    spec.n_judges = 40;
    spec.cases_per_judge = 35;
    const auto audit = judge_deviation_test(make_court(spec, 23), 0.25);
    const auto s = deviation_summary(audit, 30);
    CHECK(s.n_judges == 40);
    CHECK(s.bin_edges.size() == 31);
    CHECK(std::accumulate(s.observed_counts.begin(), s.observed_counts.end(), std::size_t{0}) ==
          40);
    // the exact overlay spreads one unit of mass per judge
    CHECK(std::accumulate(s.null_expected_counts.begin(), s.null_expected_counts.end(), 0.0) ==
          doctest::Approx(40.0).epsilon(1e-9));
    CHECK(s.fraction_significant ==
          doctest::Approx(static_cast<double>(s.n_below + s.n_above) / 40.0).epsilon(1e-12));
    CHECK(s.fraction_significant_bh <= s.fraction_significant + 1e-12);
}

TEST_CASE("uniformly losing judges all deviate") {
    CourtSpec spec;
    spec.n_judges = 12;
    spec.cases_per_judge = 50;
    spec.win_p = 0.0;
    const auto audit = judge_deviation_test(make_court(spec, 31), 0.25, 0.10);
    const auto s = deviation_summary(audit);
    CHECK(s.fraction_significant == doctest::Approx(1.0));
    CHECK(s.n_below == 12);
    CHECK(s.n_above == 0);
}

TEST_CASE("an impartial court stays near the nominal level") {
    // outcomes truly Bernoulli(p0): the significant fraction must not exceed
    // alpha by more than Monte Carlo noise (conservative tests undershoot)
    double total_fraction = 0.0;
    const std::size_t n_courts = 5;
    for (std::uint64_t seed = 0; seed < n_courts; ++seed) {
        CourtSpec spec;
        spec.n_judges = 100;
        spec.cases_per_judge = 45;
        spec.win_p = 0.25;
        const auto audit = judge_deviation_test(make_court(spec, 900 + seed), 0.25, 0.10);
        total_fraction += deviation_summary(audit).fraction_significant;
    }
    const double mean_fraction = total_fraction / static_cast<double>(n_courts);
    // MC standard error over 500 independent judges is about 0.013
    CHECK(mean_fraction <= 0.10 + 3.0 * 0.013);
}

TEST_CASE("serialized outputs are stable") {
    const auto audit = judge_deviation_test(court_with_record(60, 25), 0.25);
    const std::string csv = audit.to_csv();
    CHECK(csv.rfind("judge_id,n,k,win_rate,p_raw,flag", 0) == 0);
    CHECK(csv == audit.to_csv());
    const auto s = deviation_summary(audit, 10);
    CHECK(s.histogram_to_csv().rfind("bin_lo,bin_hi,observed,null_expected", 0) == 0);
    CHECK(s.to_json() == s.to_json());
    CHECK(s.to_json().find("fraction_significant_bh") != std::string::npos);
}

TEST_CASE("argument validation") {
    const Dataset data = court_with_record(10, 5);
    CHECK_THROWS_AS(judge_deviation_test(data, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(judge_deviation_test(data, 1.0), std::invalid_argument);
    const auto audit = judge_deviation_test(data, 0.25);
    CHECK_THROWS_AS(deviation_summary(audit, 0), std::invalid_argument);
    CHECK_THROWS_AS(deviation_summary(DeviationAudit{}, 30), std::invalid_argument);
}
