#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "omht/scoring.hpp"
#include "support/oracles.hpp"

using namespace omht;

namespace {

ObservationSet make_obs(const std::vector<std::vector<double>>& rows) { return ObservationSet::from_rows(rows); }

CandidateSet cs(std::vector<std::size_t> idx) { return CandidateSet(std::move(idx)); }

std::vector<std::size_t> relabel_set(const std::vector<std::size_t>& perm, const std::vector<std::size_t>& old_set) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < perm.size(); ++i)
        if (std::find(old_set.begin(), old_set.end(), perm[i]) != old_set.end()) out.push_back(i);
    return out;
}

}  // namespace

TEST_CASE("max_outliers follows ceil(M/2)-1") {
    CHECK(max_outliers(3) == 1);
    CHECK(max_outliers(4) == 1);
    CHECK(max_outliers(5) == 2);
    CHECK(max_outliers(10) == 4);
    CHECK(max_outliers(11) == 5);
}

TEST_CASE("candidate set validation") {
    CHECK_THROWS_AS(cs({}).validate(10), std::invalid_argument);               // empty
    CHECK_THROWS_AS(cs({1, 1}).validate(10), std::invalid_argument);           // duplicate
    CHECK_THROWS_AS(cs({2, 1}).validate(10), std::invalid_argument);           // unsorted
    CHECK_THROWS_AS(cs({9}).validate(9), std::invalid_argument);               // out of range
    CHECK_THROWS_AS(cs({0, 1, 2, 3, 4}).validate(10), std::invalid_argument);  // above the cap
    CHECK_NOTHROW(cs({0, 1, 2, 3}).validate(10));
    CHECK(cs({1, 4}).contains(4));
    CHECK_FALSE(cs({1, 4}).contains(2));
}

TEST_CASE("pooled_complement concatenates the untouched sequences in index order") {
    std::mt19937_64 eng(11);
    const auto rows3 = oracle::draw_rows(eng, 3, 4);
    const auto y3 = make_obs(rows3);
    const auto got3 = pooled_complement(y3, CandidateSet{{0}}, 1);
    CHECK(got3 == rows3[2]);

    const auto rows5 = oracle::draw_rows(eng, 5, 3);
    const auto y5 = make_obs(rows5);
    const auto got5 = pooled_complement(y5, CandidateSet{{1, 3}}, 0);
    std::vector<double> want = rows5[2];
    want.insert(want.end(), rows5[4].begin(), rows5[4].end());
    CHECK(got5 == want);
    CHECK(got5.size() == 2 * 3);

    CHECK_THROWS_AS(pooled_complement(y5, CandidateSet{{1, 3}}, 3), std::invalid_argument);  // probe inside the set
}

TEST_CASE("score matches brute-force enumeration") {
    std::mt19937_64 eng(23);
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t m = 4 + static_cast<std::size_t>(rep % 2);
        const auto rows = oracle::draw_rows(eng, m, 6);
        const auto y = make_obs(rows);
        for (std::size_t j = 0; j < m; ++j) {
            const CandidateSet b{{j}};
            const double got = score_G(KernelSpec::gaussian(1.0), y, b);
            const double want = oracle::score(1.0, rows, {j});
            CHECK(std::abs(got - want) <= 1e-12);
        }
    }
}

TEST_CASE("constant data scores exactly zero") {
    // every kernel value is k0, so the within and cross averages cancel
    const std::vector<double> flat(4, 1.7);
    const auto yc = make_obs({flat, flat, flat, flat, flat});
    CHECK(score_G(KernelSpec::gaussian(1.0), yc, cs({2})) == 0.0);
    const ScoreTable tc = score_table(KernelSpec::gaussian(1.0), yc, 2);
    for (const double s : tc.scores) CHECK(s == 0.0);
    CHECK(tc.second_score == 0.0);
}

TEST_CASE("identical sequences tie and break lexicographically") {
    const std::vector<double> row{0.4, -1.0, 2.0, 0.1};
    const auto y = make_obs({row, row, row, row, row});
    const ScoreTable t = score_table(KernelSpec::gaussian(1.0), y, 2);
    for (const double s : t.scores) CHECK(s == t.scores[0]);
    CHECK(t.best_index == 0);
    CHECK(t.best_set().indices == std::vector<std::size_t>{0, 1});
}

TEST_CASE("score table matches enumeration with lexicographic tie break") {
    std::mt19937_64 eng(37);
    const auto rows = oracle::draw_rows(eng, 6, 8);
    const auto y = make_obs(rows);
    for (std::size_t t = 1; t <= max_outliers(6); ++t) {
        const ScoreTable got = score_table(KernelSpec::gaussian(1.0), y, t);
        const oracle::TableRef want = oracle::table(1.0, rows, t);
        REQUIRE(got.sets.size() == want.sets.size());
        for (std::size_t i = 0; i < got.sets.size(); ++i) {
            CHECK(got.sets[i].indices == want.sets[i]);
            CHECK(std::abs(got.scores[i] - want.scores[i]) <= 1e-12);
        }
        CHECK(got.best_index == want.best);
        CHECK(std::abs(got.best_score - want.best_score) <= 1e-12);
        CHECK(std::abs(got.second_score - want.second_score) <= 1e-12);
        CHECK(got.second_score >= got.best_score);
    }
    CHECK_THROWS_AS(score_table(KernelSpec::gaussian(1.0), y, 0), std::invalid_argument);
    CHECK_THROWS_AS(score_table(KernelSpec::gaussian(1.0), y, max_outliers(6) + 1), std::invalid_argument);
}

TEST_CASE("relabeling the sequences permutes scores bit-exactly") {
    std::mt19937_64 eng(53);
    const std::size_t m = 6;
    const auto rows = oracle::draw_rows(eng, m, 7);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);

    std::vector<std::vector<double>> shuffled(m);
    for (std::size_t i = 0; i < m; ++i) shuffled[i] = rows[perm[i]];
    const auto y = make_obs(rows);
    const auto yp = make_obs(shuffled);
    const KernelSpec spec = KernelSpec::gaussian(1.0);

    // per-set equality under the relabeling
    const oracle::TableRef ref = oracle::table(1.0, rows, 2);
    for (const auto& old_set : ref.sets) {
        const auto new_set = relabel_set(perm, old_set);
        CHECK(score_G(spec, yp, CandidateSet{new_set}) == score_G(spec, y, CandidateSet{old_set}));
    }

    // table-level: same multiset of scores, matching minimizer, equal h
    const ScoreTable a = score_table(spec, y, 2);
    const ScoreTable b = score_table(spec, yp, 2);
    std::vector<double> sa = a.scores, sb = b.scores;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    CHECK(sa == sb);
    CHECK(b.best_score == a.best_score);
    CHECK(b.second_score == a.second_score);
    CHECK(b.best_set().indices == relabel_set(perm, a.best_set().indices));
}

TEST_CASE("incremental engine agrees with direct statistics before and after appends") {
    std::mt19937_64 eng(67);
    auto rows = oracle::draw_rows(eng, 5, 5);
    auto y = make_obs(rows);
    const KernelSpec spec = KernelSpec::gaussian(1.0);
    PairwiseKernelSums engine(spec, y);

    for (int extra = 0; extra < 3; ++extra) {
        for (std::size_t j = 0; j < 5; ++j) {
            const std::vector<std::size_t> excl = j == 0 ? std::vector<std::size_t>{1} : std::vector<std::size_t>{0};
            const double got = engine.pair_mmd2(j, excl);
            const double want = oracle::mmd2(1.0, rows[j], oracle::pooled(rows, excl, j));
            CHECK(std::abs(got - want) <= 1e-12);
        }
        std::vector<double> col = oracle::draw(eng, 5);
        engine.append_column(col);
        for (std::size_t i = 0; i < 5; ++i) rows[i].push_back(col[i]);
    }

    // cached sums against naive recomputation
    double w2 = 0.0;
    for (std::size_t a = 0; a < rows[2].size(); ++a)
        for (std::size_t b = 0; b < rows[2].size(); ++b)
            if (a != b) w2 += oracle::kernel(1.0, rows[2][a], rows[2][b]);
    CHECK(std::abs(engine.within_sum(2) - w2) <= 1e-10);
    double c13 = 0.0;
    for (const double u : rows[1])
        for (const double v : rows[3]) c13 += oracle::kernel(1.0, u, v);
    CHECK(std::abs(engine.cross_sum(1, 3) - c13) <= 1e-10);
    CHECK(engine.cross_sum(3, 1) == engine.cross_sum(1, 3));

    // one-shot helpers ride on the same engine
    const ScoreTable via_engine = engine.table(2);
    const ScoreTable fresh = score_table(spec, make_obs(rows), 2);
    CHECK(via_engine.best_index == fresh.best_index);
    CHECK(via_engine.second_score == fresh.second_score);
}

TEST_CASE("planted outliers separate the true set from the rest") {
    // two strongly shifted sequences: the true pair scores low, any set
    // missing an outlier stays above the theoretical separation floor
    const std::size_t m = 10, n = 400;
    std::vector<std::vector<double>> rows(m);
    std::mt19937_64 eng(6001);
    for (std::size_t i = 0; i < m; ++i) rows[i] = oracle::draw(eng, n, i < 2 ? 1.5 : 0.0);
    const auto y = make_obs(rows);
    const KernelSpec spec = KernelSpec::gaussian(1.0);

    const double true_score = score_G(spec, y, CandidateSet{{0, 1}});
    CHECK(true_score < 0.05);
    const double missing_one = score_G(spec, y, CandidateSet{{0, 2}});
    CHECK(missing_one > oracle::limit_m10_s2);
    const double missing_both = score_G(spec, y, CandidateSet{{2, 3}});
    CHECK(missing_both > oracle::limit_m10_s2);

    const ScoreTable t2 = score_table(spec, y, 2);
    CHECK(t2.best_set().indices == std::vector<std::size_t>{0, 1});
    CHECK(t2.second_score > oracle::limit_m10_s2);
}
