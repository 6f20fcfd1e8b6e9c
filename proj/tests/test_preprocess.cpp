#include <catch2/catch_amalgamated.hpp>

#include "altcite/preprocess.hpp"
#include "helpers.hpp"

using namespace altcite;
namespace tu = testutil;

static FeatureMatrix matrix_of(std::vector<std::vector<double>> cols,
                               std::vector<std::string> names) {
    FeatureMatrix m;
    m.feature_names = std::move(names);
    m.transform_log.assign(m.feature_names.size(), false);
    m.values = Matrix(cols[0].size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < cols[j].size(); ++i) m.values(i, j) = cols[j][i];
    return m;
}

TEST_CASE("pearson handles exact and hand-computed cases") {
    REQUIRE(pearson({1, 2, 3}, {1, 2, 3}) == Catch::Approx(1.0));
    REQUIRE(pearson({1, 2, 3}, {3, 2, 1}) == Catch::Approx(-1.0));
    REQUIRE(pearson({1, 2, 3, 4}, {1, 3, 2, 4}) == Catch::Approx(0.8));
}

TEST_CASE("pearson matrix flags zero-variance columns") {
    auto m = matrix_of({{1, 2, 3}, {1, 2, 3}, {5, 5, 5}}, {"a", "b", "c"});
    auto corr = pearson_matrix(m);
    REQUIRE(corr.r(0, 1) == Catch::Approx(1.0));
    REQUIRE(corr.zero_variance[2]);
    REQUIRE(corr.r(2, 2) == 0.0);
    REQUIRE(corr.r(0, 2) == 0.0);
    REQUIRE(corr.r(0, 0) == 1.0);
}

TEST_CASE("pearson matrix needs two rows") {
    auto m = matrix_of({{1}, {2}}, {"a", "b"});
    try {
        pearson_matrix(m);
        FAIL("expected TooFewRows");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::too_few_rows);
    }
}

TEST_CASE("pearson is invariant under positive affine maps") {
    Rng rng(3);
    std::vector<double> x(50), y(50);
    for (auto& v : x) v = rng.normal();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.3 * x[i] + rng.normal();
    double base = pearson(x, y);
    std::vector<double> xs(x);
    for (auto& v : xs) v = 2.5 * v + 17.0;
    REQUIRE(std::fabs(pearson(xs, y) - base) < 1e-10);
}

TEST_CASE("pruning drops nothing below the threshold") {
    Rng rng(5);
    std::vector<double> a(40), b(40);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    auto m = matrix_of({a, b}, {"a", "b"});
    auto out = prune_collinear(m, 0.85);
    REQUIRE(out.dropped.empty());
    REQUIRE(out.matrix.p() == 2);
}

TEST_CASE("three identical columns keep only the first in canonical order") {
    std::vector<double> col{1, 2, 3, 4, 5};
    auto m = matrix_of({col, col, col}, {"a", "b", "c"});
    auto out = prune_collinear(m, 0.85);
    REQUIRE(out.matrix.feature_names == std::vector<std::string>{"a"});
    REQUIRE(out.dropped == std::vector<std::string>{"b", "c"});
}

TEST_CASE("the member with broader correlations is dropped") {
    // f0 and f1 nearly identical; f1 also tracks f2, so its mean |corr| is larger
    Rng rng(11);
    std::size_t n = 400;
    std::vector<double> f0(n), f1(n), f2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double base = rng.normal();
        f0[i] = base + 0.05 * rng.normal();
        f1[i] = base + 0.05 * rng.normal();
        f2[i] = 0.6 * f1[i] + 0.8 * rng.normal();
    }
    auto m = matrix_of({f0, f1, f2}, {"f0", "f1", "f2"});
    auto out = prune_collinear(m, 0.85);
    REQUIRE(out.dropped == std::vector<std::string>{"f1"});
}

TEST_CASE("no pair above threshold remains after pruning") {
    auto ds = generate(paper_default_profile(), 800, 21);
    auto out = prune_collinear(make_numeric_matrix(ds), 0.85);
    auto corr = pearson_matrix(out.matrix);
    for (std::size_t a = 0; a < out.matrix.p(); ++a)
        for (std::size_t b = a + 1; b < out.matrix.p(); ++b)
            REQUIRE(std::fabs(corr.r(a, b)) < 0.85);
}

TEST_CASE("categorical encoding uses first-seen order and the unseen rule") {
    Dataset ds;
    for (auto status : {"student", "postdoc", "student"}) {
        auto r = tu::zero_record("10.1/" + std::to_string(ds.size()));
        r.academic_status = status;
        ds.records.push_back(r);
    }
    auto enc = encode_categoricals(ds);
    REQUIRE(enc.columns(0, 0) == 0.0);
    REQUIRE(enc.columns(1, 0) == 1.0);
    REQUIRE(enc.columns(2, 0) == 0.0);
    REQUIRE(enc.vocab.levels.at("academic_status") ==
            std::vector<std::string>{"student", "postdoc"});
    REQUIRE(enc.vocab.code("academic_status", "librarian") == 2); // unseen -> vocab size

    Dataset ds2;
    auto r = tu::zero_record("10.1/x");
    r.academic_status = "librarian";
    ds2.records.push_back(r);
    auto enc2 = encode_categoricals(ds2, &enc.vocab);
    REQUIRE(enc2.columns(0, 0) == 2.0);
}

TEST_CASE("empty-string categories get their own code") {
    Dataset ds;
    auto a = tu::zero_record("10.1/a");
    a.academic_status = "";
    auto b = tu::zero_record("10.1/b");
    b.academic_status = "student";
    ds.records = {a, b};
    auto enc = encode_categoricals(ds);
    REQUIRE(enc.columns(0, 0) == 0.0);
    REQUIRE(enc.columns(1, 0) == 1.0);
}

TEST_CASE("log1p transform matches high-precision references") {
    auto m = matrix_of({{0, 8, 2406790}}, {"x"});
    auto t = log1p_features(m, {"x"});
    REQUIRE(t.values(0, 0) == 0.0);
    REQUIRE(t.values(1, 0) == Catch::Approx(2.1972245773).epsilon(0).margin(1e-5));
    REQUIRE(t.values(2, 0) == Catch::Approx(14.6938048829).epsilon(0).margin(1e-3));
    REQUIRE(t.transform_log[0]);
}

TEST_CASE("log1p is strictly monotone and rejects unknown features") {
    auto m = matrix_of({{0, 1, 2, 5, 100}}, {"x"});
    auto t = log1p_features(m, {"x"});
    for (std::size_t i = 1; i < 5; ++i) REQUIRE(t.values(i, 0) > t.values(i - 1, 0));
    try {
        log1p_features(m, {"nope"});
        FAIL("expected UnknownFeature");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::unknown_feature);
    }
}

TEST_CASE("standardize uses population std and handles constants") {
    auto m = matrix_of({{0, 2}, {5, 5}}, {"a", "c"});
    auto s = standardize(m);
    REQUIRE(s.values(0, 0) == Catch::Approx(-1.0));
    REQUIRE(s.values(1, 0) == Catch::Approx(1.0));
    REQUIRE(s.values(0, 1) == 0.0);
    REQUIRE(s.values(1, 1) == 0.0);
    REQUIRE(s.standardized.has_value());

    // re-applying freshly fitted stats to an already standardized matrix is a no-op
    auto again = standardize(s, fit_scaler(s));
    for (std::size_t i = 0; i < 2; ++i)
        REQUIRE(std::fabs(again.values(i, 0) - s.values(i, 0)) < 1e-12);
}

TEST_CASE("scaler stats transfer to unseen data") {
    auto m = matrix_of({{0, 2, 4}}, {"a"});
    auto stats = fit_scaler(m);
    auto t = matrix_of({{6}}, {"a"});
    auto s = standardize(t, stats);
    REQUIRE(s.values(0, 0) == Catch::Approx((6.0 - 2.0) / population_std({0, 2, 4})));
}

TEST_CASE("nonzero labeling follows the at-least-one rule") {
    auto l = label_nonzero({0, 3, 0, 12});
    REQUIRE(l.values == std::vector<double>{0, 1, 0, 1});
    REQUIRE(l.positive_label_meaning == ">=1 citation");
    REQUIRE(label_nonzero({0}).values[0] == 0.0);
    REQUIRE(label_nonzero({1}).values[0] == 1.0);
}

TEST_CASE("median labeling is strict") {
    auto r = label_above_median({1, 2, 3});
    REQUIRE(r.median == 2.0);
    REQUIRE(r.labels.values == std::vector<double>{0, 0, 1});
    auto r2 = label_above_median({8, 8, 8, 20});
    REQUIRE(r2.labels.values[0] == 0.0); // equal to the median is a negative
}

TEST_CASE("reference-corpus citation arithmetic reproduces the published splits") {
    auto counts = tu::paper_citation_vector();
    REQUIRE(counts.size() == 12374);
    auto nz = label_nonzero(counts);
    std::size_t yes = 0;
    for (double v : nz.values) yes += (v == 1.0);
    REQUIRE(yes == 9779);
    REQUIRE(counts.size() - yes == 2595);
    auto med = label_above_median(counts);
    REQUIRE(med.median == 8.0);
    std::size_t above = 0;
    for (double v : med.labels.values) above += (v == 1.0);
    REQUIRE(above == 5854);
    REQUIRE(counts.size() - above == 6520);
}

TEST_CASE("at most half are positive when the median is attained") {
    Rng rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<long long> counts(51); // odd length: the median is an element
        for (auto& c : counts) c = static_cast<long long>(rng.below(30));
        auto r = label_above_median(counts);
        std::size_t pos = 0;
        for (double v : r.labels.values) pos += (v == 1.0);
        REQUIRE(pos <= counts.size() / 2);
    }
}

TEST_CASE("holdout split sizes follow the floor rule") {
    auto plan = holdout_split(12374, 0.8, 1);
    REQUIRE(plan.train_indices.size() == 9899);
    REQUIRE(plan.test_indices.size() == 2475);
    auto small = holdout_split(10, 0.8, 1);
    REQUIRE(small.train_indices.size() == 8);
    REQUIRE(small.test_indices.size() == 2);
}

TEST_CASE("holdout is deterministic and an exact partition") {
    auto a = holdout_split(100, 0.8, 9), b = holdout_split(100, 0.8, 9);
    REQUIRE(a.train_indices == b.train_indices);
    REQUIRE(a.test_indices == b.test_indices);
    std::vector<bool> seen(100, false);
    for (auto i : a.train_indices) seen[i] = true;
    for (auto i : a.test_indices) {
        REQUIRE(!seen[i]);
        seen[i] = true;
    }
    REQUIRE(std::all_of(seen.begin(), seen.end(), [](bool v) { return v; }));
}

TEST_CASE("degenerate holdouts are rejected") {
    try {
        holdout_split(2, 0.1, 1);
        FAIL("expected DegenerateSplit");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::degenerate_split);
    }
}

TEST_CASE("kfold sizes differ by at most one and partition the range") {
    auto plan = kfold(12374, 10, 4);
    std::size_t of1238 = 0, of1237 = 0;
    for (const auto& f : plan.folds) {
        if (f.size() == 1238) ++of1238;
        if (f.size() == 1237) ++of1237;
    }
    REQUIRE(of1238 == 4);
    REQUIRE(of1237 == 6);

    auto singletons = kfold(10, 10, 4);
    for (const auto& f : singletons.folds) REQUIRE(f.size() == 1);

    std::vector<bool> seen(12374, false);
    for (const auto& f : plan.folds)
        for (auto i : f) {
            REQUIRE(!seen[i]);
            seen[i] = true;
        }
    REQUIRE(std::all_of(seen.begin(), seen.end(), [](bool v) { return v; }));
}

TEST_CASE("kfold validates k") {
    try {
        kfold(5, 6, 1);
        FAIL("expected BadK");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::bad_k);
    }
}

TEST_CASE("split plans replay bit-exactly through JSON") {
    auto plan = holdout_split(50, 0.8, 123);
    auto round = SplitPlan::from_json(plan.to_json());
    REQUIRE(round.train_indices == plan.train_indices);
    REQUIRE(round.test_indices == plan.test_indices);
    REQUIRE(round.seed == plan.seed);

    auto folds = kfold(50, 5, 77);
    auto round2 = SplitPlan::from_json(folds.to_json());
    REQUIRE(round2.folds == folds.folds);
}
