#include <catch2/catch_amalgamated.hpp>

#include "altcite/dataset.hpp"
#include "helpers.hpp"

using namespace altcite;
namespace tu = testutil;

static std::string three_row_csv() {
    return tu::csv_header() + "\n" + tu::csv_row("10.1/a", 1) + "\n" + tu::csv_row("10.1/b", 2) +
           "\n" + tu::csv_row("10.1/c", 3) + "\n";
}

TEST_CASE("csv loading builds one record per row") {
    auto dir = tu::temp_dir();
    auto path = tu::write_file(dir + "/data.csv", three_row_csv());
    auto ds = load_dataset(path);
    REQUIRE(ds.size() == 3);
    REQUIRE(ds.records[0].doi == "10.1/a");
    REQUIRE(ds.records[1].mendeley == 2);
    REQUIRE(ds.records[2].post_length == 3);
    REQUIRE(ds.records[0].academic_status == "student");
    REQUIRE(ds.column_order == schema::feature_names());
    REQUIRE(!ds.has_citations(2017));
}

TEST_CASE("header-only files are rejected as empty") {
    auto dir = tu::temp_dir();
    auto path = tu::write_file(dir + "/empty.csv", tu::csv_header() + "\n");
    try {
        load_dataset(path);
        FAIL("expected EmptyFile");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::empty_file);
    }
}

TEST_CASE("negative counts are rejected with row and column") {
    auto dir = tu::temp_dir();
    std::string row = "10.1/a,1,-1";
    for (int i = 0; i < 14; ++i) row += ",0";
    row += ",student,unknown,twitter,0,0";
    auto path = tu::write_file(dir + "/neg.csv", tu::csv_header() + "\n" + row + "\n");
    try {
        load_dataset(path);
        FAIL("expected NegativeValue");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::negative_value);
        REQUIRE(std::string(e.what()).find("mendeley") != std::string::npos);
        REQUIRE(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("missing schema columns are named") {
    auto dir = tu::temp_dir();
    auto path = tu::write_file(dir + "/missing.csv", "doi,author_count\n10.1/a,1\n");
    try {
        load_dataset(path);
        FAIL("expected MissingColumn");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::missing_column);
    }
}

TEST_CASE("duplicate DOIs are rejected") {
    auto dir = tu::temp_dir();
    auto path = tu::write_file(dir + "/dup.csv", tu::csv_header() + "\n" + tu::csv_row("10.1/a", 1) +
                                                     "\n" + tu::csv_row("10.1/a", 2) + "\n");
    try {
        load_dataset(path);
        FAIL("expected DuplicateDoi");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::duplicate_doi);
    }
}

TEST_CASE("unknown columns are preserved as metadata") {
    auto dir = tu::temp_dir();
    auto path = tu::write_file(dir + "/extra.csv", tu::csv_header() + ",venue\n" +
                                                       tu::csv_row("10.1/a", 1) + ",Nature\n");
    auto ds = load_dataset(path);
    REQUIRE(ds.extra_columns == std::vector<std::string>{"venue"});
    REQUIRE(ds.extra_values[0][0] == "Nature");
}

TEST_CASE("json loading matches csv loading") {
    auto dir = tu::temp_dir();
    nlohmann::json rec;
    rec["doi"] = "10.1/a";
    for (const auto& f : schema::numeric_feature_names()) rec[f] = 4;
    rec["academic_status"] = "student";
    rec["profession_twitter"] = "unknown";
    rec["platform_max_mentions"] = "twitter";
    rec["citations_2017"] = 9;
    auto path = tu::write_file(dir + "/data.json", nlohmann::json::array({rec}).dump());
    auto ds = load_dataset(path, FileFormat::json);
    REQUIRE(ds.size() == 1);
    REQUIRE(ds.records[0].twitter == 4);
    REQUIRE(ds.records[0].citations_2017.value() == 9);
}

TEST_CASE("citation join keeps matches and reports drops") {
    auto dir = tu::temp_dir();
    auto ds = load_dataset(tu::write_file(dir + "/d.csv", three_row_csv()));
    std::vector<CitationRow> rows{{"10.1/a", 2017, 5}, {"10.1/c", 2017, 0}, {"10.1/zz", 2017, 3}};
    auto joined = join_citations(ds, rows);
    REQUIRE(joined.dataset.size() == 2);
    REQUIRE(joined.dropped_dois == std::vector<std::string>{"10.1/b"});
    REQUIRE(joined.unmatched_citation_dois == std::vector<std::string>{"10.1/zz"});
    REQUIRE(joined.dataset.records[0].citations_2017.value() == 5);
    REQUIRE(joined.dataset.records[1].citations_2017.value() == 0);
}

TEST_CASE("citation join with identical DOI sets keeps everything") {
    auto dir = tu::temp_dir();
    auto ds = load_dataset(tu::write_file(dir + "/d.csv", three_row_csv()));
    std::vector<CitationRow> rows{
        {"10.1/a", 2017, 1}, {"10.1/b", 2017, 2}, {"10.1/c", 2020, 3}};
    auto joined = join_citations(ds, rows);
    REQUIRE(joined.dataset.size() == 3);
    REQUIRE(joined.dropped_dois.empty());
    REQUIRE(joined.unmatched_citation_dois.empty());
    REQUIRE(joined.dataset.records[2].citations_2020.value() == 3);
}

TEST_CASE("disjoint DOI sets raise NoOverlap") {
    auto dir = tu::temp_dir();
    auto ds = load_dataset(tu::write_file(dir + "/d.csv", three_row_csv()));
    std::vector<CitationRow> rows{{"10.9/x", 2017, 1}};
    try {
        join_citations(ds, rows);
        FAIL("expected NoOverlap");
    } catch (const Error& e) {
        REQUIRE(e.code() == Errc::no_overlap);
    }
}

TEST_CASE("describe computes quartiles with the linear rank convention") {
    Dataset ds;
    for (long long v : {0, 1, 2, 3, 4}) {
        auto r = tu::zero_record("10.1/" + std::to_string(v));
        r.mendeley = v;
        ds.records.push_back(r);
    }
    auto stats = describe(ds);
    const auto& m = stats.at("mendeley");
    REQUIRE(m.q25 == 1.0);
    REQUIRE(m.q50 == 2.0);
    REQUIRE(m.q75 == 3.0);
    REQUIRE(m.mean == Catch::Approx(2.0));
    REQUIRE(stats.std_is_sample);
}

TEST_CASE("describe of identical records gives zero spread") {
    Dataset ds;
    for (int i = 0; i < 4; ++i) {
        auto r = tu::zero_record("10.1/" + std::to_string(i));
        r.twitter = 7;
        ds.records.push_back(r);
    }
    auto stats = describe(ds);
    for (const auto& f : stats.features) {
        REQUIRE(f.std == 0.0);
        REQUIRE(f.min == f.max);
    }
    REQUIRE(stats.at("twitter").min == 7.0);
}

TEST_CASE("describe is invariant under record order") {
    auto ds = tu::planted_signal_dataset(60, 5);
    auto shuffled = ds;
    Rng rng(9);
    rng.shuffle(shuffled.records);
    auto a = describe(ds), b = describe(shuffled);
    REQUIRE(a.features.size() == b.features.size());
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        REQUIRE(a.features[i].mean == Catch::Approx(b.features[i].mean));
        REQUIRE(a.features[i].q50 == Catch::Approx(b.features[i].q50));
        REQUIRE(a.features[i].std == Catch::Approx(b.features[i].std));
    }
}

TEST_CASE("stat invariants hold on generated data") {
    auto ds = generate(paper_default_profile(), 500, 3);
    auto stats = describe(ds);
    for (const auto& f : stats.features) {
        REQUIRE(f.min <= f.q25);
        REQUIRE(f.q25 <= f.q50);
        REQUIRE(f.q50 <= f.q75);
        REQUIRE(f.q75 <= f.max);
    }
}

TEST_CASE("normalized csv round-trips through load") {
    auto ds = tu::planted_signal_dataset(20, 2);
    auto dir = tu::temp_dir();
    write_dataset_csv(ds, dir + "/out.csv");
    auto again = load_dataset(dir + "/out.csv");
    REQUIRE(again.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        REQUIRE(again.records[i].doi == ds.records[i].doi);
        REQUIRE(again.records[i].mendeley == ds.records[i].mendeley);
        REQUIRE(again.records[i].citations_2017 == ds.records[i].citations_2017);
        REQUIRE(again.records[i].academic_status == ds.records[i].academic_status);
    }
}
