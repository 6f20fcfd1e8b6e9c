#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "altcite/dataset.hpp"
#include "altcite/generator.hpp"

namespace testutil {

inline std::string temp_dir() {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("altcite_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline std::string write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
    return path;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string csv_header(bool with_citations = false) {
    std::string h =
        "doi,author_count,mendeley,citeulike,news,blogs,reddit,twitter,retweets,"
        "twitter_mentions,facebook,googleplus,peer_review,wikipedia,total_platforms,"
        "countries,max_followers,academic_status,profession_twitter,platform_max_mentions,"
        "hashtags,post_length";
    if (with_citations) h += ",citations_2017,citations_2020";
    return h;
}

/// One CSV row with every count equal to `fill` and the categoricals fixed.
inline std::string csv_row(const std::string& doi, long long fill,
                           const std::string& status = "student",
                           const std::string& citations = "") {
    std::string f = std::to_string(fill);
    std::string row = doi;
    for (int i = 0; i < 16; ++i) row += "," + f;
    row += "," + status + ",unknown,twitter," + f + "," + f;
    if (!citations.empty()) row += "," + citations;
    return row;
}

inline altcite::ArticleRecord zero_record(const std::string& doi = "10.1/zero") {
    altcite::ArticleRecord r;
    r.doi = doi;
    r.academic_status = "";
    r.profession_twitter = "";
    r.platform_max_mentions = "";
    return r;
}

/// Citation vector with the reference corpus arithmetic: 12,374 entries,
/// 2,595 zeros, 6,520 at or below eight, median exactly eight.
inline std::vector<long long> paper_citation_vector() {
    std::vector<long long> v;
    v.reserve(12374);
    auto push = [&v](long long value, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) v.push_back(value);
    };
    push(0, 2595);
    push(1, 1000);
    push(2, 1000);
    push(7, 1000);
    push(8, 925); // sorted positions 6186/6187 land here: median 8
    push(9, 3000);
    push(20, 2000);
    push(100, 854);
    return v;
}

/// Dataset with one informative feature (mendeley) driving the 2017 citation
/// label, plus label noise; every other column is unrelated small noise.
inline altcite::Dataset planted_signal_dataset(std::size_t n, std::uint64_t seed,
                                               double noise = 0.05) {
    altcite::Dataset ds;
    ds.provenance.source = "planted";
    altcite::Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        altcite::ArticleRecord r;
        r.doi = "planted:" + std::to_string(i);
        r.mendeley = static_cast<long long>(rng.below(100));
        r.author_count = static_cast<long long>(rng.below(4));
        r.citeulike = static_cast<long long>(rng.below(3));
        r.news = static_cast<long long>(rng.below(2));
        r.blogs = static_cast<long long>(rng.below(2));
        r.reddit = static_cast<long long>(rng.below(2));
        r.twitter = static_cast<long long>(rng.below(5));
        r.retweets = static_cast<long long>(rng.below(4));
        r.twitter_mentions = static_cast<long long>(rng.below(3));
        r.facebook = static_cast<long long>(rng.below(3));
        r.googleplus = static_cast<long long>(rng.below(2));
        r.peer_review = static_cast<long long>(rng.below(2));
        r.wikipedia = static_cast<long long>(rng.below(2));
        r.total_platforms = static_cast<long long>(rng.below(16));
        r.countries = static_cast<long long>(rng.below(6));
        r.max_followers = static_cast<long long>(rng.below(1000));
        r.hashtags = static_cast<long long>(rng.below(3));
        r.post_length = static_cast<long long>(rng.below(200));
        r.academic_status = (rng.below(2) == 0) ? "student" : "professor";
        r.profession_twitter = "unknown";
        r.platform_max_mentions = "twitter";
        bool positive = r.mendeley > 50;
        if (rng.uniform() < noise) positive = !positive;
        r.citations_2017 = positive ? 5 : 0;
        r.citations_2020 = static_cast<long long>(rng.below(2)); // horizon noise
        ds.records.push_back(std::move(r));
    }
    return ds;
}

} // namespace testutil
