#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "altcite/common.hpp"

namespace altcite::schema {

// Canonical feature order. Every table, matrix and report uses this order.
inline constexpr std::array<std::string_view, 21> kFeatures = {
    "author_count",   "mendeley",        "citeulike",
    "news",           "blogs",           "reddit",
    "twitter",        "retweets",        "twitter_mentions",
    "facebook",       "googleplus",      "peer_review",
    "wikipedia",      "total_platforms", "countries",
    "max_followers",  "academic_status", "profession_twitter",
    "platform_max_mentions", "hashtags", "post_length",
};

inline constexpr std::array<std::string_view, 3> kCategorical = {
    "academic_status", "profession_twitter", "platform_max_mentions"};

inline bool is_categorical(std::string_view name) {
    for (auto c : kCategorical)
        if (c == name) return true;
    return false;
}

inline std::vector<std::string> feature_names() {
    return {kFeatures.begin(), kFeatures.end()};
}

inline std::vector<std::string> numeric_feature_names() {
    std::vector<std::string> out;
    for (auto f : kFeatures)
        if (!is_categorical(f)) out.emplace_back(f);
    return out;
}

inline std::size_t feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatures.size(); ++i)
        if (kFeatures[i] == name) return i;
    fail(Errc::unknown_feature, std::string(name));
}

inline constexpr std::string_view kDoiColumn = "doi";
inline constexpr std::string_view kCitations2017 = "citations_2017";
inline constexpr std::string_view kCitations2020 = "citations_2020";
inline constexpr std::string_view kDiscipline = "discipline";

} // namespace altcite::schema
