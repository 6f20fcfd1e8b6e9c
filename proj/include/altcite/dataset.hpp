#pragma once

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "altcite/common.hpp"
#include "altcite/csv.hpp"
#include "altcite/schema.hpp"

namespace altcite {

/// One article: 18 altmetric counts, 3 qualitative fields, citation counts at
/// two horizons (optional until joined).
struct ArticleRecord {
    std::string doi;
    long long author_count = 0;
    long long mendeley = 0;
    long long citeulike = 0;
    long long news = 0;
    long long blogs = 0;
    long long reddit = 0;
    long long twitter = 0;
    long long retweets = 0;
    long long twitter_mentions = 0;
    long long facebook = 0;
    long long googleplus = 0;
    long long peer_review = 0;
    long long wikipedia = 0;
    long long total_platforms = 0;
    long long countries = 0;
    long long max_followers = 0;
    std::string academic_status;
    std::string profession_twitter;
    std::string platform_max_mentions;
    long long hashtags = 0;
    long long post_length = 0;
    std::optional<long long> citations_2017;
    std::optional<long long> citations_2020;
    std::optional<std::string> discipline;
};

namespace detail {

struct NumericField {
    std::string_view name;
    long long ArticleRecord::* member;
};

inline constexpr std::array<NumericField, 18> kNumericFields = {{
    {"author_count", &ArticleRecord::author_count},
    {"mendeley", &ArticleRecord::mendeley},
    {"citeulike", &ArticleRecord::citeulike},
    {"news", &ArticleRecord::news},
    {"blogs", &ArticleRecord::blogs},
    {"reddit", &ArticleRecord::reddit},
    {"twitter", &ArticleRecord::twitter},
    {"retweets", &ArticleRecord::retweets},
    {"twitter_mentions", &ArticleRecord::twitter_mentions},
    {"facebook", &ArticleRecord::facebook},
    {"googleplus", &ArticleRecord::googleplus},
    {"peer_review", &ArticleRecord::peer_review},
    {"wikipedia", &ArticleRecord::wikipedia},
    {"total_platforms", &ArticleRecord::total_platforms},
    {"countries", &ArticleRecord::countries},
    {"max_followers", &ArticleRecord::max_followers},
    {"hashtags", &ArticleRecord::hashtags},
    {"post_length", &ArticleRecord::post_length},
}};

struct CategoricalField {
    std::string_view name;
    std::string ArticleRecord::* member;
};

inline constexpr std::array<CategoricalField, 3> kCategoricalFields = {{
    {"academic_status", &ArticleRecord::academic_status},
    {"profession_twitter", &ArticleRecord::profession_twitter},
    {"platform_max_mentions", &ArticleRecord::platform_max_mentions},
}};

} // namespace detail

inline long long& numeric_field(ArticleRecord& r, std::string_view name) {
    for (const auto& f : detail::kNumericFields)
        if (f.name == name) return r.*(f.member);
    fail(Errc::unknown_feature, std::string(name));
}

inline long long numeric_field(const ArticleRecord& r, std::string_view name) {
    for (const auto& f : detail::kNumericFields)
        if (f.name == name) return r.*(f.member);
    fail(Errc::unknown_feature, std::string(name));
}

inline std::string& categorical_field(ArticleRecord& r, std::string_view name) {
    for (const auto& f : detail::kCategoricalFields)
        if (f.name == name) return r.*(f.member);
    fail(Errc::unknown_feature, std::string(name));
}

inline const std::string& categorical_field(const ArticleRecord& r, std::string_view name) {
    for (const auto& f : detail::kCategoricalFields)
        if (f.name == name) return r.*(f.member);
    fail(Errc::unknown_feature, std::string(name));
}

struct Provenance {
    std::string source;
    std::string note;
};

/// Immutable after construction; column_order is the single canonical order.
struct Dataset {
    std::vector<ArticleRecord> records;
    std::vector<std::string> column_order = schema::feature_names();
    Provenance provenance;
    // unknown input columns, preserved verbatim and aligned with records
    std::vector<std::string> extra_columns;
    std::vector<std::vector<std::string>> extra_values;

    std::size_t size() const { return records.size(); }

    bool has_citations(int year) const {
        if (records.empty()) return false;
        for (const auto& r : records) {
            const auto& c = (year == 2017) ? r.citations_2017 : r.citations_2020;
            if (!c) return false;
        }
        return true;
    }

    std::vector<long long> citations(int year) const {
        std::vector<long long> out;
        out.reserve(records.size());
        for (const auto& r : records) {
            const auto& c = (year == 2017) ? r.citations_2017 : r.citations_2020;
            if (!c) fail(Errc::missing_column, "citations_" + std::to_string(year));
            out.push_back(*c);
        }
        return out;
    }

    /// Numeric columns present in this dataset: the 18 counts plus any fully
    /// populated citation columns, in canonical order.
    std::vector<std::string> numeric_columns() const {
        auto cols = schema::numeric_feature_names();
        if (has_citations(2017)) cols.emplace_back(schema::kCitations2017);
        if (has_citations(2020)) cols.emplace_back(schema::kCitations2020);
        return cols;
    }

    std::vector<double> column(const std::string& name) const {
        std::vector<double> out;
        out.reserve(records.size());
        if (name == schema::kCitations2017 || name == schema::kCitations2020) {
            int year = (name == schema::kCitations2017) ? 2017 : 2020;
            for (long long c : citations(year)) out.push_back(static_cast<double>(c));
            return out;
        }
        for (const auto& r : records) out.push_back(static_cast<double>(numeric_field(r, name)));
        return out;
    }
};

// ---- loading ----

enum class FileFormat { csv, json };

namespace detail {

inline void validate_record(const ArticleRecord& r, std::size_t row,
                            const std::string& source) {
    for (const auto& f : kNumericFields) {
        if (r.*(f.member) < 0)
            fail(Errc::negative_value, "row " + std::to_string(row) + " column " +
                                           std::string(f.name) + " in " + source);
    }
    if (r.citations_2017 && *r.citations_2017 < 0)
        fail(Errc::negative_value, "row " + std::to_string(row) + " column citations_2017");
    if (r.citations_2020 && *r.citations_2020 < 0)
        fail(Errc::negative_value, "row " + std::to_string(row) + " column citations_2020");
}

inline void check_duplicates(const Dataset& ds) {
    std::set<std::string> seen;
    for (const auto& r : ds.records) {
        if (r.doi.empty()) fail(Errc::parse_error, "empty doi");
        if (!seen.insert(r.doi).second) fail(Errc::duplicate_doi, r.doi);
    }
}

inline Dataset load_csv(const std::string& path) {
    auto table = csv::read_file(path);
    std::map<std::string, std::size_t> idx;
    for (std::size_t j = 0; j < table.header.size(); ++j) idx[table.header[j]] = j;

    if (!idx.count(std::string(schema::kDoiColumn)))
        fail(Errc::missing_column, "doi");
    for (auto f : schema::kFeatures)
        if (!idx.count(std::string(f))) fail(Errc::missing_column, std::string(f));
    if (table.rows.empty()) fail(Errc::empty_file, path + " has a header but no rows");

    std::set<std::string> known;
    known.insert(std::string(schema::kDoiColumn));
    for (auto f : schema::kFeatures) known.insert(std::string(f));
    known.insert(std::string(schema::kCitations2017));
    known.insert(std::string(schema::kCitations2020));
    known.insert(std::string(schema::kDiscipline));

    Dataset ds;
    ds.provenance.source = path;
    for (const auto& h : table.header)
        if (!known.count(h)) {
            ds.extra_columns.push_back(h);
            ds.extra_values.emplace_back();
        }

    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& cells = table.rows[i];
        if (cells.size() != table.header.size())
            fail(Errc::parse_error, "row " + std::to_string(i + 1) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(table.header.size()));
        ArticleRecord r;
        r.doi = cells[idx.at(std::string(schema::kDoiColumn))];
        for (const auto& f : kNumericFields) {
            const std::string name{f.name};
            r.*(f.member) = csv::parse_count(cells[idx.at(name)],
                                             "row " + std::to_string(i + 1) + " column " + name);
        }
        for (const auto& f : kCategoricalFields)
            r.*(f.member) = cells[idx.at(std::string(f.name))];
        if (auto it = idx.find(std::string(schema::kCitations2017)); it != idx.end())
            if (!csv::trim(cells[it->second]).empty())
                r.citations_2017 = csv::parse_count(cells[it->second],
                                                    "row " + std::to_string(i + 1) + " citations_2017");
        if (auto it = idx.find(std::string(schema::kCitations2020)); it != idx.end())
            if (!csv::trim(cells[it->second]).empty())
                r.citations_2020 = csv::parse_count(cells[it->second],
                                                    "row " + std::to_string(i + 1) + " citations_2020");
        if (auto it = idx.find(std::string(schema::kDiscipline)); it != idx.end())
            if (!csv::trim(cells[it->second]).empty()) r.discipline = cells[it->second];
        validate_record(r, i + 1, path);
        ds.records.push_back(std::move(r));
        std::size_t e = 0;
        for (const auto& h : table.header)
            if (!known.count(h)) ds.extra_values[e++].push_back(cells[idx.at(h)]);
    }
    check_duplicates(ds);
    return ds;
}

inline long long json_count(const nlohmann::json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d == std::floor(d)) return static_cast<long long>(d);
    }
    if (v.is_string()) return csv::parse_count(v.get<std::string>(), where);
    fail(Errc::parse_error, "not an integer count at " + where);
}

inline Dataset load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail(Errc::parse_error, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) fail(Errc::parse_error, "expected a JSON array of objects");
    if (doc.empty()) fail(Errc::empty_file, path + " contains an empty array");

    Dataset ds;
    ds.provenance.source = path;
    std::size_t i = 0;
    for (const auto& obj : doc) {
        ++i;
        if (!obj.is_object()) fail(Errc::parse_error, "element " + std::to_string(i));
        if (!obj.contains("doi")) fail(Errc::missing_column, "doi");
        ArticleRecord r;
        r.doi = obj.at("doi").get<std::string>();
        for (const auto& f : kNumericFields) {
            const std::string name{f.name};
            if (!obj.contains(name)) fail(Errc::missing_column, name);
            r.*(f.member) = json_count(obj.at(name), "record " + std::to_string(i) + " " + name);
        }
        for (const auto& f : kCategoricalFields) {
            const std::string name{f.name};
            if (!obj.contains(name)) fail(Errc::missing_column, name);
            r.*(f.member) = obj.at(name).get<std::string>();
        }
        if (obj.contains("citations_2017") && !obj.at("citations_2017").is_null())
            r.citations_2017 = json_count(obj.at("citations_2017"), "citations_2017");
        if (obj.contains("citations_2020") && !obj.at("citations_2020").is_null())
            r.citations_2020 = json_count(obj.at("citations_2020"), "citations_2020");
        if (obj.contains("discipline") && !obj.at("discipline").is_null())
            r.discipline = obj.at("discipline").get<std::string>();
        validate_record(r, i, path);
        ds.records.push_back(std::move(r));
    }
    check_duplicates(ds);
    return ds;
}

} // namespace detail

inline Dataset load_dataset(const std::string& path, FileFormat format) {
    return format == FileFormat::csv ? detail::load_csv(path) : detail::load_json(path);
}

inline Dataset load_dataset(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = (dot == std::string::npos) ? "" : path.substr(dot + 1);
    return load_dataset(path, ext == "json" ? FileFormat::json : FileFormat::csv);
}

// ---- citation join ----

struct CitationRow {
    std::string doi;
    int year = 0;
    long long count = 0;
};

inline std::vector<CitationRow> load_citation_table(const std::string& path) {
    auto table = csv::read_file(path);
    std::map<std::string, std::size_t> idx;
    for (std::size_t j = 0; j < table.header.size(); ++j) idx[table.header[j]] = j;
    for (const char* col : {"doi", "year", "count"})
        if (!idx.count(col)) fail(Errc::missing_column, col);
    std::vector<CitationRow> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& cells = table.rows[i];
        CitationRow r;
        r.doi = cells[idx.at("doi")];
        r.year = static_cast<int>(csv::parse_count(cells[idx.at("year")], "year row " + std::to_string(i + 1)));
        r.count = csv::parse_count(cells[idx.at("count")], "count row " + std::to_string(i + 1));
        rows.push_back(std::move(r));
    }
    return rows;
}

struct JoinResult {
    Dataset dataset;
    std::vector<std::string> dropped_dois;            // dataset records without any citation row
    std::vector<std::string> unmatched_citation_dois; // citation rows without a dataset record
};

inline JoinResult join_citations(const Dataset& ds, const std::vector<CitationRow>& citations) {
    std::map<std::string, std::pair<std::optional<long long>, std::optional<long long>>> by_doi;
    for (const auto& c : citations) {
        if (c.year != 2017 && c.year != 2020)
            fail(Errc::bad_argument, "citation year must be 2017 or 2020, got " + std::to_string(c.year));
        if (c.count < 0) fail(Errc::negative_value, "citation count for " + c.doi);
        auto& slot = by_doi[c.doi];
        if (c.year == 2017)
            slot.first = c.count;
        else
            slot.second = c.count;
    }

    JoinResult out;
    out.dataset.column_order = ds.column_order;
    out.dataset.provenance = ds.provenance;
    std::set<std::string> matched;
    for (const auto& r : ds.records) {
        auto it = by_doi.find(r.doi);
        if (it == by_doi.end()) {
            out.dropped_dois.push_back(r.doi);
            continue;
        }
        matched.insert(r.doi);
        ArticleRecord joined = r;
        if (it->second.first) joined.citations_2017 = it->second.first;
        if (it->second.second) joined.citations_2020 = it->second.second;
        out.dataset.records.push_back(std::move(joined));
    }
    for (const auto& [doi, counts] : by_doi)
        if (!matched.count(doi)) out.unmatched_citation_dois.push_back(doi);
    if (out.dataset.records.empty())
        fail(Errc::no_overlap, "no dataset DOI matches any citation row");
    return out;
}

// ---- descriptive statistics ----

struct FeatureStats {
    std::string name;
    double mean = 0, std = 0, min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0;
};

struct DescriptiveStats {
    std::vector<FeatureStats> features;
    bool std_is_sample = true; // sample standard deviation (n-1 denominator)
    std::string quantile_convention = "linear interpolation between closest ranks";

    const FeatureStats& at(const std::string& name) const {
        for (const auto& f : features)
            if (f.name == name) return f;
        fail(Errc::unknown_feature, name);
    }
};

inline DescriptiveStats describe(const Dataset& ds) {
    if (ds.records.empty()) fail(Errc::empty_data, "describe requires at least one record");
    DescriptiveStats out;
    for (const auto& name : ds.numeric_columns()) {
        auto v = ds.column(name);
        std::sort(v.begin(), v.end());
        FeatureStats s;
        s.name = name;
        s.mean = mean_of(v);
        s.std = sample_std(v);
        s.min = v.front();
        s.q25 = quantile_sorted(v, 0.25);
        s.q50 = quantile_sorted(v, 0.50);
        s.q75 = quantile_sorted(v, 0.75);
        s.max = v.back();
        out.features.push_back(std::move(s));
    }
    return out;
}

// ---- normalized output ----

inline std::vector<std::string> dataset_header(const Dataset& ds) {
    std::vector<std::string> h{"doi"};
    for (const auto& c : ds.column_order) h.push_back(c);
    bool c17 = ds.has_citations(2017), c20 = ds.has_citations(2020);
    if (c17) h.emplace_back(schema::kCitations2017);
    if (c20) h.emplace_back(schema::kCitations2020);
    bool disc = !ds.records.empty() &&
                std::all_of(ds.records.begin(), ds.records.end(),
                            [](const ArticleRecord& r) { return r.discipline.has_value(); });
    if (disc) h.emplace_back(schema::kDiscipline);
    return h;
}

inline void write_dataset_csv(const Dataset& ds, const std::string& path) {
    auto header = dataset_header(ds);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ds.records.size());
    for (const auto& r : ds.records) {
        std::vector<std::string> cells;
        for (const auto& h : header) {
            if (h == "doi")
                cells.push_back(r.doi);
            else if (h == schema::kCitations2017)
                cells.push_back(std::to_string(*r.citations_2017));
            else if (h == schema::kCitations2020)
                cells.push_back(std::to_string(*r.citations_2020));
            else if (h == schema::kDiscipline)
                cells.push_back(*r.discipline);
            else if (schema::is_categorical(h))
                cells.push_back(categorical_field(r, h));
            else
                cells.push_back(std::to_string(numeric_field(r, h)));
        }
        rows.push_back(std::move(cells));
    }
    csv::write_file(path, header, rows);
}

} // namespace altcite
