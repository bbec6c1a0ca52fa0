#include "seampack/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "numeric_util.hpp"

namespace seampack {

namespace {

using Clock = std::chrono::steady_clock;

void check_r(double r) {
    if (!(r > 0.0 && r <= 1.0)) {
        std::ostringstream os;
        os << "r_max must lie in (0, 1] (got " << r << ")";
        throw ConfigError(os.str());
    }
}

// ceil(1/r): the first interval whose documents all qualify.
std::size_t full_eligibility_interval(double r) {
    return static_cast<std::size_t>(detail::snapped_ceil(1.0 / r));
}

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

LengthHistogram make_profile(std::size_t seq_len, std::initializer_list<std::uint64_t> counts_from_k1) {
    LengthHistogram h{seq_len, {}};
    std::size_t k = 1;
    for (auto c : counts_from_k1) h.counts[k++] = c;
    return h;
}

}  // namespace

std::string format_decimal(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    return s == "-0" ? "0" : s;
}

double estimate_nsw(const LengthHistogram& hist, double r_max) {
    check_r(r_max);
    const std::size_t K = full_eligibility_interval(r_max);
    double n = 0.0;
    for (const auto& [k, t] : hist.counts) {
        if (k == 0) continue;
        const double share = k < K ? std::min(1.0, static_cast<double>(k) * r_max) : 1.0;
        n += share * static_cast<double>(t);
    }
    return n;
}

double estimate_short_tokens(const LengthHistogram& hist, double r_max, std::size_t seq_len) {
    check_r(r_max);
    const std::size_t K = full_eligibility_interval(r_max);
    double tokens = 0.0;
    for (const auto& [k, t] : hist.counts) {
        if (k == 0 || k >= K) continue;
        const double miss = 1.0 - static_cast<double>(k) * r_max;
        if (miss <= 0.0) continue;
        tokens += miss * static_cast<double>(t) * (miss * static_cast<double>(seq_len) / 2.0);
    }
    return tokens;
}

EstimateReport estimate(const LengthHistogram& hist, double r_max) {
    EstimateReport r;
    r.r_max = r_max;
    r.seq_len = hist.seq_len;
    r.n_sw_estimate = estimate_nsw(hist, r_max);
    r.short_token_estimate = estimate_short_tokens(hist, r_max, hist.seq_len);
    r.documents = hist.total();
    r.sub_sequence_docs = hist.count(0);
    r.multi_sequence_docs = r.documents - r.sub_sequence_docs;
    r.sub_sequence_token_estimate = static_cast<double>(r.sub_sequence_docs) * static_cast<double>(hist.seq_len) / 2.0;
    return r;
}

nlohmann::json to_json(const EstimateReport& r) {
    return {
        {"n_sw_estimate", r.n_sw_estimate},
        {"short_token_estimate", r.short_token_estimate},
        {"r_max", r.r_max},
        {"seq_len", r.seq_len},
        {"histogram", {{"documents", r.documents},
                       {"multi_sequence_docs", r.multi_sequence_docs},
                       {"sub_sequence_docs", r.sub_sequence_docs}}},
        {"sub_sequence_token_estimate", r.sub_sequence_token_estimate},
    };
}

std::string format_estimate(const EstimateReport& r) {
    std::ostringstream os;
    os << "seq_len                      " << r.seq_len << '\n'
       << "r_max                        " << format_decimal(r.r_max) << '\n'
       << "documents                    " << r.documents << " (" << r.multi_sequence_docs
       << " spanning >= 1 sequence)\n"
       << "n_sw_estimate                " << format_decimal(r.n_sw_estimate) << '\n'
       << "short_token_estimate         " << format_decimal(r.short_token_estimate) << '\n'
       << "sub_sequence_docs            " << r.sub_sequence_docs << '\n'
       << "sub_sequence_token_estimate  " << format_decimal(r.sub_sequence_token_estimate) << '\n';
    return os.str();
}

SweepTable sweep_rmax(const LengthHistogram& hist, std::span<const double> r_values, std::size_t seq_len) {
    SweepTable table;
    for (std::size_t i = 0; i < r_values.size(); ++i) {
        check_r(r_values[i]);
        if (i > 0 && r_values[i] < r_values[i - 1]) {
            throw ConfigError("sweep r values must be sorted ascending");
        }
        table.rows.push_back({r_values[i], estimate_nsw(hist, r_values[i]),
                              estimate_short_tokens(hist, r_values[i], seq_len)});
    }
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        table.nsw_non_decreasing = table.nsw_non_decreasing && table.rows[i].n_sw >= table.rows[i - 1].n_sw;
        table.short_tokens_non_increasing =
            table.short_tokens_non_increasing && table.rows[i].short_tokens <= table.rows[i - 1].short_tokens;
    }
    return table;
}

std::string format_sweep(const SweepTable& t) {
    std::ostringstream os;
    os << std::left << std::setw(8) << "r_max" << std::right << std::setw(16) << "n_sw" << std::setw(20)
       << "short_tokens" << '\n';
    for (const auto& row : t.rows) {
        os << std::left << std::setw(8) << format_decimal(row.r_max) << std::right << std::setw(16)
           << format_decimal(row.n_sw) << std::setw(20) << format_decimal(row.short_tokens) << '\n';
    }
    os << "monotone: n_sw " << (t.nsw_non_decreasing ? "yes" : "NO") << ", short_tokens "
       << (t.short_tokens_non_increasing ? "yes" : "NO") << '\n';
    return os.str();
}

std::string format_sweep_csv(const SweepTable& t) {
    std::ostringstream os;
    os << "r_max,n_sw,short_tokens\n";
    for (const auto& row : t.rows) {
        os << format_decimal(row.r_max) << ',' << format_decimal(row.n_sw) << ',' << format_decimal(row.short_tokens)
           << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const SweepTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        rows.push_back({{"r_max", row.r_max}, {"n_sw", row.n_sw}, {"short_tokens", row.short_tokens}});
    }
    return {{"rows", rows},
            {"nsw_non_decreasing", t.nsw_non_decreasing},
            {"short_tokens_non_increasing", t.short_tokens_non_increasing}};
}

std::vector<ComparisonRow> compare_strategies(std::span<const Document> docs, std::span<const PackingConfig> configs) {
    for (const auto& c : configs) {
        c.validate();
        if (c.seq_len != configs.front().seq_len) {
            throw ConfigError("all compared configurations must share one seq_len");
        }
    }
    std::vector<std::future<PackingStats>> jobs;
    jobs.reserve(configs.size());
    for (const auto& c : configs) {
        jobs.push_back(std::async(std::launch::async, [docs, c] { return pack(docs, c).stats; }));
    }
    std::vector<ComparisonRow> rows;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        ComparisonRow row;
        row.config = configs[i];
        row.stats = jobs[i].get();
        const auto& s = row.stats;
        row.padding_ratio = ratio(s.padded_tokens, s.input_tokens);
        row.dropped_ratio = ratio(s.dropped_tokens, s.input_tokens);
        row.repetition_ratio = ratio(s.repeated_tokens, s.input_tokens);
        row.utilization = ratio(s.output_tokens - s.padded_tokens, s.output_tokens);
        rows.push_back(row);
    }
    return rows;
}

std::string format_comparison(std::span<const ComparisonRow> rows) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "strat" << std::right << std::setw(11) << "sequences" << std::setw(13)
       << "input" << std::setw(11) << "repeated" << std::setw(10) << "dropped" << std::setw(10) << "padded"
       << std::setw(12) << "truncations" << std::setw(8) << "n_sw" << std::setw(10) << "pad/in" << std::setw(10)
       << "drop/in" << std::setw(10) << "rep/in" << std::setw(8) << "util" << '\n';
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f%%", 100.0 * v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        const auto& s = r.stats;
        os << std::left << std::setw(6) << to_string(r.config.strategy) << std::right << std::setw(11)
           << s.sequences_emitted << std::setw(13) << s.input_tokens << std::setw(11) << s.repeated_tokens
           << std::setw(10) << s.dropped_tokens << std::setw(10) << s.padded_tokens << std::setw(12)
           << s.truncation_events << std::setw(8) << s.n_sw_docs << std::setw(10) << pct(r.padding_ratio)
           << std::setw(10) << pct(r.dropped_ratio) << std::setw(10) << pct(r.repetition_ratio) << std::setw(8)
           << std::fixed << std::setprecision(4) << r.utilization << std::defaultfloat << '\n';
    }
    return os.str();
}

nlohmann::json to_json(std::span<const ComparisonRow> rows, const CorpusFingerprint& corpus) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        auto j = stats_report(r.stats, r.config, corpus);
        j["padding_ratio"] = r.padding_ratio;
        j["dropped_ratio"] = r.dropped_ratio;
        j["repetition_ratio"] = r.repetition_ratio;
        j["utilization"] = r.utilization;
        out.push_back(std::move(j));
    }
    return {{"corpus", {{"documents", corpus.documents}, {"tokens", corpus.tokens}}}, {"rows", out}};
}

std::vector<BenchRow> bench_packers(std::span<const BenchWorkload> workloads, std::size_t repetitions) {
    if (repetitions < 3) throw ConfigError("bench needs at least 3 repetitions");
    std::vector<BenchRow> rows;
    for (const auto& w : workloads) {
        BenchRow row{w.label, w.items.size(), w.capacity, 0, 0, 0, 0, 0};
        std::vector<double> ffd, bfd;
        for (std::size_t i = 0; i < repetitions; ++i) {
            auto t0 = Clock::now();
            row.ffd_bins = ffd_pack(w.items, w.capacity).size();
            ffd.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
            t0 = Clock::now();
            row.bfd_bins = bfd_pack(w.items, w.capacity).size();
            bfd.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
        }
        row.ffd_seconds = median(ffd);
        row.bfd_seconds = median(bfd);
        row.ratio = row.ffd_seconds > 0 ? row.bfd_seconds / row.ffd_seconds : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<BenchRow> bench_packers(std::span<const std::vector<Item>> item_sets, std::size_t capacity,
                                    std::size_t repetitions) {
    std::vector<BenchWorkload> w;
    for (std::size_t i = 0; i < item_sets.size(); ++i) w.push_back({"set" + std::to_string(i), item_sets[i], capacity});
    return bench_packers(w, repetitions);
}

std::string format_bench(std::span<const BenchRow> rows) {
    std::ostringstream os;
    os << std::left << std::setw(14) << "workload" << std::right << std::setw(9) << "items" << std::setw(7) << "cap"
       << std::setw(12) << "ffd_s" << std::setw(12) << "bfd_s" << std::setw(10) << "bfd/ffd" << std::setw(10)
       << "ffd_bins" << std::setw(10) << "bfd_bins" << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(14) << r.label << std::right << std::setw(9) << r.items << std::setw(7)
           << r.capacity << std::fixed << std::setprecision(6) << std::setw(12) << r.ffd_seconds << std::setw(12)
           << r.bfd_seconds << std::setprecision(3) << std::setw(10) << r.ratio << std::defaultfloat << std::setw(10)
           << r.ffd_bins << std::setw(10) << r.bfd_bins << '\n';
    }
    return os.str();
}

nlohmann::json to_json(std::span<const BenchRow> rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        out.push_back({{"label", r.label},
                       {"items", r.items},
                       {"capacity", r.capacity},
                       {"ffd_seconds", r.ffd_seconds},
                       {"bfd_seconds", r.bfd_seconds},
                       {"bfd_over_ffd", r.ratio},
                       {"ffd_bins", r.ffd_bins},
                       {"bfd_bins", r.bfd_bins}});
    }
    return out;
}

LengthHistogram pubmed_length_profile() {
    return make_profile(2048, {3906, 4095, 1789, 763, 355, 150, 73, 47, 90});
}

LengthHistogram bbc_length_profile() {
    return make_profile(512, {3533, 6556, 1323, 330, 97, 49, 27, 22, 29});
}

LengthHistogram financial_length_profile() {
    return make_profile(512, {7790, 4161, 1012, 397, 274, 234, 212, 195, 1252});
}

LengthHistogram length_profile(std::string_view name) {
    if (name == "pubmed") return pubmed_length_profile();
    if (name == "bbc") return bbc_length_profile();
    if (name == "financial") return financial_length_profile();
    throw ConfigError("unknown length profile \"" + std::string(name) + "\" (expected pubmed, bbc or financial)");
}

LengthHistogram scale_counts(const LengthHistogram& shape, std::size_t documents) {
    if (documents == 0) return shape;
    const auto total = shape.total();
    LengthHistogram out{shape.seq_len, {}};
    if (total == 0) return out;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::uint64_t assigned = 0;
    for (const auto& [k, t] : shape.counts) {
        const double exact = static_cast<double>(t) * static_cast<double>(documents) / static_cast<double>(total);
        const auto whole = static_cast<std::uint64_t>(std::floor(exact));
        out.counts[k] = whole;
        assigned += whole;
        remainders.emplace_back(exact - static_cast<double>(whole), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < documents; ++i, ++assigned) ++out.counts[remainders[i % remainders.size()].second];
    std::erase_if(out.counts, [](const auto& kv) { return kv.second == 0; });
    return out;
}

std::vector<Document> synthesize_corpus(const LengthHistogram& shape, std::size_t documents, std::uint64_t seed) {
    const auto scaled = scale_counts(shape, documents);
    const std::size_t L = shape.seq_len;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> lengths;
    for (const auto& [k, t] : scaled.counts) {
        std::uniform_int_distribution<std::size_t> dist(k * L + 1, (k + 1) * L);
        for (std::uint64_t i = 0; i < t; ++i) lengths.push_back(dist(rng));
    }
    std::shuffle(lengths.begin(), lengths.end(), rng);

    std::vector<Document> docs(lengths.size());
    for (std::size_t d = 0; d < lengths.size(); ++d) {
        docs[d].id = "doc" + std::to_string(d);
        docs[d].tokens.resize(lengths[d]);
        const std::uint64_t base = splitmix64(seed ^ (d * 0x100000001B3ULL));
        for (std::size_t p = 0; p < lengths[d]; ++p) {
            docs[d].tokens[p] = static_cast<Token>((base + p * 2654435761ULL) % 50257);
        }
    }
    return docs;
}

BenchWorkload stage_two_workload(std::string label, std::span<const Document> docs, const PackingConfig& config) {
    auto s1 = emit_stage_one(docs, config);
    BenchWorkload w{std::move(label), {}, config.seq_len + config.c_extra};
    w.items.reserve(s1.leftovers.size());
    for (std::size_t i = 0; i < s1.leftovers.size(); ++i) w.items.push_back({i, s1.leftovers[i].size(), s1.leftovers[i]});
    return w;
}

}  // namespace seampack
