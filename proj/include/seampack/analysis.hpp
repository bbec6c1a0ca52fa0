#pragma once

// Closed-form estimates of how much of a corpus goes through the sliding
// window, strategy comparison reports, synthetic corpora shaped like known
// length distributions, and the FFD/BFD timing harness.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seampack/binpack.hpp"
#include "seampack/corpus.hpp"
#include "seampack/strategies.hpp"

namespace seampack {

/// Fixed six-decimal rendering with trailing zeros trimmed ("6716.9").
std::string format_decimal(double value);

/// Expected number of documents that qualify for the sliding window when
/// lengths are uniform inside every interval:
///   sum_{k=1}^{K-1} k*r*T_k + sum_{k>=K} T_k,  K = ceil(1/r).
double estimate_nsw(const LengthHistogram& hist, double r_max);

/// Expected token mass of the tails that miss the window and go to the bin
/// packer: sum over k >= 1 with k*r < 1 of (1-k*r)*T_k * (1-k*r)*seq_len/2.
double estimate_short_tokens(const LengthHistogram& hist, double r_max, std::size_t seq_len);

struct EstimateReport {
    double n_sw_estimate = 0.0;
    double short_token_estimate = 0.0;
    double r_max = 0.0;
    std::size_t seq_len = 0;
    std::uint64_t documents = 0;            // all intervals
    std::uint64_t multi_sequence_docs = 0;  // intervals k >= 1
    std::uint64_t sub_sequence_docs = 0;    // interval 0, sent whole to stage two
    double sub_sequence_token_estimate = 0.0;
};

EstimateReport estimate(const LengthHistogram& hist, double r_max);
nlohmann::json to_json(const EstimateReport& report);
std::string format_estimate(const EstimateReport& report);

struct SweepRow {
    double r_max = 0.0;
    double n_sw = 0.0;
    double short_tokens = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    bool nsw_non_decreasing = true;
    bool short_tokens_non_increasing = true;
};

/// r_values must be ascending and inside (0, 1].
SweepTable sweep_rmax(const LengthHistogram& hist, std::span<const double> r_values, std::size_t seq_len);
std::string format_sweep(const SweepTable& table);
std::string format_sweep_csv(const SweepTable& table);
nlohmann::json to_json(const SweepTable& table);

struct ComparisonRow {
    PackingConfig config;
    PackingStats stats;
    double padding_ratio = 0.0;     // padded / input
    double dropped_ratio = 0.0;     // dropped / input
    double repetition_ratio = 0.0;  // repeated / input
    double utilization = 0.0;       // non-pad tokens / output tokens
};

/// Runs every config on the same documents (concurrently); rows keep config order.
std::vector<ComparisonRow> compare_strategies(std::span<const Document> docs, std::span<const PackingConfig> configs);
std::string format_comparison(std::span<const ComparisonRow> rows);
nlohmann::json to_json(std::span<const ComparisonRow> rows, const CorpusFingerprint& corpus);

struct BenchWorkload {
    std::string label;
    std::vector<Item> items;
    std::size_t capacity = 0;
};

struct BenchRow {
    std::string label;
    std::size_t items = 0;
    std::size_t capacity = 0;
    double ffd_seconds = 0.0;  // median
    double bfd_seconds = 0.0;  // median
    double ratio = 0.0;        // bfd / ffd
    std::size_t ffd_bins = 0;
    std::size_t bfd_bins = 0;
};

/// Median wall time of ffd_pack and bfd_pack per workload. repetitions >= 3.
std::vector<BenchRow> bench_packers(std::span<const BenchWorkload> workloads, std::size_t repetitions);
std::vector<BenchRow> bench_packers(std::span<const std::vector<Item>> item_sets, std::size_t capacity,
                                    std::size_t repetitions);
std::string format_bench(std::span<const BenchRow> rows);
nlohmann::json to_json(std::span<const BenchRow> rows);

/// Length profiles of the reference corpora. Intervals are multiples of the
/// profile's seq_len; the open-ended top bucket is folded into its first interval.
LengthHistogram pubmed_length_profile();     // seq_len 2048
LengthHistogram bbc_length_profile();        // seq_len 512
LengthHistogram financial_length_profile();  // seq_len 512

/// Named profile: "pubmed", "bbc" or "financial". Throws ConfigError otherwise.
LengthHistogram length_profile(std::string_view name);

/// Per-interval counts scaled to `documents` (largest remainder); 0 keeps the
/// profile's own counts.
LengthHistogram scale_counts(const LengthHistogram& shape, std::size_t documents);

/// Documents whose lengths are uniform inside each interval of `shape`,
/// interval counts proportional to the shape, shuffled into a random order.
std::vector<Document> synthesize_corpus(const LengthHistogram& shape, std::size_t documents, std::uint64_t seed);

/// Stage-two items (tails that miss the sliding window) of a synthetic
/// corpus; the workload the bin packer sees inside seamless packing.
BenchWorkload stage_two_workload(std::string label, std::span<const Document> docs, const PackingConfig& config);

}  // namespace seampack
