#pragma once

// End-to-end packers. Each returns its sequences together with a token
// ledger that balances exactly:
//   input + repeated + separator - dropped + padded == sequences * seq_len

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "seampack/binpack.hpp"
#include "seampack/corpus.hpp"
#include "seampack/window.hpp"

namespace seampack {

struct PackingStats {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    std::uint64_t repeated_tokens = 0;
    std::uint64_t dropped_tokens = 0;          // bin overflow + stream residue
    std::uint64_t residue_dropped_tokens = 0;  // part of dropped_tokens cut from the final partial piece
    std::uint64_t padded_tokens = 0;
    std::uint64_t separator_tokens = 0;
    std::uint64_t truncation_events = 0;
    std::uint64_t n_sw_docs = 0;
    std::uint64_t overlap_budget = 0;  // sum of the overlap bound over windowed documents
    std::uint64_t stage2_items = 0;
    std::uint64_t stage2_tokens = 0;
    std::uint64_t max_bin_drop = 0;
    std::uint64_t sequences_emitted = 0;
    std::chrono::duration<double> elapsed{0};

    bool conserves(std::size_t seq_len) const noexcept;
};

struct PackResult {
    std::vector<PackedSequence> sequences;
    PackingStats stats;
};

enum class BinEngine { ffd, bfd };

/// Packs short chunks into bins of seq_len + c_extra and finalizes them:
/// full bins keep their first seq_len tokens and drop the rest; contents of
/// under-full bins are concatenated and re-split into seq_len pieces.
struct StageTwoOutput {
    std::vector<PackedSequence> sequences;
    std::vector<std::size_t> bin_drops;  // overflow dropped per finalized bin
    std::uint64_t dropped_tokens = 0;
    std::uint64_t residue_dropped_tokens = 0;
    std::uint64_t padded_tokens = 0;
};

StageTwoOutput pack_with_dropping(std::span<const Document> docs, std::vector<Chunk> chunks,
                                  const PackingConfig& config, BinEngine engine);

PackResult pack_sp(std::span<const Document> docs, const PackingConfig& config);
PackResult pack_ct(std::span<const Document> docs, const PackingConfig& config);
PackResult pack_ffd_baseline(std::span<const Document> docs, const PackingConfig& config);
PackResult pack_bfd_baseline(std::span<const Document> docs, const PackingConfig& config);
PackResult pack_bfdm(std::span<const Document> docs, const PackingConfig& config);

/// Dispatches on config.strategy.
PackResult pack(std::span<const Document> docs, const PackingConfig& config);

/// Left-to-right pieces of at most seq_len tokens for every document.
std::vector<Chunk> split_documents(std::span<const Document> docs, std::size_t seq_len);

/// Counts cuts at position p inside a document (0 < p < length) where the
/// emitted text stops at p and no other emitted segment spans p-1..p.
std::uint64_t count_truncation_events(std::span<const PackedSequence> seqs, std::span<const Document> docs);

nlohmann::json config_to_json(const PackingConfig& config);
nlohmann::json stats_to_json(const PackingStats& stats);
nlohmann::json stats_report(const PackingStats& stats, const PackingConfig& config, const CorpusFingerprint& corpus);

}  // namespace seampack
