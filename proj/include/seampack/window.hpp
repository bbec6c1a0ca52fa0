#pragma once

// Stage one of seamless packing: documents long enough to be stretched over
// n+1 sequences with a bounded overlap are emitted as overlapping windows;
// everything else is cut into full sequences plus a short tail that is
// deferred to the bin packer.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seampack/corpus.hpp"

namespace seampack {

/// Half-open token span [start, end) of document `doc` (index into the corpus).
struct Chunk {
    std::size_t doc = 0;
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - start; }
    bool operator==(const Chunk&) const = default;
};

struct WindowPlan {
    std::size_t n = 0;            // floor(length / seq_len)
    bool eligible = false;
    std::size_t deficit = 0;      // (n+1)*seq_len - length when eligible
    std::vector<std::size_t> overlaps;  // one per boundary between consecutive windows

    /// Start offsets of the n+1 windows (empty if not eligible).
    std::vector<std::size_t> window_starts(std::size_t seq_len) const;
};

struct Eligibility {
    bool eligible = false;
    std::size_t n = 0;
};

/// ceil(n * r_max * seq_len): the overlap budget for a document spanning n full sequences.
std::size_t max_overlap(std::size_t n, double r_max, std::size_t seq_len);

/// ceil(deficit / n): the largest per-boundary overlap.
std::size_t final_overlap(std::size_t length, std::size_t seq_len);

Eligibility is_eligible(std::size_t length, std::size_t seq_len, double r_max);

/// Splits the deficit over the n boundaries as evenly as possible, larger
/// shares first, so the last window ends exactly at `length`.
WindowPlan plan_windows(std::size_t length, std::size_t seq_len, double r_max);

struct StageOneOutput {
    std::vector<PackedSequence> sequences;
    std::vector<Chunk> leftovers;          // every chunk shorter than seq_len
    std::uint64_t repeated_tokens = 0;
    std::uint64_t sliding_window_docs = 0;
    std::uint64_t overlap_budget = 0;      // sum of max_overlap over windowed documents
};

/// Appends doc[chunk] to seq as one segment.
void append_chunk(PackedSequence& seq, const Document& doc, std::size_t start, std::size_t end);

StageOneOutput emit_stage_one(std::span<const Document> docs, const PackingConfig& config);

}  // namespace seampack
