#include "seampack/window.hpp"

#include <cmath>

#include "numeric_util.hpp"

namespace seampack {

std::vector<std::size_t> WindowPlan::window_starts(std::size_t seq_len) const {
    std::vector<std::size_t> starts;
    if (!eligible) return starts;
    starts.reserve(n + 1);
    starts.push_back(0);
    for (auto o : overlaps) starts.push_back(starts.back() + seq_len - o);
    return starts;
}

std::size_t max_overlap(std::size_t n, double r_max, std::size_t seq_len) {
    return static_cast<std::size_t>(
        detail::snapped_ceil(static_cast<double>(n) * r_max * static_cast<double>(seq_len)));
}

std::size_t final_overlap(std::size_t length, std::size_t seq_len) {
    const std::size_t n = length / seq_len;
    if (n == 0) return 0;
    const std::size_t deficit = (n + 1) * seq_len - length;
    return (deficit + n - 1) / n;
}

Eligibility is_eligible(std::size_t length, std::size_t seq_len, double r_max) {
    const std::size_t n = length / seq_len;
    if (n == 0 || length % seq_len == 0) return {false, n};
    return {length + max_overlap(n, r_max, seq_len) >= (n + 1) * seq_len, n};
}

WindowPlan plan_windows(std::size_t length, std::size_t seq_len, double r_max) {
    const auto [eligible, n] = is_eligible(length, seq_len, r_max);
    WindowPlan plan{n, eligible, 0, {}};
    if (!eligible) return plan;
    plan.deficit = (n + 1) * seq_len - length;
    const std::size_t q = plan.deficit / n;
    const std::size_t rem = plan.deficit % n;
    plan.overlaps.assign(n, q);
    for (std::size_t i = 0; i < rem; ++i) ++plan.overlaps[i];
    return plan;
}

void append_chunk(PackedSequence& seq, const Document& doc, std::size_t start, std::size_t end) {
    seq.tokens.insert(seq.tokens.end(), doc.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                      doc.tokens.begin() + static_cast<std::ptrdiff_t>(end));
    seq.segments.push_back({doc.id, start, end});
}

StageOneOutput emit_stage_one(std::span<const Document> docs, const PackingConfig& config) {
    config.validate();
    const std::size_t L = config.seq_len;
    StageOneOutput out;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto& doc = docs[d];
        const std::size_t len = doc.size();
        if (len == 0) continue;
        const auto plan = plan_windows(len, L, config.r_max);
        if (plan.eligible) {
            for (auto s : plan.window_starts(L)) {
                PackedSequence seq;
                seq.tokens.reserve(L);
                append_chunk(seq, doc, s, s + L);
                out.sequences.push_back(std::move(seq));
            }
            out.repeated_tokens += plan.deficit;
            out.overlap_budget += max_overlap(plan.n, config.r_max, L);
            ++out.sliding_window_docs;
            continue;
        }
        for (std::size_t i = 0; i < plan.n; ++i) {
            PackedSequence seq;
            seq.tokens.reserve(L);
            append_chunk(seq, doc, i * L, (i + 1) * L);
            out.sequences.push_back(std::move(seq));
        }
        if (len % L != 0) out.leftovers.push_back({d, plan.n * L, len});
    }
    return out;
}

}  // namespace seampack
