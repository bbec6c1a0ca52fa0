#include "seampack/strategies.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

namespace seampack {

namespace {

using Clock = std::chrono::steady_clock;

/// Accumulates chunks into seq_len-sized sequences, cutting chunks at
/// sequence boundaries.
class SequenceStream {
public:
    SequenceStream(std::span<const Document> docs, const PackingConfig& config, std::vector<PackedSequence>& out)
        : docs_(docs), config_(config), out_(out) {
        current_.tokens.reserve(config.seq_len);
    }

    void push(const Chunk& c) {
        const Document& doc = docs_[c.doc];
        std::size_t pos = c.start;
        while (pos < c.end) {
            const std::size_t take = std::min(c.end - pos, config_.seq_len - current_.tokens.size());
            append_chunk(current_, doc, pos, pos + take);
            pos += take;
            flush_if_full();
        }
    }

    void push_separator(Token t) {
        current_.tokens.push_back(t);
        current_.segments.push_back({"", 0, 1});
        flush_if_full();
    }

    struct Residue {
        std::uint64_t dropped = 0;
        std::uint64_t padded = 0;
    };

    Residue finish() {
        Residue r;
        if (current_.tokens.empty()) return r;
        if (config_.tail_policy == TailPolicy::pad) {
            r.padded = config_.seq_len - current_.tokens.size();
            current_.pad_count = r.padded;
            current_.tokens.resize(config_.seq_len, config_.pad_token);
            out_.push_back(std::move(current_));
        } else {
            r.dropped = current_.tokens.size();
        }
        current_ = PackedSequence{};
        return r;
    }

private:
    void flush_if_full() {
        if (current_.tokens.size() < config_.seq_len) return;
        out_.push_back(std::move(current_));
        current_ = PackedSequence{};
        current_.tokens.reserve(config_.seq_len);
    }

    std::span<const Document> docs_;
    const PackingConfig& config_;
    std::vector<PackedSequence>& out_;
    PackedSequence current_;
};

std::vector<Item> to_items(std::vector<Chunk> chunks) {
    std::vector<Item> items;
    items.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) items.push_back({i, chunks[i].size(), chunks[i]});
    return items;
}

std::vector<Bin> run_engine(BinEngine engine, std::vector<Item> items, std::size_t capacity) {
    return engine == BinEngine::ffd ? ffd_pack(std::move(items), capacity) : bfd_pack(std::move(items), capacity);
}

std::uint64_t chunk_tokens(std::span<const Chunk> chunks) {
    std::uint64_t n = 0;
    for (const auto& c : chunks) n += c.size();
    return n;
}

void finish_stats(PackResult& r, std::span<const Document> docs, const PackingConfig& config, Clock::time_point t0) {
    auto& s = r.stats;
    s.input_tokens = fingerprint(docs).tokens;
    s.sequences_emitted = r.sequences.size();
    s.output_tokens = s.sequences_emitted * config.seq_len;
    s.truncation_events = count_truncation_events(r.sequences, docs);
    s.elapsed = Clock::now() - t0;
}

/// Every bin becomes one sequence, padded up to seq_len.
PackResult pack_padded_bins(std::span<const Document> docs, const PackingConfig& config, BinEngine engine) {
    const auto t0 = Clock::now();
    config.validate();
    PackResult r;
    auto chunks = split_documents(docs, config.seq_len);
    r.stats.stage2_items = chunks.size();
    r.stats.stage2_tokens = chunk_tokens(chunks);
    auto bins = run_engine(engine, to_items(std::move(chunks)), config.seq_len);
    r.sequences.reserve(bins.size());
    for (const auto& b : bins) {
        PackedSequence seq;
        seq.tokens.reserve(config.seq_len);
        for (const auto& it : b.items) append_chunk(seq, docs[it.payload.doc], it.payload.start, it.payload.end);
        seq.pad_count = config.seq_len - seq.tokens.size();
        seq.tokens.resize(config.seq_len, config.pad_token);
        r.stats.padded_tokens += seq.pad_count;
        r.sequences.push_back(std::move(seq));
    }
    finish_stats(r, docs, config, t0);
    return r;
}

}  // namespace

bool PackingStats::conserves(std::size_t seq_len) const noexcept {
    return output_tokens == sequences_emitted * seq_len &&
           input_tokens + repeated_tokens + separator_tokens + padded_tokens == output_tokens + dropped_tokens;
}

std::vector<Chunk> split_documents(std::span<const Document> docs, std::size_t seq_len) {
    std::vector<Chunk> out;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const std::size_t len = docs[d].size();
        for (std::size_t s = 0; s < len; s += seq_len) out.push_back({d, s, std::min(len, s + seq_len)});
    }
    return out;
}

StageTwoOutput pack_with_dropping(std::span<const Document> docs, std::vector<Chunk> chunks,
                                  const PackingConfig& config, BinEngine engine) {
    const std::size_t L = config.seq_len;
    StageTwoOutput out;
    auto bins = run_engine(engine, to_items(std::move(chunks)), L + config.c_extra);

    std::vector<const Bin*> underfull;
    for (const auto& b : bins) {
        if (b.fill < L) {
            underfull.push_back(&b);
            continue;
        }
        PackedSequence seq;
        seq.tokens.reserve(L);
        for (const auto& it : b.items) {
            const std::size_t take = std::min(it.size, L - seq.tokens.size());
            if (take == 0) break;
            append_chunk(seq, docs[it.payload.doc], it.payload.start, it.payload.start + take);
        }
        out.bin_drops.push_back(b.fill - L);
        out.dropped_tokens += b.fill - L;
        out.sequences.push_back(std::move(seq));
    }

    SequenceStream stream(docs, config, out.sequences);
    for (const Bin* b : underfull) {
        for (const auto& it : b->items) stream.push(it.payload);
    }
    const auto residue = stream.finish();
    out.dropped_tokens += residue.dropped;
    out.residue_dropped_tokens = residue.dropped;
    out.padded_tokens = residue.padded;
    return out;
}

PackResult pack_sp(std::span<const Document> docs, const PackingConfig& config) {
    const auto t0 = Clock::now();
    config.validate();
    PackResult r;
    auto s1 = emit_stage_one(docs, config);
    r.stats.repeated_tokens = s1.repeated_tokens;
    r.stats.n_sw_docs = s1.sliding_window_docs;
    r.stats.overlap_budget = s1.overlap_budget;
    r.stats.stage2_items = s1.leftovers.size();
    r.stats.stage2_tokens = chunk_tokens(s1.leftovers);

    auto s2 = pack_with_dropping(docs, std::move(s1.leftovers), config, BinEngine::ffd);
    r.sequences = std::move(s1.sequences);
    r.sequences.insert(r.sequences.end(), std::make_move_iterator(s2.sequences.begin()),
                       std::make_move_iterator(s2.sequences.end()));
    r.stats.dropped_tokens = s2.dropped_tokens;
    r.stats.residue_dropped_tokens = s2.residue_dropped_tokens;
    r.stats.padded_tokens = s2.padded_tokens;
    if (!s2.bin_drops.empty()) r.stats.max_bin_drop = *std::max_element(s2.bin_drops.begin(), s2.bin_drops.end());
    finish_stats(r, docs, config, t0);
    return r;
}

PackResult pack_ct(std::span<const Document> docs, const PackingConfig& config) {
    const auto t0 = Clock::now();
    config.validate();
    PackResult r;
    SequenceStream stream(docs, config, r.sequences);
    bool first = true;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (docs[d].tokens.empty()) continue;
        if (!first && config.separator_token) {
            stream.push_separator(*config.separator_token);
            ++r.stats.separator_tokens;
        }
        first = false;
        stream.push({d, 0, docs[d].size()});
    }
    const auto residue = stream.finish();
    r.stats.dropped_tokens = residue.dropped;
    r.stats.residue_dropped_tokens = residue.dropped;
    r.stats.padded_tokens = residue.padded;
    finish_stats(r, docs, config, t0);
    return r;
}

PackResult pack_ffd_baseline(std::span<const Document> docs, const PackingConfig& config) {
    return pack_padded_bins(docs, config, BinEngine::ffd);
}

PackResult pack_bfd_baseline(std::span<const Document> docs, const PackingConfig& config) {
    return pack_padded_bins(docs, config, BinEngine::bfd);
}

PackResult pack_bfdm(std::span<const Document> docs, const PackingConfig& config) {
    const auto t0 = Clock::now();
    config.validate();
    PackResult r;
    auto chunks = split_documents(docs, config.seq_len);
    r.stats.stage2_items = chunks.size();
    r.stats.stage2_tokens = chunk_tokens(chunks);
    auto s2 = pack_with_dropping(docs, std::move(chunks), config, BinEngine::bfd);
    r.sequences = std::move(s2.sequences);
    r.stats.dropped_tokens = s2.dropped_tokens;
    r.stats.residue_dropped_tokens = s2.residue_dropped_tokens;
    r.stats.padded_tokens = s2.padded_tokens;
    if (!s2.bin_drops.empty()) r.stats.max_bin_drop = *std::max_element(s2.bin_drops.begin(), s2.bin_drops.end());
    finish_stats(r, docs, config, t0);
    return r;
}

PackResult pack(std::span<const Document> docs, const PackingConfig& config) {
    switch (config.strategy) {
        case Strategy::sp: return pack_sp(docs, config);
        case Strategy::ct: return pack_ct(docs, config);
        case Strategy::ffd: return pack_ffd_baseline(docs, config);
        case Strategy::bfd: return pack_bfd_baseline(docs, config);
        case Strategy::bfd_m: return pack_bfdm(docs, config);
    }
    throw ConfigError("unknown strategy");
}

std::uint64_t count_truncation_events(std::span<const PackedSequence> seqs, std::span<const Document> docs) {
    std::unordered_map<std::string_view, std::size_t> length_of;
    length_of.reserve(docs.size());
    for (const auto& d : docs) length_of.emplace(d.id, d.size());

    std::unordered_map<std::string_view, std::vector<std::pair<std::size_t, std::size_t>>> spans;
    for (const auto& seq : seqs) {
        for (const auto& s : seq.segments) {
            if (!s.doc_id.empty()) spans[s.doc_id].emplace_back(s.start, s.end);
        }
    }
    std::uint64_t events = 0;
    for (auto& [id, list] : spans) {
        const auto len_it = length_of.find(id);
        if (len_it == length_of.end()) continue;
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        for (const auto& [start, end] : list) {
            if (end >= len_it->second) continue;
            // Some other span covering end-1 and end continues the text seamlessly.
            const bool mediated = std::any_of(list.begin(), list.end(), [e = end](const auto& o) {
                return o.first < e && o.second > e;
            });
            if (!mediated) ++events;
        }
    }
    return events;
}

nlohmann::json config_to_json(const PackingConfig& config) {
    nlohmann::json j = {
        {"strategy", to_string(config.strategy)},
        {"seq_len", config.seq_len},
        {"r_max", config.r_max},
        {"c_extra", config.c_extra},
        {"tail_policy", to_string(config.tail_policy)},
        {"pad_token", config.pad_token},
    };
    j["separator_token"] = config.separator_token ? nlohmann::json(*config.separator_token) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json stats_to_json(const PackingStats& s) {
    return {
        {"input_tokens", s.input_tokens},
        {"output_tokens", s.output_tokens},
        {"repeated_tokens", s.repeated_tokens},
        {"dropped_tokens", s.dropped_tokens},
        {"residue_dropped_tokens", s.residue_dropped_tokens},
        {"padded_tokens", s.padded_tokens},
        {"separator_tokens", s.separator_tokens},
        {"truncation_events", s.truncation_events},
        {"n_sw_docs", s.n_sw_docs},
        {"overlap_budget", s.overlap_budget},
        {"stage2_items", s.stage2_items},
        {"stage2_tokens", s.stage2_tokens},
        {"max_bin_drop", s.max_bin_drop},
        {"sequences_emitted", s.sequences_emitted},
        {"elapsed", s.elapsed.count()},
    };
}

nlohmann::json stats_report(const PackingStats& stats, const PackingConfig& config, const CorpusFingerprint& corpus) {
    auto j = stats_to_json(stats);
    j["config"] = config_to_json(config);
    j["corpus"] = {{"documents", corpus.documents}, {"tokens", corpus.tokens}};
    j["conserved"] = stats.conserves(config.seq_len);
    return j;
}

}  // namespace seampack
