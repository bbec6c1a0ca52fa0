// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// gating criterion fails. Tolerances and runtime budgets are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cli.hpp"
#include "seampack/analysis.hpp"
#include "seampack/strategies.hpp"
#include "test_util.hpp"

using namespace seampack;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kNswTolerance = 1e-6;
constexpr double kShortTolerance = 1e-3;
constexpr double kNswExpected = 6716.9;
constexpr double kShortExpected = 2649118.72;
constexpr double kShortHeadline = 2.6e6;    // "2.6M", within 2%
constexpr double kCoherenceTolerance = 0.05;
constexpr double kBbcPadOverDrop = 5.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_seconds;  // 0 = no runtime budget
    bool gating;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// --- independent oracles -------------------------------------------------

// Window budget with r = p/100 in exact integer arithmetic.
std::uint64_t budget_exact(std::uint64_t n, std::uint64_t p, std::uint64_t L) {
    return (n * p * L + 99) / 100;
}

bool eligible_exact(std::uint64_t len, std::uint64_t p, std::uint64_t L) {
    const auto n = len / L;
    return n >= 1 && len % L != 0 && len + budget_exact(n, p, L) >= (n + 1) * L;
}

// Exhaustive optimum over set partitions (restricted-growth assignments).
std::size_t exhaustive_bins(const std::vector<std::size_t>& sizes, std::size_t cap) {
    std::size_t best = sizes.size();
    std::vector<std::size_t> load;
    std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (load.size() >= best) return;
        if (i == sizes.size()) {
            best = load.size();
            return;
        }
        for (std::size_t b = 0; b < load.size(); ++b) {
            if (load[b] + sizes[i] <= cap) {
                load[b] += sizes[i];
                go(i + 1);
                load[b] -= sizes[i];
            }
        }
        load.push_back(sizes[i]);
        go(i + 1);
        load.pop_back();
    };
    if (!sizes.empty()) go(0);
    return sizes.empty() ? 0 : best;
}

// --- criteria ------------------------------------------------------------

Outcome estimator_reproduction() {
    const auto hist = read_histogram(fs::path(SEAMPACK_DATA_DIR) / "pubmed_table10.json");
    if (hist.counts != pubmed_length_profile().counts) return {false, "fixture differs from built-in profile"};
    const double nsw = estimate_nsw(hist, 0.3);
    const double shorts = estimate_short_tokens(hist, 0.3, 2048);
    const bool ok = std::abs(nsw - kNswExpected) <= kNswTolerance && std::floor(nsw) == 6716.0 &&
                    std::abs(shorts - kShortExpected) <= kShortTolerance &&
                    std::abs(shorts - kShortHeadline) <= 0.02 * kShortHeadline;
    return {ok, "n_sw=" + format_decimal(nsw) + " (want 6716.9 +/- 1e-6), short_tokens=" + format_decimal(shorts) +
                    " (want 2649118.72 +/- 1e-3, within 2% of 2.6M)"};
}

Outcome estimator_coherence() {
    const auto docs = synthesize_corpus(pubmed_length_profile(), 5000, 0);
    PackingConfig c;
    c.seq_len = 2048;
    c.c_extra = 50;
    c.r_max = 0.3;
    const auto r = pack_sp(docs, c);
    const double est = estimate_nsw(build_histogram(docs, 2048), 0.3);
    const double observed = static_cast<double>(r.stats.n_sw_docs);
    const double rel = std::abs(observed - est) / est;
    return {rel <= kCoherenceTolerance, fmt("5000 docs: observed n_sw=%.0f, estimate=%.1f, deviation %.2f%% (limit 5%%)",
                                            observed, est, 100 * rel)};
}

Outcome conservation_suite() {
    std::mt19937_64 rng(2024);
    const Strategy all[] = {Strategy::sp, Strategy::ct, Strategy::ffd, Strategy::bfd, Strategy::bfd_m};
    std::size_t runs = 0, failures = 0;
    for (int corpus = 0; corpus < 1000; ++corpus) {
        const std::size_t L = 2 + rng() % 200;
        const auto docs = test::random_corpus(rng, L, 40);
        PackingConfig c;
        c.seq_len = L;
        c.c_extra = rng() % std::max<std::size_t>(1, L / 4);
        c.r_max = static_cast<double>(1 + rng() % 100) / 100.0;
        c.tail_policy = rng() % 2 ? TailPolicy::drop : TailPolicy::pad;
        for (auto s : all) {
            c.strategy = s;
            c.separator_token.reset();
            if (s == Strategy::ct && rng() % 4 == 0) c.separator_token = 50000;
            const auto r = pack(docs, c);
            const auto& st = r.stats;
            const auto f = test::trace_fates(r.sequences, docs, L);
            // input + repeated - dropped + padded (+ separators) = sequences * seq_len
            const bool identity = st.input_tokens + st.repeated_tokens + st.padded_tokens + st.separator_tokens ==
                                  st.sequences_emitted * L + st.dropped_tokens;
            const bool traced = f.tokens_match && f.lengths_match && f.input == st.input_tokens &&
                                f.repeated == st.repeated_tokens && f.padded == st.padded_tokens &&
                                f.output == st.sequences_emitted * L &&
                                f.dropped + (st.separator_tokens - f.separators) == st.dropped_tokens;
            ++runs;
            if (!identity || !traced) ++failures;
        }
    }
    return {failures == 0, fmt("%zu runs (1000 corpora x 5 strategies), %zu identity or token-fate mismatches", runs,
                               failures)};
}

Outcome sp_structural_suite() {
    std::mt19937_64 rng(77);
    std::size_t violations = 0, eligible_docs = 0, sequences = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t L = 4 + rng() % 120;
        const std::uint64_t p = 1 + rng() % 100;
        PackingConfig c;
        c.seq_len = L;
        c.r_max = static_cast<double>(p) / 100.0;
        c.c_extra = rng() % std::max<std::size_t>(1, L / 4);
        const auto docs = test::random_corpus(rng, L, 40);
        const auto r = pack_sp(docs, c);
        sequences += r.sequences.size();
        if (r.stats.padded_tokens != 0) ++violations;
        if (r.stats.max_bin_drop > c.c_extra) ++violations;
        std::unordered_map<std::string, std::vector<std::uint32_t>> hits;
        for (const auto& s : r.sequences) {
            if (s.tokens.size() != L || s.pad_count != 0) ++violations;
            std::size_t used = 0;
            for (const auto& seg : s.segments) {
                used += seg.size();
                auto& h = hits[seg.doc_id];
                if (h.size() < seg.end) h.resize(seg.end);
                for (auto q = seg.start; q < seg.end; ++q) ++h[q];
            }
            if (used != L) ++violations;
        }
        for (const auto& d : docs) {
            const auto& h = hits[d.id];
            std::uint64_t repeats = 0;
            for (auto x : h) repeats += x > 1 ? x - 1 : 0;
            const auto n = d.size() / L;
            if (n >= 1 && repeats > budget_exact(n, p, L)) ++violations;
            if (n == 0 && repeats > 0) ++violations;
            if (eligible_exact(d.size(), p, L)) {
                ++eligible_docs;
                if (h.size() != d.size() || std::any_of(h.begin(), h.end(), [](auto x) { return x == 0; })) {
                    ++violations;
                }
            }
        }
    }
    return {violations == 0, fmt("500 corpora, %zu sequences, %zu windowed documents checked, %zu violations",
                                 sequences, eligible_docs, violations)};
}

Outcome ffd_bound_suite() {
    std::mt19937_64 rng(91);
    std::size_t bound_violations = 0, opt_mismatch = 0, worst_num = 0, worst_den = 1;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t cap = 2 + rng() % 100;
        std::vector<std::size_t> sizes(1 + rng() % 8);
        for (auto& s : sizes) s = 1 + rng() % cap;
        const auto items = test::items_with_sizes(sizes);
        const auto ffd = ffd_pack(items, cap).size();
        const auto opt = exhaustive_bins(sizes, cap);
        if (optimal_bins(items, cap) != opt) ++opt_mismatch;
        if (9 * ffd > 11 * opt + 6) ++bound_violations;
        if (ffd * worst_den > worst_num * opt) {
            worst_num = ffd;
            worst_den = opt;
        }
    }
    std::size_t index_mismatch = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t cap = 16 + rng() % 3000;
        std::vector<std::size_t> sizes(1000);
        for (auto& s : sizes) s = 1 + rng() % cap;
        const auto items = test::items_with_sizes(sizes);
        if (test::bin_ids(ffd_pack(items, cap)) != test::linear_ffd(items, cap)) ++index_mismatch;
    }
    return {bound_violations == 0 && opt_mismatch == 0 && index_mismatch == 0,
            fmt("500 small instances: %zu bound violations, worst FFD/OPT %zu/%zu, %zu optimum mismatches; "
                "100 x 1000-item instances: %zu indexed-vs-linear mismatches",
                bound_violations, worst_num, worst_den, opt_mismatch, index_mismatch)};
}

struct DropPad {
    std::uint64_t sp_dropped = 0;
    std::uint64_t bfd_padded = 0;
};

// Full profile counts, seeds 0-4 summed.
DropPad drop_vs_pad(const LengthHistogram& shape, std::size_t c_extra) {
    DropPad out;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto docs = synthesize_corpus(shape, 0, seed);
        PackingConfig c;
        c.seq_len = shape.seq_len;
        c.c_extra = c_extra;
        c.r_max = 0.3;
        out.sp_dropped += pack_sp(docs, c).stats.dropped_tokens;
        out.bfd_padded += pack_bfd_baseline(docs, c).stats.padded_tokens;
    }
    return out;
}

Outcome drop_vs_pad_bbc() {
    const auto r = drop_vs_pad(bbc_length_profile(), 10);
    const bool ok = static_cast<double>(r.bfd_padded) >= kBbcPadOverDrop * static_cast<double>(r.sp_dropped);
    return {ok, fmt("BBC shape, seq_len 512, c_extra 10, 5 seeds: BFD padded %llu vs SP dropped %llu "
                    "(ratio %.2f, need >= 5)",
                    static_cast<unsigned long long>(r.bfd_padded), static_cast<unsigned long long>(r.sp_dropped),
                    static_cast<double>(r.bfd_padded) / std::max<double>(1.0, r.sp_dropped))};
}

Outcome drop_vs_pad_pubmed() {
    const auto r = drop_vs_pad(pubmed_length_profile(), 50);
    return {r.bfd_padded > r.sp_dropped,
            fmt("PubMed shape, seq_len 2048, c_extra 50, 5 seeds: BFD padded %llu vs SP dropped %llu "
                "(ratio %.2f, need > 1)",
                static_cast<unsigned long long>(r.bfd_padded), static_cast<unsigned long long>(r.sp_dropped),
                static_cast<double>(r.bfd_padded) / std::max<double>(1.0, r.sp_dropped))};
}

Outcome monotonicity_suite() {
    std::mt19937_64 rng(123);
    std::size_t violations = 0, flag_failures = 0;
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(i / 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
        LengthHistogram h;
        h.seq_len = 2 + rng() % 4096;
        const std::size_t intervals = 1 + rng() % 20;
        for (std::size_t k = 0; k < intervals; ++k) h.counts[k] = rng() % 10000;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (estimate_nsw(h, grid[i]) < estimate_nsw(h, grid[i - 1])) ++violations;
            if (estimate_short_tokens(h, grid[i], h.seq_len) > estimate_short_tokens(h, grid[i - 1], h.seq_len)) {
                ++violations;
            }
        }
        const auto t = sweep_rmax(h, grid, h.seq_len);
        if (!t.nsw_non_decreasing || !t.short_tokens_non_increasing) ++flag_failures;
    }
    return {violations == 0 && flag_failures == 0,
            fmt("1000 random histograms x 100 r values: %zu order violations, %zu sweep flag failures", violations,
                flag_failures)};
}

Outcome timing_report() {
    std::vector<BenchWorkload> workloads;
    const std::pair<const char*, std::size_t> shapes[] = {{"bbc", 10}, {"financial", 10}, {"pubmed", 50}};
    for (const auto& [name, extra] : shapes) {
        const auto shape = length_profile(name);
        PackingConfig c;
        c.seq_len = shape.seq_len;
        c.c_extra = extra;
        workloads.push_back(stage_two_workload(name, synthesize_corpus(shape, 0, 0), c));
    }
    const auto rows = bench_packers(workloads, 7);
    std::string detail = "informational: ";
    bool ok = rows.size() == 3;
    for (const auto& r : rows) {
        ok = ok && std::isfinite(r.ratio) && r.ratio > 0;
        detail += fmt("%s %zu items ffd %.3fms bfd %.3fms ratio %.2f%s; ", r.label.c_str(), r.items,
                      1e3 * r.ffd_seconds, 1e3 * r.bfd_seconds, r.ratio, r.ratio > 1 ? "" : " (not > 1)");
    }
    return {ok, detail};
}

Outcome cli_determinism() {
    const auto dir = fs::temp_directory_path() / "seampack_acceptance";
    fs::create_directories(dir);
    const auto corpus = dir / "corpus.jsonl";
    {
        std::ofstream out(corpus);
        for (const auto& d : synthesize_corpus(bbc_length_profile(), 1500, 42)) {
            out << nlohmann::json{{"id", d.id}, {"tokens", d.tokens}}.dump() << '\n';
        }
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::size_t pairs = 0, differ = 0, errors = 0;
    for (const std::string strategy : {"sp", "ct", "ffd", "bfd", "bfdm"}) {
        for (const std::string format : {"binary", "jsonl"}) {
            std::string bytes[2];
            for (int run = 0; run < 2; ++run) {
                const auto out = dir / fmt("%s_%s_%d.out", strategy.c_str(), format.c_str(), run);
                std::ostringstream so, se;
                const int code = cli::run({"seampack", "pack", "--strategy", strategy, "--seq-len", "512", "--c-extra",
                                           "10", "--input", corpus.string(), "--output", out.string(), "--format",
                                           format},
                                          so, se);
                if (code != 0) ++errors;
                bytes[run] = slurp(out);
            }
            ++pairs;
            if (bytes[0] != bytes[1] || bytes[0].empty()) ++differ;
        }
    }
    return {differ == 0 && errors == 0,
            fmt("%zu run pairs (5 strategies x 2 formats), %zu byte differences, %zu failed runs", pairs, differ,
                errors)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"estimator-reproduction", 1, true, estimator_reproduction},
        {"estimator-vs-simulation-coherence", 60, true, estimator_coherence},
        {"conservation-suite", 120, true, conservation_suite},
        {"sp-structural-suite", 0, true, sp_structural_suite},
        {"ffd-optimality-bound", 120, true, ffd_bound_suite},
        {"dropping-vs-padding-bbc", 60, true, drop_vs_pad_bbc},
        {"dropping-vs-padding-pubmed", 60, true, drop_vs_pad_pubmed},
        {"monotonicity-suite", 0, true, monotonicity_suite},
        {"timing-report", 0, false, timing_report},
        {"cli-determinism", 0, true, cli_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        bool pass = o.pass;
        if (c.budget_seconds > 0 && secs > c.budget_seconds) {
            pass = false;
            o.detail += fmt(" [over runtime budget %.0fs]", c.budget_seconds);
        }
        std::cout << (pass ? "PASS " : "FAIL ") << c.name << " (" << fmt("%.2fs", secs) << "): " << o.detail
                  << '\n';
        if (!pass && c.gating) ++failed;
    }
    std::cout << (failed == 0 ? "all gating criteria passed" : fmt("%d gating criteria failed", failed)) << '\n';
    return failed == 0 ? 0 : 1;
}
