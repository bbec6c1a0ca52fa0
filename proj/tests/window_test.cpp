#include <numeric>
#include <random>

#include "doctest.h"
#include "seampack/window.hpp"
#include "test_util.hpp"

using namespace seampack;

namespace {

// Coverage oracle: marks every position touched by a window of seq_len
// starting at each offset, independent of how the offsets were derived.
std::vector<int> coverage(const std::vector<std::size_t>& starts, std::size_t seq_len, std::size_t length) {
    std::vector<int> hits(length, 0);
    for (auto s : starts) {
        for (std::size_t p = s; p < s + seq_len && p < length; ++p) ++hits[p];
    }
    return hits;
}

}  // namespace

TEST_CASE("max_overlap formula") {
    CHECK(max_overlap(3, 0.3, 2048) == 1844);
    CHECK(max_overlap(1, 1.0, 8) == 8);
    CHECK(max_overlap(2, 0.3, 2048) == 1229);
    // 10 * 0.3 * 1000 is 3000.0000000000005 in binary floating point.
    CHECK(max_overlap(10, 0.3, 1000) == 3000);
}

TEST_CASE("eligibility") {
    auto e = is_eligible(6000, 2048, 0.3);
    CHECK(e.eligible);
    CHECK(e.n == 2);
    e = is_eligible(100, 2048, 0.3);
    CHECK_FALSE(e.eligible);
    CHECK(e.n == 0);
    e = is_eligible(4096, 2048, 0.3);
    CHECK_FALSE(e.eligible);
    CHECK(e.n == 2);
    CHECK_FALSE(is_eligible(4100, 2048, 0.3).eligible);
    CHECK(is_eligible(15, 8, 1.0).eligible);
    CHECK_FALSE(is_eligible(8, 8, 1.0).eligible);
}

TEST_CASE("plan for a three-window document") {
    auto plan = plan_windows(6000, 2048, 0.3);
    REQUIRE(plan.eligible);
    CHECK(plan.n == 2);
    CHECK(plan.deficit == 144);
    CHECK(plan.overlaps == std::vector<std::size_t>{72, 72});
    const auto starts = plan.window_starts(2048);
    CHECK(starts == std::vector<std::size_t>{0, 1976, 3952});
    const auto hits = coverage(starts, 2048, 6000);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h >= 1; }));
    CHECK(starts.back() + 2048 == 6000);
}

TEST_CASE("plan for the one-boundary case") {
    auto plan = plan_windows(15, 8, 1.0);
    CHECK(plan.deficit == 1);
    CHECK(plan.overlaps == std::vector<std::size_t>{1});
    CHECK(plan.window_starts(8) == std::vector<std::size_t>{0, 7});
}

TEST_CASE("plan spreads the deficit in floor/ceil shares") {
    // One token short of six full sequences: the deficit is a single token.
    auto plan = plan_windows(12287, 2048, 0.3);
    REQUIRE(plan.eligible);
    CHECK(plan.n == 5);
    CHECK(plan.deficit == 1);
    CHECK(plan.overlaps == std::vector<std::size_t>{1, 0, 0, 0, 0});

    plan = plan_windows(10241, 2048, 0.3);
    REQUIRE(plan.eligible);
    CHECK(plan.n == 5);
    CHECK(plan.deficit == 2047);
    CHECK(plan.overlaps == std::vector<std::size_t>{410, 410, 409, 409, 409});
    CHECK(final_overlap(10241, 2048) == 410);
    const auto starts = plan.window_starts(2048);
    const auto hits = coverage(starts, 2048, 10241);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h >= 1; }));
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 6 * 2048);
}

TEST_CASE("plan properties over random lengths") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t L = 2 + rng() % 300;
        const std::size_t len = 1 + rng() % (L * 12);
        const double r = static_cast<double>(1 + rng() % 100) / 100.0;
        const auto plan = plan_windows(len, L, r);
        CHECK(plan.n == len / L);
        if (!plan.eligible) {
            CHECK(plan.overlaps.empty());
            continue;
        }
        CHECK(std::accumulate(plan.overlaps.begin(), plan.overlaps.end(), std::size_t{0}) == plan.deficit);
        CHECK(plan.deficit <= max_overlap(plan.n, r, L));
        for (auto o : plan.overlaps) CHECK(o <= final_overlap(len, L));
        const auto starts = plan.window_starts(L);
        CHECK(starts.size() == plan.n + 1);
        CHECK(starts.back() + L == len);
        const auto hits = coverage(starts, L, len);
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h >= 1; }));
        CHECK(std::accumulate(hits.begin(), hits.end(), std::size_t{0}) == (plan.n + 1) * L);
    }
}

TEST_CASE("eligibility is monotone in r") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t L = 2 + rng() % 500;
        const std::size_t len = 1 + rng() % (L * 10);
        bool was = false;
        for (int step = 1; step <= 20; ++step) {
            const bool now = is_eligible(len, L, step / 20.0).eligible;
            CHECK((!was || now));
            was = now;
        }
    }
}

TEST_CASE("stage one emission") {
    PackingConfig c;
    c.seq_len = 2048;
    c.r_max = 0.3;

    auto docs = test::docs_with_lengths({6000});
    auto out = emit_stage_one(docs, c);
    CHECK(out.sequences.size() == 3);
    CHECK(out.leftovers.empty());
    CHECK(out.repeated_tokens == 144);
    CHECK(out.sliding_window_docs == 1);
    CHECK(out.sequences[1].segments[0] == Segment{"d0", 1976, 4024});
    CHECK(out.sequences[1].tokens.front() == docs[0].tokens[1976]);

    docs = test::docs_with_lengths({100});
    out = emit_stage_one(docs, c);
    CHECK(out.sequences.empty());
    REQUIRE(out.leftovers.size() == 1);
    CHECK(out.leftovers[0] == Chunk{0, 0, 100});

    docs = test::docs_with_lengths({4100});
    out = emit_stage_one(docs, c);
    CHECK(out.sequences.size() == 2);
    REQUIRE(out.leftovers.size() == 1);
    CHECK(out.leftovers[0] == Chunk{0, 4096, 4100});
    CHECK(out.repeated_tokens == 0);

    docs = test::docs_with_lengths({4096});
    out = emit_stage_one(docs, c);
    CHECK(out.sequences.size() == 2);
    CHECK(out.leftovers.empty());
}

TEST_CASE("stage one keeps corpus order and leaves only short chunks") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        PackingConfig c;
        c.seq_len = 4 + rng() % 60;
        c.c_extra = 0;
        c.r_max = static_cast<double>(1 + rng() % 10) / 10.0;
        const auto docs = test::random_corpus(rng, c.seq_len, 30);
        const auto out = emit_stage_one(docs, c);
        for (const auto& ch : out.leftovers) {
            CHECK(ch.size() >= 1);
            CHECK(ch.size() < c.seq_len);
        }
        std::size_t last_doc = 0;
        std::size_t last_start = 0;
        for (const auto& s : out.sequences) {
            REQUIRE(s.segments.size() == 1);
            const auto d = std::stoul(s.segments[0].doc_id.substr(1));
            CHECK(d >= last_doc);
            if (d == last_doc) CHECK(s.segments[0].start >= last_start);
            last_doc = d;
            last_start = s.segments[0].start;
        }
        CHECK(emit_stage_one(docs, c).sequences == out.sequences);
    }
}
