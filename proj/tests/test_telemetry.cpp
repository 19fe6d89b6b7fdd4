#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "clperf/rng.hpp"
#include "clperf/telemetry.hpp"

using namespace clperf;

namespace {

SlotClock test_clock(std::int64_t genesis_s = 0) {
    ChainSpec spec;
    spec.genesis_time = genesis_s;
    return SlotClock(spec);
}

const SourceLabel kLabel{"node-1", "helsinki", "lighthouse"};

}  // namespace

TEST_CASE("record_arrival computes the genesis-relative offset") {
    auto clock = test_clock(1000);
    const Slot slot = 7;
    auto rec = record_arrival(ArrivalKind::block, slot, clock.start_ms(slot) + 1440, kLabel, clock);
    CHECK(rec.arrival_offset_ms == 1440);
    CHECK_FALSE(rec.skew_flagged);
    CHECK(rec.slot == slot);

    auto exact = record_arrival(ArrivalKind::block, slot, clock.start_ms(slot), kLabel, clock);
    CHECK(exact.arrival_offset_ms == 0);
    CHECK_FALSE(exact.skew_flagged);
}

TEST_CASE("small negative offsets clamp to zero and get flagged") {
    auto clock = test_clock();
    auto rec = record_arrival(ArrivalKind::block, 3, clock.start_ms(3) - 200, kLabel, clock);
    CHECK(rec.arrival_offset_ms == 0);
    CHECK(rec.skew_flagged);
}

TEST_CASE("events for far-future slots are rejected as clock skew") {
    auto clock = test_clock();
    CHECK_THROWS_AS(record_arrival(ArrivalKind::block, 10, clock.start_ms(10) - 1001, kLabel, clock), DataError);
    CHECK_NOTHROW(record_arrival(ArrivalKind::block, 10, clock.start_ms(10) - 1000, kLabel, clock));
}

TEST_CASE("offsets are timezone invariant") {
    // Same event stamped against two genesis anchors: identical offsets.
    auto utc = test_clock(1000);
    auto shifted = test_clock(1000 + 3600);
    const WallMs event_in_slot = 2180;
    auto a = record_arrival(ArrivalKind::block, 4, utc.start_ms(4) + event_in_slot, kLabel, utc);
    auto b = record_arrival(ArrivalKind::block, 4, shifted.start_ms(4) + event_in_slot, kLabel, shifted);
    CHECK(a.arrival_offset_ms == b.arrival_offset_ms);
}

TEST_CASE("odd count median by nearest rank") {
    auto cdf = latency_cdf({1000, 2000, 3000, 4000, 5000});
    REQUIRE(cdf.has_value());
    const auto p50 = std::find_if(cdf->points.begin(), cdf->points.end(), [](auto p) { return p.percentile == 50; });
    REQUIRE(p50 != cdf->points.end());
    CHECK(p50->offset_ms == 3000);
    CHECK(cdf->mean_ms == 3000.0);
}

TEST_CASE("empty group yields the explicit empty result") {
    CHECK_FALSE(latency_cdf({}).has_value());
}

TEST_CASE("cdf matches the sorted-array oracle on random samples") {
    DetRng rng(2024);
    std::vector<WallMs> offsets;
    offsets.reserve(1000);
    for (int i = 0; i < 1000; ++i) offsets.push_back(static_cast<WallMs>(rng.below(12000)));

    auto cdf = latency_cdf(offsets);
    REQUIRE(cdf.has_value());

    auto sorted = offsets;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& point : cdf->points) {
        const size_t rank = (static_cast<size_t>(point.percentile) * sorted.size() + 99) / 100;
        CHECK(point.offset_ms == sorted[rank - 1]);
    }

    // Monotone in the percentile.
    for (size_t i = 1; i < cdf->points.size(); ++i) CHECK(cdf->points[i].offset_ms >= cdf->points[i - 1].offset_ms);
}

TEST_CASE("cdf monotonicity on awkward sizes") {
    DetRng rng(7);
    for (size_t n : {1ull, 2ull, 3ull, 10ull, 99ull, 100ull, 101ull}) {
        std::vector<WallMs> offsets;
        for (size_t i = 0; i < n; ++i) offsets.push_back(static_cast<WallMs>(rng.below(5000)));
        auto cdf = latency_cdf(offsets);
        REQUIRE(cdf.has_value());
        for (size_t i = 1; i < cdf->points.size(); ++i)
            CHECK(cdf->points[i].offset_ms >= cdf->points[i - 1].offset_ms);
    }
}

TEST_CASE("out of sync ratio") {
    SECTION("fully synced node") {
        std::vector<SyncSpan> spans{{kLabel, 0, 99, false}};
        CHECK(out_of_sync_ratio(spans, 100) == 0.0);
    }
    SECTION("paper headline: 3774 of 10000 slots") {
        std::vector<SyncSpan> spans{{kLabel, 0, 3773, true}, {kLabel, 3774, 9999, false}};
        CHECK(out_of_sync_ratio(spans, 10000) == Catch::Approx(0.3774));
    }
    SECTION("half out of sync by counting") {
        std::vector<SyncSpan> spans{{kLabel, 0, 49, false}, {kLabel, 50, 99, true}};
        CHECK(out_of_sync_ratio(spans, 100) == 0.5);
    }
    SECTION("span bookkeeping conserves the window") {
        std::vector<SyncSpan> spans{{kLabel, 0, 49, false}, {kLabel, 50, 99, true}};
        std::uint64_t covered = 0;
        for (auto& s : spans) covered += s.last_slot - s.first_slot + 1;
        CHECK(covered == 100);
    }
    SECTION("zero measured slots is an error") {
        CHECK_THROWS_AS(out_of_sync_ratio({}, 0), DataError);
    }
}

TEST_CASE("reorg stats per group") {
    SECTION("no events") {
        CHECK(reorg_stats({}, GroupBy::location).empty());
    }
    SECTION("group totals and deltas") {
        // Six groups averaging 102 events, one of them at 110.
        std::vector<ReorgEvent> events;
        const char* locations[] = {"frankfurt", "london", "singapore", "sydney", "toronto", "warsaw"};
        const int counts[] = {100, 101, 101, 110, 100, 100};
        for (int g = 0; g < 6; ++g)
            for (int i = 0; i < counts[g]; ++i)
                events.push_back(ReorgEvent{{"n", locations[g], "c"}, static_cast<Slot>(i), 1});
        auto rows = reorg_stats(events, GroupBy::location);
        REQUIRE(rows.size() == 6);
        std::uint64_t total = 0;
        for (auto& row : rows) total += row.events;
        CHECK(total / 6 == 102);  // average of 102
        const auto sydney = std::find_if(rows.begin(), rows.end(), [](auto& r) { return r.group == "sydney"; });
        REQUIRE(sydney != rows.end());
        CHECK(sydney->events - total / 6 == 8);
    }
    SECTION("unknown depths excluded from the mean, counted in totals") {
        std::vector<ReorgEvent> events{
            {kLabel, 1, 2}, {kLabel, 2, 0}, {kLabel, 3, 4}, {kLabel, 4, 0},
        };
        auto rows = reorg_stats(events, GroupBy::location);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].events == 4);
        CHECK(rows[0].known_depth_events == 2);
        CHECK(rows[0].mean_known_depth == 3.0);
    }
}
