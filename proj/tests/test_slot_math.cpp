#include <catch2/catch_amalgamated.hpp>

#include "clperf/slot_math.hpp"

using namespace clperf;

TEST_CASE("epoch arithmetic") {
    ChainSpec spec;
    CHECK(epoch_of(0, spec) == 0);
    CHECK(epoch_of(5050720, spec) == 157835);  // 157835 * 32
    CHECK(epoch_of(5760722, spec) == 180022);
    CHECK(slot_in_epoch(5760722, spec) == 18);
    CHECK(first_slot_of_epoch(180022, spec) == 5760704);
}

TEST_CASE("slot wall times follow the phase schedule") {
    ChainSpec spec;
    spec.genesis_time = 0;
    auto t0 = slot_wall_times(0, spec);
    CHECK(t0.start_s == 0);
    CHECK(t0.attestation_deadline_s == 4);
    CHECK(t0.aggregation_deadline_s == 8);
    CHECK(t0.end_s == 12);

    auto t2 = slot_wall_times(2, spec);
    CHECK(t2.start_s == 24);
    CHECK(t2.attestation_deadline_s == 28);
    CHECK(t2.aggregation_deadline_s == 32);
    CHECK(t2.end_s == 36);

    spec.genesis_time = 1606824023;
    auto t1 = slot_wall_times(1, spec);
    CHECK(t1.start_s == 1606824035);
    CHECK(t1.attestation_deadline_s == 1606824039);
    CHECK(t1.aggregation_deadline_s == 1606824043);
    CHECK(t1.end_s == 1606824047);
}

TEST_CASE("slot wall times are strictly increasing in slot and position") {
    ChainSpec spec;
    spec.genesis_time = 123;
    for (Slot s = 0; s < 100; ++s) {
        auto t = slot_wall_times(s, spec);
        CHECK(t.start_s < t.attestation_deadline_s);
        CHECK(t.attestation_deadline_s < t.aggregation_deadline_s);
        CHECK(t.aggregation_deadline_s < t.end_s);
        if (s > 0) {
            auto prev = slot_wall_times(s - 1, spec);
            CHECK(t.start_s > prev.start_s);
            CHECK(t.start_s == prev.end_s);
        }
    }
}

TEST_CASE("slot clock maps wall time back to slots") {
    ChainSpec spec;
    spec.genesis_time = 1000;
    SlotClock clock(spec);
    CHECK(clock.slot_at(spec.genesis_ms()) == 0);
    CHECK(clock.slot_at(spec.genesis_ms() + 11999) == 0);
    CHECK(clock.slot_at(spec.genesis_ms() + 12000) == 1);
    CHECK(clock.slot_at(0) == 0);  // clamped before genesis
    CHECK(clock.start_ms(2) == spec.genesis_ms() + 24000);
}

TEST_CASE("chain spec validation") {
    ChainSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.attestation_deadline_s = 8;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ChainSpec{};
    spec.seconds_per_slot = 8;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = ChainSpec{};
    spec.slots_per_epoch = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("chain spec file parsing and overrides") {
    std::istringstream in(
        "# test spec\n"
        "seconds_per_slot = 6\n"
        "slots_per_epoch = 8\n"
        "attestation_deadline_s = 2\n"
        "aggregation_deadline_s = 4\n"
        "genesis_time = 4242  # trailing comment\n");
    ChainSpec spec = load_chain_spec(in);
    CHECK(spec.seconds_per_slot == 6);
    CHECK(spec.slots_per_epoch == 8);
    CHECK(spec.genesis_time == 4242);

    apply_chain_spec_overrides(spec, {"genesis_time=7", "slots_per_epoch=16"});
    CHECK(spec.genesis_time == 7);
    CHECK(spec.slots_per_epoch == 16);

    CHECK_THROWS_AS(apply_chain_spec_overrides(spec, {"bogus_key=1"}), ConfigError);
    CHECK_THROWS_AS(apply_chain_spec_overrides(spec, {"seconds_per_slot"}), ConfigError);

    std::istringstream bad("seconds_per_slot = twelve\n");
    CHECK_THROWS_AS(load_chain_spec(bad), ConfigError);
}
