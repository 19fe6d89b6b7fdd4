#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "clperf/duties.hpp"

using namespace clperf;

namespace {

Seed32 test_seed(std::uint64_t v = 7) { return seed32_from_u64(v); }

// Counting oracle over the partition: every validator exactly once, committee
// sizes within a slot differ by at most one, aggregator caps respected.
void check_partition(const EpochDuties& duties, std::uint32_t validators, const ChainSpec& spec) {
    std::set<ValidatorId> seen;
    size_t total = 0;
    for (std::uint32_t si = 0; si < spec.slots_per_epoch; ++si) {
        const auto& slot_committees = duties.committees[si];
        REQUIRE(slot_committees.size() <= spec.max_committees_per_slot);
        size_t min_size = SIZE_MAX, max_size = 0;
        for (const auto& members : slot_committees) {
            min_size = std::min(min_size, members.size());
            max_size = std::max(max_size, members.size());
            size_t aggregators = 0;
            for (ValidatorId v : members) {
                CHECK(seen.insert(v).second);  // pairwise disjoint
                ++total;
                const auto& duty = duties.by_validator[v];
                CHECK(duty.attestation_slot == first_slot_of_epoch(duties.epoch, spec) + si);
                if (duty.is_aggregator) ++aggregators;
            }
            CHECK(aggregators <= spec.aggregators_per_committee);
        }
        if (!slot_committees.empty()) CHECK(max_size - min_size <= 1);
    }
    CHECK(total == validators);  // union covers the set
}

}  // namespace

TEST_CASE("single validator attests once and proposes every slot") {
    ChainSpec spec;
    auto duties = assign_duties(1, 3, test_seed(), spec);
    check_partition(duties, 1, spec);
    CHECK(duties.by_validator[0].proposer_slots.size() == spec.slots_per_epoch);
    for (std::uint32_t si = 0; si < spec.slots_per_epoch; ++si) CHECK(duties.proposer_by_slot[si] == 0);
}

TEST_CASE("64 validators split as two attesters per slot in one committee") {
    ChainSpec spec;
    auto duties = assign_duties(64, 0, test_seed(), spec);
    check_partition(duties, 64, spec);
    for (std::uint32_t si = 0; si < spec.slots_per_epoch; ++si) {
        REQUIRE(duties.committees[si].size() == 1);
        CHECK(duties.committees[si][0].size() == 2);
    }
}

TEST_CASE("duty assignment is deterministic") {
    ChainSpec spec;
    auto a = assign_duties(200, 5, test_seed(11), spec);
    auto b = assign_duties(200, 5, test_seed(11), spec);
    REQUIRE(a.proposer_by_slot == b.proposer_by_slot);
    REQUIRE(a.committees == b.committees);
    REQUIRE(a.sync_committee == b.sync_committee);

    auto c = assign_duties(200, 6, test_seed(11), spec);
    CHECK(a.committees != c.committees);  // epoch keyed in
    auto d = assign_duties(200, 5, test_seed(12), spec);
    CHECK(a.committees != d.committees);  // seed keyed in
}

TEST_CASE("partition property over many validator counts") {
    ChainSpec spec;
    for (std::uint32_t n : {1u, 2u, 31u, 32u, 33u, 100u, 500u, 4097u}) {
        auto duties = assign_duties(n, 2, test_seed(n), spec);
        check_partition(duties, n, spec);
    }
}

TEST_CASE("sync committee size and period keying") {
    ChainSpec spec;
    auto small = assign_duties(100, 0, test_seed(), spec);
    CHECK(small.sync_committee.size() == 100);  // capped by validator count

    auto big = assign_duties(600, 0, test_seed(), spec);
    CHECK(big.sync_committee.size() == spec.sync_committee_size);

    // Same period, different epoch: sync membership unchanged.
    auto later = assign_duties(600, 1, test_seed(), spec);
    CHECK(big.sync_committee == later.sync_committee);
    // Membership is recorded on each member's duty.
    for (ValidatorId v : big.sync_committee) {
        CHECK(big.by_validator[v].in_sync_committee(0, spec));
    }

    // Next period reshuffles (with overwhelming probability for 600 of 600+).
    auto next_period = assign_duties(600, spec.sync_committee_period_epochs, test_seed(), spec);
    CHECK(big.sync_committee != next_period.sync_committee);
}

TEST_CASE("committee lookup resolves slot and index") {
    ChainSpec spec;
    auto duties = assign_duties(64, 1, test_seed(), spec);
    const Slot slot = first_slot_of_epoch(1, spec) + 3;
    REQUIRE(duties.committee_at(slot, 0, spec) != nullptr);
    CHECK(duties.committee_at(slot, 1, spec) == nullptr);        // only one committee at this size
    CHECK(duties.committee_at(slot + 64, 0, spec) == nullptr);   // wrong epoch
}

TEST_CASE("committees cap at the spec maximum") {
    ChainSpec spec;
    spec.max_committees_per_slot = 2;
    auto duties = assign_duties(32 * 2 * kTargetCommitteeSize * 2, 0, test_seed(), spec);
    for (std::uint32_t si = 0; si < spec.slots_per_epoch; ++si) CHECK(duties.committees[si].size() == 2);
    check_partition(duties, 32 * 2 * kTargetCommitteeSize * 2, spec);
}

TEST_CASE("zero validators rejected") {
    ChainSpec spec;
    CHECK_THROWS_AS(assign_duties(0, 0, test_seed(), spec), ConfigError);
}
