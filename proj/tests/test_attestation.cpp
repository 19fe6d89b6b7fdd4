#include <catch2/catch_amalgamated.hpp>

#include "clperf/attestation.hpp"
#include "clperf/rng.hpp"
#include "testutil.hpp"

using namespace clperf;
using testutil::FixtureChain;
using testutil::make_chain;
using testutil::oracle_flags;

namespace {

// Correct claims for an attestation at `slot` against the fixture chain.
AttestationRecord correct_attestation(const FixtureChain& fx, Slot slot) {
    AttestationRecord att;
    att.attested_slot = slot;
    att.claimed_source = fx.view.justified_at(slot);
    if (auto target = fx.view.target_checkpoint(epoch_of(slot, fx.spec))) att.claimed_target = *target;
    att.claimed_head = fx.view.head_at(slot, fx.spec.attestation_deadline_ms());
    return att;
}

}  // namespace

TEST_CASE("fully correct attestation with delay 1") {
    auto fx = make_chain(ChainSpec{}, 8);
    auto att = correct_attestation(fx, 3);
    att.inclusion_slot = 4;
    const FlagVector flags = evaluate_attestation(att, fx.view);
    CHECK(flags.source_ok);
    CHECK(flags.target_ok);
    CHECK(flags.head_ok);
    CHECK(flags.inclusion_delay == 1u);
}

TEST_CASE("missing inclusion earns nothing") {
    auto fx = make_chain(ChainSpec{}, 8);
    auto att = correct_attestation(fx, 3);
    att.inclusion_slot.reset();
    const FlagVector flags = evaluate_attestation(att, fx.view);
    CHECK_FALSE(flags.source_ok);
    CHECK_FALSE(flags.target_ok);
    CHECK_FALSE(flags.head_ok);
    CHECK_FALSE(flags.inclusion_delay.has_value());
}

TEST_CASE("delay 2 drops only the head flag") {
    auto fx = make_chain(ChainSpec{}, 8);
    auto att = correct_attestation(fx, 3);
    att.inclusion_slot = 5;
    const FlagVector flags = evaluate_attestation(att, fx.view);
    CHECK(flags.source_ok);
    CHECK(flags.target_ok);
    CHECK_FALSE(flags.head_ok);
    CHECK(flags.inclusion_delay == 2u);
}

TEST_CASE("timeliness windows cut source and target") {
    ChainSpec spec;
    auto fx = make_chain(spec, 96);
    auto att = correct_attestation(fx, 33);

    att.inclusion_slot = 33 + 5;
    auto at5 = evaluate_attestation(att, fx.view);
    CHECK(at5.source_ok);
    CHECK(at5.target_ok);

    att.inclusion_slot = 33 + 6;  // source window exceeded: chain collapses
    auto at6 = evaluate_attestation(att, fx.view);
    CHECK_FALSE(at6.source_ok);
    CHECK_FALSE(at6.target_ok);
    CHECK_FALSE(at6.head_ok);
}

TEST_CASE("wrong claims fail their flag and everything above it") {
    auto fx = make_chain(ChainSpec{}, 8);
    const Root wrong = Root::derive(0xbad, 0xbad);

    auto wrong_head = correct_attestation(fx, 3);
    wrong_head.claimed_head = wrong;
    wrong_head.inclusion_slot = 4;
    auto f1 = evaluate_attestation(wrong_head, fx.view);
    CHECK(f1.source_ok);
    CHECK(f1.target_ok);
    CHECK_FALSE(f1.head_ok);

    auto wrong_target = correct_attestation(fx, 3);
    wrong_target.claimed_target.root = wrong;
    wrong_target.inclusion_slot = 4;
    auto f2 = evaluate_attestation(wrong_target, fx.view);
    CHECK(f2.source_ok);
    CHECK_FALSE(f2.target_ok);
    CHECK_FALSE(f2.head_ok);

    auto wrong_source = correct_attestation(fx, 3);
    wrong_source.claimed_source.root = wrong;
    wrong_source.inclusion_slot = 4;
    auto f3 = evaluate_attestation(wrong_source, fx.view);
    CHECK_FALSE(f3.source_ok);
    CHECK_FALSE(f3.target_ok);
    CHECK_FALSE(f3.head_ok);
}

TEST_CASE("attesting an empty slot points the head at the prior block") {
    auto fx = make_chain(ChainSpec{}, 8, /*empty_mask=*/0b001000);
    auto att = correct_attestation(fx, 3);  // slot 3 empty
    att.inclusion_slot = 4;
    auto flags = evaluate_attestation(att, fx.view);
    CHECK(flags.head_ok);
    CHECK(att.claimed_head == *fx.roots[2]);
}

TEST_CASE("malformed inclusion slot is rejected") {
    auto fx = make_chain(ChainSpec{}, 8);
    auto att = correct_attestation(fx, 3);
    att.inclusion_slot = 3;
    CHECK_THROWS_AS(evaluate_attestation(att, fx.view), DataError);
    att.inclusion_slot = 2;
    CHECK_THROWS_AS(evaluate_attestation(att, fx.view), DataError);
}

TEST_CASE("brute-force evaluator agrees over all claim and delay combinations") {
    // 3-block fixture chain, every combination of claim correctness and delay.
    ChainSpec spec;
    auto fx = make_chain(spec, 40);
    const Root wrong = Root::derive(0xdead, 1);
    for (Slot attested = 1; attested <= 3; ++attested) {
        for (int src_ok = 0; src_ok < 2; ++src_ok)
            for (int tgt_ok = 0; tgt_ok < 2; ++tgt_ok)
                for (int head_ok = 0; head_ok < 2; ++head_ok)
                    for (std::uint32_t delay = 1; delay <= 34; ++delay) {
                        auto att = correct_attestation(fx, attested);
                        if (!src_ok) att.claimed_source.root = wrong;
                        if (!tgt_ok) att.claimed_target.root = wrong;
                        if (!head_ok) att.claimed_head = wrong;
                        att.inclusion_slot = attested + delay;
                        CAPTURE(attested, src_ok, tgt_ok, head_ok, delay);
                        CHECK(evaluate_attestation(att, fx.view) == oracle_flags(att, fx));
                    }
    }
}

TEST_CASE("randomized chains match the oracle and keep the implication chain") {
    DetRng rng(20260809);
    for (int iteration = 0; iteration < 200; ++iteration) {
        ChainSpec spec;
        spec.slots_per_epoch = 4;
        spec.aggregation_deadline_s = 8;
        const Slot slots = 4 + rng.below(5);  // up to 8 slots
        std::uint64_t empty_mask = rng.next() & ((1ull << slots) - 1);
        empty_mask &= ~1ull;  // keep a genesis block
        auto fx = make_chain(spec, slots, empty_mask, rng.next());

        const std::uint32_t validators = 1 + static_cast<std::uint32_t>(rng.below(16));
        for (ValidatorId v = 0; v < validators; ++v) {
            AttestationRecord att;
            att.validator = v;
            att.attested_slot = rng.below(slots);
            auto correct = correct_attestation(fx, att.attested_slot);
            const Root wrong = Root::derive(0xbad0bad, rng.next());
            att.claimed_source = rng.below(2) ? correct.claimed_source : Checkpoint{0, wrong};
            att.claimed_target = rng.below(2) ? correct.claimed_target : Checkpoint{epoch_of(att.attested_slot, spec), wrong};
            att.claimed_head = rng.below(2) ? correct.claimed_head : wrong;
            if (rng.below(4) == 0) att.inclusion_slot.reset();
            else att.inclusion_slot = att.attested_slot + 1 + rng.below(36);

            CAPTURE(iteration, v, att.attested_slot, slots, empty_mask);
            const FlagVector got = evaluate_attestation(att, fx.view);
            CHECK(got == oracle_flags(att, fx));

            // Implication chain and head-delay law.
            if (got.head_ok) CHECK(got.target_ok);
            if (got.target_ok) CHECK(got.source_ok);
            if (got.head_ok) CHECK(got.inclusion_delay == 1u);
        }
    }
}
