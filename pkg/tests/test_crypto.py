"""Tests for the group suite and the BLS, BGLS and Wendy signature schemes."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wendy.crypto import (
    AggregationError,
    DecodeError,
    DiffMessage,
    DoubleSignError,
    KeyFileError,
    SignatureShare,
    WendySigner,
    bgls_verify_agg,
    bls_agg,
    bls_keygen,
    bls_sign_share,
    bls_verify_multi,
    bls_verify_share,
    counting_pairings,
    decode_public,
    decode_secret,
    default_ell,
    encode_public,
    encode_secret,
    max_diff,
    pairing_counter,
    reset_pairing_counter,
    verify_pop,
    wendy_agg,
    wendy_keygen,
    wendy_sign_share,
    wendy_verify_agg,
    wendy_verify_share,
)
from wendy.crypto import group
from wendy.crypto.group import G1, G2


def _tamper(share):
    return SignatureShare(share.sigma + G1, share.signer)


class TestGroupSuite:
    def test_bilinearity_on_random_scalars(self):
        rng = random.Random(7)
        for _ in range(3):
            a, b = rng.randrange(1, group.ORDER), rng.randrange(1, group.ORDER)
            lhs = group.pairing(group.mul1(G1, a), group.mul2(G2, b))
            assert lhs == group.pairing(group.mul1(G1, a * b), G2)
            assert lhs == group.pairing(G1, group.mul2(G2, a * b))

    def test_hash_oracles_are_domain_separated(self):
        msg = b"same input"
        assert group.h0(msg) == group.h0(msg)
        assert group.h0(msg) != group.hash_to_g1(msg, group.POP_DST)
        assert group.MSG_DST != group.POP_DST

    def test_view_encoding_is_fixed_width(self):
        assert group.encode_view(7) == bytes(7) + b"\x07"
        with pytest.raises(ValueError):
            group.encode_view(1 << 64)

    def test_identity_elements_rejected_at_decode(self):
        ident1 = group.encode_g1(G1 + group.mul1(G1, group.ORDER - 1))
        with pytest.raises(DecodeError):
            group.decode_g1(ident1)
        with pytest.raises(DecodeError):
            group.decode_g1(b"\x00" * 47)

    def test_g1_round_trip(self):
        p = group.mul1(G1, 12345)
        assert group.decode_g1(group.encode_g1(p)) == p


class TestPairingCounter:
    def test_reset_gives_zero(self):
        group.pairing(G1, G2)
        reset_pairing_counter()
        assert pairing_counter() == 0

    def test_share_verification_costs_two(self, bls_keys):
        k = bls_keys[0]
        share = bls_sign_share(k.sk, b"a")
        reset_pairing_counter()
        assert bls_verify_share(k.pk, b"a", share)
        assert pairing_counter() == 2

    def test_scoped_counter(self):
        with counting_pairings() as count:
            group.pairing(G1, G2)
            group.pairing(G1, G2)
        assert count() == 2


class TestBlsKeys:
    def test_pop_verifies(self):
        k = bls_keygen(b"seed")
        assert verify_pop(k.pk, k.pop)
        assert k.pk == group.mul2(G2, k.sk)

    def test_same_seed_same_keypair(self):
        assert bls_keygen(b"seed") == bls_keygen(b"seed")

    def test_hundred_seeds_give_distinct_keys(self):
        encoded = {group.encode_g2(bls_keygen(s).pk) for s in range(100)}
        assert len(encoded) == 100

    def test_pop_for_other_key_rejected(self):
        a, b = bls_keygen(b"a"), bls_keygen(b"b")
        assert not verify_pop(a.pk, b.pop)

    def test_identity_key_rejected(self):
        k = bls_keygen(b"a")
        assert not verify_pop(group.mul2(G2, group.ORDER), k.pop)


class TestBlsSignatures:
    def test_round_trip_and_binding(self, bls_keys):
        k = bls_keys[0]
        share = bls_sign_share(k.sk, b"a")
        assert bls_verify_share(k.pk, b"a", share)
        assert not bls_verify_share(k.pk, b"b", share)
        assert not bls_verify_share(k.pk, b"a", _tamper(share))
        assert share == bls_sign_share(k.sk, b"a")

    def test_aggregation_basics(self, bls_keys):
        s1 = bls_sign_share(bls_keys[0].sk, b"m", 0)
        s2 = bls_sign_share(bls_keys[1].sk, b"m", 1)
        assert bls_agg([s1]).sigma == s1.sigma
        assert bls_agg([s1, s2]) == bls_agg([s2, s1])
        assert bls_agg([s2, s1]).signers == (0, 1)
        with pytest.raises(AggregationError, match="empty aggregation"):
            bls_agg([])
        with pytest.raises(AggregationError):
            bls_agg([s1, s1])

    def test_quorum_multisig_two_pairings(self, bls_keys):
        keys = bls_keys[:3]
        agg = bls_agg(bls_sign_share(k.sk, b"block", i) for i, k in enumerate(keys))
        with counting_pairings() as count:
            assert bls_verify_multi([k.pk for k in keys], b"block", agg)
        assert count() == 2
        assert not bls_verify_multi([k.pk for k in keys[:2]], b"block", agg)

    def test_multisig_64_signers_two_pairings(self, bls_keys):
        agg = bls_agg(bls_sign_share(k.sk, b"block", i) for i, k in enumerate(bls_keys))
        with counting_pairings() as count:
            assert bls_verify_multi([k.pk for k in bls_keys], b"block", agg)
        assert count() == 2

    def test_bgls_pairing_count_and_binding(self, bls_keys):
        keys = bls_keys[:4]
        msgs = [f"m{i}".encode() for i in range(4)]
        agg = bls_agg(bls_sign_share(k.sk, m, i) for i, (k, m) in enumerate(zip(keys, msgs)))
        with counting_pairings() as count:
            assert bgls_verify_agg([(k.pk, m) for k, m in zip(keys, msgs)], agg)
        assert count() == 5
        swapped = [msgs[1], msgs[0]] + msgs[2:]
        assert not bgls_verify_agg([(k.pk, m) for k, m in zip(keys, swapped)], agg)

    def test_bgls_singleton_matches_share_check(self, bls_keys):
        k = bls_keys[0]
        share = bls_sign_share(k.sk, b"x")
        assert bgls_verify_agg([(k.pk, b"x")], bls_agg([share])) == bls_verify_share(k.pk, b"x", share)
        bad = _tamper(share)
        assert bgls_verify_agg([(k.pk, b"x")], bls_agg([bad])) == bls_verify_share(k.pk, b"x", bad) is False


class TestWendyKeys:
    def test_subkey_count(self):
        kp = wendy_keygen(b"k", 8)
        assert len(list(kp.all_keys())) == 17
        assert len(list(kp.public().all_keys())) == 17

    def test_all_pops_verify(self, wendy_keys):
        assert wendy_keys(3, 1)[0].public().verify_pops()

    def test_distinct_seeds_disjoint_keys(self, wendy_keys):
        a, b = wendy_keys(4, 2)
        ka = {group.encode_g2(k.pk) for k in a.all_keys()}
        kb = {group.encode_g2(k.pk) for k in b.all_keys()}
        assert len(ka) == 9 and len(kb) == 9
        assert not ka & kb

    @pytest.mark.parametrize("ell", [0, 65])
    def test_width_out_of_range(self, ell):
        with pytest.raises(ValueError):
            wendy_keygen(b"k", ell)

    def test_default_width(self):
        assert default_ell(4) == 4
        assert default_ell(100) == 9
        assert max_diff(4) == 15


class TestWendySignatures:
    def test_zero_difference_uses_all_zero_subkeys(self, wendy_keys):
        kp = wendy_keys(3, 1)[0]
        share = wendy_sign_share(kp, DiffMessage(0, 7))
        exponent = sum(pair[0].sk for pair in kp.subkeys)
        assert share.sigma == group.mul1(group.h0(group.encode_view(7)), exponent)
        assert wendy_verify_share(kp.public(), DiffMessage(0, 7), share)

    def test_bit_decomposition_selects_subkeys(self, wendy_keys):
        kp = wendy_keys(3, 1)[0]
        expected = kp.subkeys[0][1].sk + kp.subkeys[1][0].sk + kp.subkeys[2][1].sk
        assert kp.selected_secret(5) == expected % group.ORDER

    def test_overflow_claim_uses_overflow_key_only(self, wendy_keys):
        kp = wendy_keys(3, 1)[0]
        share = wendy_sign_share(kp, DiffMessage(None, 9))
        assert share.sigma == group.mul1(group.h0(group.encode_view(9)), kp.overflow.sk)
        assert wendy_verify_share(kp.public(), DiffMessage(None, 9), share)
        assert not any(wendy_verify_share(kp.public(), DiffMessage(c, 9), share) for c in range(8))

    def test_round_trip_and_tampering(self, wendy_keys):
        kp = wendy_keys(4, 1)[0]
        m = DiffMessage(6, 40)
        share = wendy_sign_share(kp, m)
        assert wendy_verify_share(kp, m, share)
        assert not wendy_verify_share(kp, DiffMessage(6 ^ 1, 40), share)
        assert not wendy_verify_share(kp, DiffMessage(6, 41), share)
        assert not wendy_verify_share(kp, m, _tamper(share))

    def test_difference_must_fit_width(self, wendy_keys):
        kp = wendy_keys(3, 1)[0]
        share = wendy_sign_share(kp, DiffMessage(1, 5))
        assert not wendy_verify_share(kp, DiffMessage(8, 5), share)
        with pytest.raises(ValueError):
            wendy_sign_share(kp, DiffMessage(8, 5))

    def test_aggregate_of_sixteen_uses_two_pairings(self):
        ell = default_ell(16)
        keys = [wendy_keygen(f"sixteen:{i}".encode(), ell) for i in range(16)]
        diffs = [(3 * i) % (max_diff(ell) + 1) for i in range(16)]
        agg = wendy_agg(wendy_sign_share(k, DiffMessage(c, 99), i) for i, (k, c) in enumerate(zip(keys, diffs)))
        claims = [(k.public(), c) for k, c in zip(keys, diffs)]
        with counting_pairings() as count:
            assert wendy_verify_agg(claims, 99, agg)
        assert count() == 2
        changed = claims[:]
        changed[5] = (claims[5][0], diffs[5] + 1)
        assert not wendy_verify_agg(changed, 99, agg)

    def test_aggregation_singleton_and_order(self, wendy_keys):
        keys = wendy_keys(3, 3)
        shares = [wendy_sign_share(k, DiffMessage(i + 1, 20), i) for i, k in enumerate(keys)]
        assert wendy_agg(shares[:1]).sigma == shares[0].sigma
        assert wendy_agg(shares) == wendy_agg(shares[::-1])
        with pytest.raises(AggregationError):
            wendy_agg([])

    def test_mixed_views_rejected_without_exception(self, wendy_keys):
        keys = wendy_keys(3, 2)
        msgs = [DiffMessage(1, 20), DiffMessage(1, 21)]
        agg = wendy_agg(wendy_sign_share(k, m, i) for i, (k, m) in enumerate(zip(keys, msgs)))
        assert wendy_verify_agg([(k.public(), m) for k, m in zip(keys, msgs)], 20, agg) is False

    def test_small_oracle_equivalence(self, wendy_keys):
        """Every 2-signer world with 2-bit differences: aggregate acceptance
        equals the conjunction of individual share checks."""
        keys = wendy_keys(2, 2)
        v = 31
        shares = {(i, c): wendy_sign_share(keys[i], DiffMessage(c, v), i) for i in range(2) for c in range(4)}
        single = {
            (i, signed, claimed): wendy_verify_share(keys[i], DiffMessage(claimed, v), shares[(i, signed)])
            for i in range(2)
            for signed in range(4)
            for claimed in range(4)
        }
        for signed in [(a, b) for a in range(4) for b in range(4)]:
            agg = wendy_agg(shares[(i, c)] for i, c in enumerate(signed))
            for claimed in [signed, (signed[0] ^ 1, signed[1]), (signed[0], signed[1] ^ 2)]:
                oracle = all(single[(i, signed[i], claimed[i])] for i in range(2))
                got = wendy_verify_agg([(keys[i].public(), claimed[i]) for i in range(2)], v, agg)
                assert got == oracle == (claimed == signed)

    def test_signer_refuses_double_signing(self, wendy_keys):
        signer = WendySigner(wendy_keys(3, 1)[0], 2)
        first = signer.sign(DiffMessage(2, 10))
        assert signer.sign(DiffMessage(2, 10)) == first
        signer.sign(DiffMessage(5, 11))
        with pytest.raises(DoubleSignError):
            signer.sign(DiffMessage(3, 10))
        with pytest.raises(DoubleSignError):
            signer.sign(DiffMessage(None, 10))

    @settings(max_examples=15, deadline=None)
    @given(c=st.integers(0, 15), v=st.integers(0, (1 << 64) - 1))
    def test_share_round_trip_property(self, wendy_keys, c, v):
        kp = wendy_keys(4, 1)[0]
        assert wendy_verify_share(kp, DiffMessage(c, v), wendy_sign_share(kp, DiffMessage(c, v)))


class TestDiffMessage:
    @given(c=st.one_of(st.none(), st.integers(0, (1 << 64) - 1)), v=st.integers(0, (1 << 64) - 1))
    def test_bytes_round_trip(self, c, v):
        m = DiffMessage(c, v)
        data = m.to_bytes()
        assert len(data) == 17
        assert DiffMessage.from_bytes(data) == m

    def test_flag_byte(self):
        assert DiffMessage(None, 3).to_bytes()[0] == 1
        assert DiffMessage(0, 3).to_bytes()[0] == 0
        with pytest.raises(DecodeError):
            DiffMessage.from_bytes(b"\x02" + bytes(16))


class TestKeyFiles:
    def test_round_trip_is_byte_identical(self, wendy_keys):
        kp = wendy_keys(3, 1)[0]
        secret = encode_secret(kp)
        assert secret[:4] == b"WNDK"
        assert encode_secret(decode_secret(secret)) == secret
        public = encode_public(kp.public())
        assert decode_public(public) == kp.public()
        assert encode_public(decode_public(public)) == public

    def test_same_seed_same_bytes(self):
        assert encode_secret(wendy_keygen(b"s", 2)) == encode_secret(wendy_keygen(b"s", 2))

    def test_corrupt_files_rejected(self, wendy_keys):
        public = encode_public(wendy_keys(3, 1)[0].public())
        with pytest.raises(KeyFileError):
            decode_public(b"XXXX" + public[4:])
        with pytest.raises(KeyFileError):
            decode_public(public[:-3])
        with pytest.raises(KeyFileError):
            decode_public(public + b"\x00")
        with pytest.raises(KeyFileError):
            decode_secret(public)
