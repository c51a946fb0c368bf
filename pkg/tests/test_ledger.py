import random

import pytest

from vspace.crypto import TEST256, keygen
from vspace.ledger import (
    GENESIS_PREV,
    Checkpoint,
    DuplicateSigner,
    IndexOutOfRange,
    Ledger,
    ParseError,
    PayloadKind,
    QuorumNotMet,
    merkle_root,
    prove_inclusion,
    read_transcript,
    seal_checkpoint,
    verify_chain,
    verify_checkpoint,
    verify_inclusion,
)
from vspace.ledger import _leaf, _node, make_entry

RNG = random.Random(5)
AUTHOR = keygen(TEST256, RNG)
OFFICERS = [(f"po-{i}", keygen(TEST256, RNG)) for i in range(5)]
VKS = {oid: kp.pk for oid, kp in OFFICERS}
KEYS = {"registry": AUTHOR.pk}


def _log(n):
    log = Ledger(TEST256)
    for i in range(n):
        log.append(PayloadKind.CAST, f"payload-{i}".encode(), "registry", AUTHOR)
    return log


def test_genesis_and_chaining():
    log = _log(2)
    assert log.entries[0].index == 0 and log.entries[0].prev_hash == GENESIS_PREV
    assert log.entries[1].prev_hash == log.entries[0].entry_hash


def test_same_payload_distinct_hashes():
    log = Ledger(TEST256)
    a = log.append(PayloadKind.CAST, b"x", "registry", AUTHOR)
    b = log.append(PayloadKind.CAST, b"x", "registry", AUTHOR)
    assert a.entry_hash != b.entry_hash


def test_verify_chain_empty_and_valid():
    assert verify_chain(TEST256, [], KEYS)
    assert verify_chain(TEST256, _log(6).entries, KEYS)


@pytest.mark.parametrize("k", [0, 3, 5])
def test_flipped_payload_detected_at_index(k):
    entries = _log(6).entries
    e = entries[k]
    flipped = bytearray(e.payload)
    flipped[0] ^= 1
    entries[k] = type(e)(e.index, e.prev_hash, e.payload_kind, bytes(flipped), e.author, e.author_signature, e.entry_hash)
    v = verify_chain(TEST256, entries, KEYS)
    assert not v and v.bad_index == k


def test_removed_entry_detected():
    entries = _log(6).entries
    del entries[2]
    v = verify_chain(TEST256, entries, KEYS)
    assert not v and v.bad_index == 2


def test_rehashed_entry_without_key_fails_signature():
    entries = _log(3).entries
    forger = keygen(TEST256, RNG)
    entries[1] = make_entry(TEST256, 1, entries[0].entry_hash, PayloadKind.CAST, b"evil", "registry", forger)
    v = verify_chain(TEST256, entries, KEYS)
    assert not v and v.bad_index == 1 and "signature" in v.reason


def test_unknown_author():
    assert not verify_chain(TEST256, _log(2).entries, {})


def test_prefix_property():
    log = _log(9)
    for cut in range(len(log) + 1):
        prefix = log.entries[:cut]
        assert verify_chain(TEST256, prefix, KEYS)
        assert [e.to_bytes() for e in prefix] == [e.to_bytes() for e in log.entries[:cut]]


class TestMerkle:
    def test_single_leaf(self):
        log = _log(1)
        proof = prove_inclusion(log.entries, 0, 0)
        assert proof.sibling_hashes == ()
        root = merkle_root([log.entries[0].entry_hash])
        assert root == _leaf(log.entries[0].entry_hash)
        assert verify_inclusion(log.entries[0].entry_hash, proof, root)

    def test_odd_leaf_duplicated(self):
        hashes = [bytes([i]) * 32 for i in range(3)]
        l0, l1, l2 = (_leaf(h) for h in hashes)
        assert merkle_root(hashes) == _node(_node(l0, l1), _node(l2, l2))

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
    def test_all_indices_prove(self, n):
        log = _log(n)
        root = merkle_root([e.entry_hash for e in log.entries])
        for i in range(n):
            assert verify_inclusion(log.entries[i].entry_hash, prove_inclusion(log.entries, i, n - 1), root)

    def test_mutated_sibling(self):
        log = _log(7)
        root = merkle_root([e.entry_hash for e in log.entries])
        proof = prove_inclusion(log.entries, 4, 6)
        for k in range(len(proof.sibling_hashes)):
            sibs = list(proof.sibling_hashes)
            sibs[k] = bytes(32)
            bad = type(proof)(proof.entry_index, tuple(sibs), proof.directions)
            assert not verify_inclusion(log.entries[4].entry_hash, bad, root)

    def test_altered_leaf_changes_root(self):
        log = _log(7)
        hashes = [e.entry_hash for e in log.entries]
        proof = prove_inclusion(log.entries, 2, 6)
        altered = list(hashes)
        altered[2] = bytes(32)
        assert merkle_root(altered) != merkle_root(hashes)
        assert not verify_inclusion(hashes[2], proof, merkle_root(altered))
        for i in range(7):
            changed = list(hashes)
            changed[i] = b"\xff" * 32
            assert merkle_root(changed) != merkle_root(hashes)

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            prove_inclusion(_log(3).entries, 3, 2)


class TestCheckpoints:
    def test_quorum_met(self):
        log = _log(4)
        cp = seal_checkpoint(TEST256, log.entries, 3, OFFICERS[:3], quorum=3)
        assert verify_checkpoint(TEST256, log.entries, cp, VKS, 3)

    def test_quorum_not_met(self):
        log = _log(4)
        with pytest.raises(QuorumNotMet):
            seal_checkpoint(TEST256, log.entries, 3, OFFICERS[:2], quorum=3)
        cp = seal_checkpoint(TEST256, log.entries, 3, OFFICERS[:2])
        v = verify_checkpoint(TEST256, log.entries, cp, VKS, 3)
        assert not v and v.valid_signers == 2

    def test_duplicate_signer(self):
        log = _log(2)
        with pytest.raises(DuplicateSigner):
            seal_checkpoint(TEST256, log.entries, 1, [OFFICERS[0], OFFICERS[0]])
        cp = seal_checkpoint(TEST256, log.entries, 1, OFFICERS[:1])
        doubled = Checkpoint(cp.upto_index, cp.chain_head, cp.merkle_root, cp.signatures * 3)
        v = verify_checkpoint(TEST256, log.entries, doubled, VKS, 2)
        assert not v and v.valid_signers == 1

    def test_substitution_detected(self):
        log = _log(5)
        cp = seal_checkpoint(TEST256, log.entries, 4, OFFICERS[:3])
        for i in range(5):
            entries = list(log.entries)
            entries[i] = make_entry(TEST256, i, entries[i].prev_hash, PayloadKind.CAST, b"other", "registry", AUTHOR)
            assert not verify_checkpoint(TEST256, entries, cp, VKS, 3)

    def test_beyond_log(self):
        with pytest.raises(IndexOutOfRange):
            seal_checkpoint(TEST256, _log(2).entries, 2, OFFICERS)


class TestTranscriptFile:
    def test_roundtrip(self):
        log = _log(4)
        log.seal(OFFICERS[:3], 3)
        raw = log.to_bytes()
        assert raw.startswith(b"VSPC1")
        entries, cps = read_transcript(raw)
        assert [e.to_bytes() for e in entries] == [e.to_bytes() for e in log.entries]
        assert cps == log.checkpoints

    @pytest.mark.parametrize("cut", [0, 3, 7, 12, -1])
    def test_truncation_reports_offset(self, cut):
        raw = _log(2).to_bytes()
        with pytest.raises(ParseError) as exc:
            read_transcript(raw[:cut] if cut else b"XXXXX")
        assert exc.value.offset >= 0

    def test_garbage_record(self):
        raw = b"VSPC1" + (4).to_bytes(4, "big") + b"\x09\x00\x00\x00" + bytes(4)
        with pytest.raises(ParseError):
            read_transcript(raw)
