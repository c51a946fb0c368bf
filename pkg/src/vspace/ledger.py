"""Append-only hash-chained bulletin board with quorum-signed checkpoints.

Entries chain by hash; checkpoints commit to a Merkle tree over entry
hashes and carry officer signatures. The whole board serializes to the
``VSPC1`` transcript format described in FORMAT.md.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Mapping, Sequence, Union

from .crypto.encoding import decode, encode
from .crypto.errors import DecodeError
from .crypto.group import GroupParams, sha256
from .crypto.schnorr import KeyPair, SchnorrSignature, schnorr_sign, schnorr_verify

MAGIC = b"VSPC1"
GENESIS_PREV = bytes(32)
ENTRY_DOMAIN = "vspace/ledger-entry"
CHECKPOINT_DOMAIN = "vspace/checkpoint"
LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"
_LEN = struct.Struct(">I")


class PayloadKind(IntEnum):
    MANIFEST = 1
    DEALING = 2
    ELECTION_KEY = 3
    REGISTRATION = 4
    CAST = 5
    AGGREGATE_TALLY = 6
    DECRYPTION_SHARE = 7
    RESULT = 8
    CERTIFICATION = 9
    ATTESTATION_RECORD = 10
    PHASE_TRANSITION = 11


class LedgerError(Exception):
    pass


class QuorumNotMet(LedgerError):
    def __init__(self, got: int, need: int) -> None:
        super().__init__(f"quorum not met: {got} of {need} signatures")
        self.got = got
        self.need = need


class DuplicateSigner(LedgerError):
    pass


class IndexOutOfRange(LedgerError):
    pass


class ParseError(LedgerError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class LedgerEntry:
    index: int
    prev_hash: bytes
    payload_kind: PayloadKind
    payload: bytes
    author: str
    author_signature: SchnorrSignature
    entry_hash: bytes

    def to_canonical(self) -> list:
        return [self.index, self.prev_hash, int(self.payload_kind), self.payload, self.author,
                self.author_signature.to_canonical(), self.entry_hash]

    def to_bytes(self) -> bytes:
        return encode(self.to_canonical())

    @classmethod
    def from_bytes(cls, raw: bytes) -> "LedgerEntry":
        v = decode(raw)
        if not (isinstance(v, list) and len(v) == 7 and isinstance(v[5], list) and len(v[5]) == 2):
            raise DecodeError("ledger entry: expected 7 fields")
        index, prev, kind, payload, author, sig, digest = v
        if not (isinstance(index, int) and isinstance(prev, bytes) and isinstance(payload, bytes)
                and isinstance(author, str) and isinstance(digest, bytes)
                and all(isinstance(x, int) for x in sig)):
            raise DecodeError("ledger entry: field types")
        try:
            kind = PayloadKind(kind)
        except ValueError:
            raise DecodeError(f"unknown payload kind {kind}") from None
        return cls(index, prev, kind, payload, author, SchnorrSignature(*sig), digest)

    def decoded(self):
        return decode(self.payload)


def compute_entry_hash(index: int, prev_hash: bytes, kind: PayloadKind, payload: bytes, author: str) -> bytes:
    return sha256(encode(["vspace/entry", index, prev_hash, int(kind), payload, author]))


def make_entry(
    params: GroupParams, index: int, prev_hash: bytes, kind: PayloadKind, payload: bytes,
    author: str, author_kp: KeyPair,
) -> LedgerEntry:
    digest = compute_entry_hash(index, prev_hash, kind, payload, author)
    sig = schnorr_sign(params, author_kp, digest, ENTRY_DOMAIN)
    return LedgerEntry(index, prev_hash, kind, payload, author, sig, digest)


class Ledger:
    """Single-writer append-only log."""

    def __init__(self, params: GroupParams) -> None:
        self.params = params
        self.entries: list[LedgerEntry] = []
        self.checkpoints: list[Checkpoint] = []

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def head(self) -> bytes:
        return self.entries[-1].entry_hash if self.entries else GENESIS_PREV

    def append(self, kind: PayloadKind, payload: bytes, author: str, author_kp: KeyPair) -> LedgerEntry:
        entry = make_entry(self.params, len(self.entries), self.head, kind, payload, author, author_kp)
        self.entries.append(entry)
        return entry

    def seal(self, officers: Sequence[tuple[str, KeyPair]], quorum: int) -> "Checkpoint":
        cp = seal_checkpoint(self.params, self.entries, len(self.entries) - 1, officers, quorum)
        self.checkpoints.append(cp)
        return cp

    def to_bytes(self) -> bytes:
        return write_transcript(self.entries, self.checkpoints)


# chain verification

AuthorKeys = Union[Mapping[str, int], Callable[[str, int], "int | None"]]


@dataclass(frozen=True)
class ChainVerdict:
    ok: bool
    bad_index: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _lookup(keys: AuthorKeys, author: str, index: int) -> int | None:
    if callable(keys):
        return keys(author, index)
    return keys.get(author)


def verify_chain(params: GroupParams, entries: Sequence[LedgerEntry], author_keys: AuthorKeys) -> ChainVerdict:
    """Check indices, linkage, entry hashes and author signatures; stop at the first failure."""
    prev = GENESIS_PREV
    for i, e in enumerate(entries):
        if e.index != i:
            return ChainVerdict(False, i, "index out of sequence")
        if e.prev_hash != prev:
            return ChainVerdict(False, i, "broken linkage")
        if compute_entry_hash(e.index, e.prev_hash, e.payload_kind, e.payload, e.author) != e.entry_hash:
            return ChainVerdict(False, i, "entry hash mismatch")
        pk = _lookup(author_keys, e.author, i)
        if pk is None:
            return ChainVerdict(False, i, f"unknown author {e.author!r}")
        if not schnorr_verify(params, pk, e.entry_hash, ENTRY_DOMAIN, e.author_signature):
            return ChainVerdict(False, i, "bad author signature")
        prev = e.entry_hash
    return ChainVerdict(True)


# merkle tree


def _leaf(h: bytes) -> bytes:
    return sha256(LEAF_PREFIX + h)


def _node(left: bytes, right: bytes) -> bytes:
    return sha256(NODE_PREFIX + left + right)


def _levels(hashes: Sequence[bytes]) -> list[list[bytes]]:
    if not hashes:
        raise IndexOutOfRange("empty tree")
    level = [_leaf(h) for h in hashes]
    levels = [level]
    while len(level) > 1:
        if len(level) % 2:
            level = level + [level[-1]]
            levels[-1] = level
        level = [_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


def merkle_root(hashes: Sequence[bytes]) -> bytes:
    return _levels(hashes)[-1][0]


@dataclass(frozen=True)
class InclusionProof:
    entry_index: int
    sibling_hashes: tuple[bytes, ...]
    directions: tuple[str, ...]  # side of the sibling: "L" or "R"

    def to_canonical(self) -> list:
        return [self.entry_index, list(self.sibling_hashes), list(self.directions)]


def prove_inclusion(entries: Sequence[LedgerEntry], index: int, upto: int) -> InclusionProof:
    return inclusion_proofs(entries, [index], upto)[index]


def inclusion_proofs(entries: Sequence[LedgerEntry], indices: Sequence[int], upto: int) -> dict[int, InclusionProof]:
    """Proofs for several leaves of one tree, building the tree once."""
    if not 0 <= upto < len(entries) or any(not 0 <= i <= upto for i in indices):
        raise IndexOutOfRange(f"indices not covered by a tree over [0, {upto}]")
    levels = _levels([e.entry_hash for e in entries[: upto + 1]])
    return {i: _path(levels, i) for i in indices}


def _path(levels: list[list[bytes]], index: int) -> InclusionProof:
    siblings, directions = [], []
    pos = index
    for level in levels[:-1]:
        if pos % 2:
            siblings.append(level[pos - 1])
            directions.append("L")
        else:
            siblings.append(level[pos + 1])
            directions.append("R")
        pos //= 2
    return InclusionProof(index, tuple(siblings), tuple(directions))


def verify_inclusion(entry_hash: bytes, proof: InclusionProof, root: bytes) -> bool:
    if len(proof.sibling_hashes) != len(proof.directions):
        return False
    acc = _leaf(entry_hash)
    for sibling, side in zip(proof.sibling_hashes, proof.directions):
        if side == "L":
            acc = _node(sibling, acc)
        elif side == "R":
            acc = _node(acc, sibling)
        else:
            return False
    return acc == root


# checkpoints


@dataclass(frozen=True)
class Checkpoint:
    upto_index: int
    chain_head: bytes
    merkle_root: bytes
    signatures: tuple[tuple[str, SchnorrSignature], ...]

    def signed_bytes(self) -> bytes:
        return checkpoint_message(self.upto_index, self.chain_head, self.merkle_root)

    def to_canonical(self) -> list:
        return [self.upto_index, self.chain_head, self.merkle_root,
                [[oid, sig.to_canonical()] for oid, sig in self.signatures]]

    def to_bytes(self) -> bytes:
        return encode(self.to_canonical())

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Checkpoint":
        v = decode(raw)
        try:
            upto, head, root, sigs = v
            signatures = tuple((oid, SchnorrSignature(*sig)) for oid, sig in sigs)
        except (TypeError, ValueError):
            raise DecodeError("checkpoint: malformed") from None
        if not (isinstance(upto, int) and isinstance(head, bytes) and isinstance(root, bytes)):
            raise DecodeError("checkpoint: field types")
        return cls(upto, head, root, signatures)


def checkpoint_message(upto: int, head: bytes, root: bytes) -> bytes:
    return encode(["vspace/checkpoint", upto, head, root])


def seal_checkpoint(
    params: GroupParams,
    entries: Sequence[LedgerEntry],
    upto: int,
    officers: Sequence[tuple[str, KeyPair]],
    quorum: int | None = None,
) -> Checkpoint:
    if not 0 <= upto < len(entries):
        raise IndexOutOfRange(f"checkpoint index {upto} beyond log of length {len(entries)}")
    ids = [oid for oid, _ in officers]
    if len(set(ids)) != len(ids):
        raise DuplicateSigner("an officer appears more than once")
    if quorum is not None and len(ids) < quorum:
        raise QuorumNotMet(len(ids), quorum)
    head = entries[upto].entry_hash
    root = merkle_root([e.entry_hash for e in entries[: upto + 1]])
    msg = checkpoint_message(upto, head, root)
    sigs = tuple((oid, schnorr_sign(params, kp, msg, CHECKPOINT_DOMAIN)) for oid, kp in officers)
    return Checkpoint(upto, head, root, sigs)


@dataclass(frozen=True)
class CheckpointVerdict:
    ok: bool
    valid_signers: int
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_checkpoint(
    params: GroupParams,
    entries: Sequence[LedgerEntry],
    cp: Checkpoint,
    officer_vks: Mapping[str, int],
    quorum: int,
) -> CheckpointVerdict:
    """Recompute head and root from ``entries``; count distinct valid officer signatures."""
    if not 0 <= cp.upto_index < len(entries):
        return CheckpointVerdict(False, 0, "checkpoint beyond log")
    if entries[cp.upto_index].entry_hash != cp.chain_head:
        return CheckpointVerdict(False, 0, "chain head mismatch")
    if merkle_root([e.entry_hash for e in entries[: cp.upto_index + 1]]) != cp.merkle_root:
        return CheckpointVerdict(False, 0, "merkle root mismatch")
    msg = cp.signed_bytes()
    signers = set()
    for oid, sig in cp.signatures:
        pk = officer_vks.get(oid)
        if pk is not None and oid not in signers and schnorr_verify(params, pk, msg, CHECKPOINT_DOMAIN, sig):
            signers.add(oid)
    if len(signers) < quorum:
        return CheckpointVerdict(False, len(signers), f"QuorumNotMet(got={len(signers)}, need={quorum})")
    return CheckpointVerdict(True, len(signers))


# transcript file


def write_transcript(entries: Sequence[LedgerEntry], checkpoints: Sequence[Checkpoint]) -> bytes:
    out = bytearray(MAGIC)
    for e in entries:
        raw = e.to_bytes()
        out += _LEN.pack(len(raw)) + raw
    out += _LEN.pack(0)
    for cp in checkpoints:
        raw = cp.to_bytes()
        out += _LEN.pack(len(raw)) + raw
    return bytes(out)


def read_transcript(data: bytes) -> tuple[list[LedgerEntry], list[Checkpoint]]:
    if not data.startswith(MAGIC):
        raise ParseError("missing VSPC1 magic", 0)
    pos = len(MAGIC)
    entries: list[LedgerEntry] = []
    checkpoints: list[Checkpoint] = []
    in_checkpoints = False
    while pos < len(data):
        if pos + 4 > len(data):
            raise ParseError("truncated length prefix", pos)
        (length,) = _LEN.unpack_from(data, pos)
        if length == 0:
            if in_checkpoints:
                raise ParseError("unexpected section separator", pos)
            in_checkpoints = True
            pos += 4
            continue
        start, end = pos + 4, pos + 4 + length
        if end > len(data):
            raise ParseError("truncated record", pos)
        try:
            if in_checkpoints:
                checkpoints.append(Checkpoint.from_bytes(data[start:end]))
            else:
                entries.append(LedgerEntry.from_bytes(data[start:end]))
        except DecodeError as exc:
            raise ParseError(str(exc), start + (exc.offset or 0)) from None
        pos = end
    if not in_checkpoints:
        raise ParseError("missing checkpoint section", pos)
    return entries, checkpoints
