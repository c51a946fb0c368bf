"""Post-hoc transcript tampering for auditor mutation tests.

Each field names one mutation class. Most classes re-sign the chain and
re-seal every checkpoint with the keyring after the edit, so the only
inconsistency left is the semantic one the auditor must catch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..crypto.encoding import decode, encode
from ..crypto.group import GroupParams
from ..ledger import (
    Checkpoint,
    LedgerEntry,
    PayloadKind,
    make_entry,
    read_transcript,
    seal_checkpoint,
    write_transcript,
)
from .world import Keyring


def _bump(params: GroupParams, x: int) -> int:
    """Another subgroup element: multiply by the generator."""
    return x * params.g % params.p


def _m_ciphertext(v, params):
    v[0][0][1] = _bump(params, v[0][0][1])
    return v


def _m_binary(v, params):
    v[1][0][4] = (v[1][0][4] + 1) % params.q
    return v


def _m_sum(v, params):
    v[2][1] = (v[2][1] + 1) % params.q
    return v


def _m_ring(v, params):
    v[5][2][0] = (v[5][2][0] + 1) % params.q
    return v


def _m_counts(v, params):
    v[0][0] += 1
    return v


def _m_share(v, params):
    v[1][1] = _bump(params, v[1][1])
    return v


def _m_credential(v, params):
    v[2][2] = v[2][2] + "x"
    return v


def _m_aggregate(v, params):
    v[0][0][1] = _bump(params, v[0][0][1])
    return v


@dataclass(frozen=True)
class Mutation:
    default_entry: str
    expected_check: str
    reseal: bool
    mutate: Callable | None = None


FIELDS: dict[str, Mutation] = {
    "payload": Mutation("cast:0", "chain.integrity", False),
    "ciphertext": Mutation("cast:0", "chain.integrity", False, _m_ciphertext),
    "binary_proof": Mutation("cast:0", "cast.binary_proofs", True, _m_binary),
    "sum_proof": Mutation("cast:0", "cast.sum_proof", True, _m_sum),
    "ring_signature": Mutation("cast:0", "cast.ring_signature", True, _m_ring),
    "key_image": Mutation("cast:0", "cast.nullifier", True),
    "counts": Mutation("result:0", "tally.result", True, _m_counts),
    "decryption_share": Mutation("decryption_share:0", "tally.shares", True, _m_share),
    "checkpoint_signature": Mutation("checkpoint:-1", "checkpoint.quorum", False),
    "credential": Mutation("registration:0", "registration.credentials", True, _m_credential),
    "aggregate": Mutation("aggregate_tally:0", "tally.aggregate", True, _m_aggregate),
}


def resolve_entry(entries: list[LedgerEntry], selector: int | str) -> int:
    if isinstance(selector, int):
        if not 0 <= selector < len(entries):
            raise IndexError(f"entry {selector} out of range")
        return selector
    kind_name, _, nth = selector.partition(":")
    kind = PayloadKind[kind_name.upper()]
    hits = [e.index for e in entries if e.payload_kind == kind]
    if not hits:
        raise IndexError(f"no {kind.name} entries")
    return hits[int(nth or 0)]


def reseal(
    params: GroupParams, entries: list[LedgerEntry], checkpoints: list[Checkpoint], keys: Keyring, start: int
) -> tuple[list[LedgerEntry], list[Checkpoint]]:
    """Re-hash and re-sign entries from ``start`` on, then re-seal all checkpoints."""
    authors = keys.author_kps()
    out = list(entries[:start])
    for e in entries[start:]:
        prev = out[-1].entry_hash if out else bytes(32)
        out.append(make_entry(params, len(out), prev, e.payload_kind, e.payload, e.author, authors[e.author]))
    cps = []
    for cp in checkpoints:
        officers = [(oid, keys.officers[oid]) for oid, _ in cp.signatures]
        cps.append(seal_checkpoint(params, out, min(cp.upto_index, len(out) - 1), officers))
    return out, cps


def tamper(
    data: bytes, params: GroupParams, keys: Keyring, field: str, entry: int | str | None = None
) -> tuple[bytes, str]:
    """Apply one mutation class; returns the new transcript and the check that must fail."""
    mutation = FIELDS[field]
    entries, checkpoints = read_transcript(data)
    selector = mutation.default_entry if entry is None else entry

    if field == "checkpoint_signature":
        i = int(str(selector).partition(":")[2] or -1) if isinstance(selector, str) else selector
        cp = checkpoints[i]
        sigs = [(oid, type(s)(s.challenge, (s.response + 1) % params.q)) for oid, s in cp.signatures]
        checkpoints[i] = Checkpoint(cp.upto_index, cp.chain_head, cp.merkle_root, tuple(sigs))
        return write_transcript(entries, checkpoints), mutation.expected_check

    idx = resolve_entry(entries, selector)
    e = entries[idx]
    if field == "payload":
        flipped = bytearray(e.payload)
        flipped[len(flipped) // 2] ^= 0x01
        entries[idx] = LedgerEntry(e.index, e.prev_hash, e.payload_kind, bytes(flipped), e.author,
                                   e.author_signature, e.entry_hash)
        return write_transcript(entries, checkpoints), mutation.expected_check
    if field == "key_image":
        # replay the same cast right after itself
        entries.insert(idx + 1, e)
        shifted = [Checkpoint(cp.upto_index + (cp.upto_index > idx), cp.chain_head, cp.merkle_root, cp.signatures)
                   for cp in checkpoints]
        entries, checkpoints = reseal(params, entries, shifted, keys, idx + 1)
        return write_transcript(entries, checkpoints), mutation.expected_check

    payload = encode(mutation.mutate(decode(e.payload), params))
    entries[idx] = LedgerEntry(e.index, e.prev_hash, e.payload_kind, payload, e.author,
                               e.author_signature, e.entry_hash)
    if mutation.reseal:
        entries, checkpoints = reseal(params, entries, checkpoints, keys, idx)
    return write_transcript(entries, checkpoints), mutation.expected_check
