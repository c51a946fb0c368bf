"""Election manifest and phase enumeration."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Iterable, Mapping, Sequence

from ..crypto.encoding import encode
from ..crypto.errors import DecodeError
from ..crypto.group import GroupParams, sha256
from ..crypto.schnorr import KeyPair, SchnorrSignature, schnorr_sign, schnorr_verify
from .errors import ManifestInvalid

MANIFEST_DOMAIN = "vspace/manifest"
REGISTRY = "registry"
PPM = 1_000_000


class Phase(IntEnum):
    SETUP = 0
    REGISTRATION = 1
    VOTING = 2
    TALLY = 3
    CERTIFIED = 4


def officer_id(i: int) -> str:
    """Officer ids are 1-based: ``po-1`` .. ``po-n``."""
    return f"po-{i}"


def trustee_id(j: int) -> str:
    return f"trustee-{j}"


@dataclass(frozen=True)
class ElectionManifest:
    election_id: str
    candidates: tuple[str, ...]
    officer_vks: tuple[int, ...]
    officer_quorum: int
    trustee_vks: tuple[int, ...]
    threshold: int
    registrar_vk: int
    registry_vk: int
    attestation_authority_vk: int
    attestation_allow_list: tuple[bytes, ...]
    attestation_max_age: int
    phase_schedule: tuple[tuple[int, int, int], ...]  # (phase, open, close)
    group_label: str
    mfca_threshold_ppm: int = 800_000
    max_ring_size: int = 64
    signatures: tuple[tuple[str, SchnorrSignature], ...] = ()

    # derived views

    @property
    def k(self) -> int:
        return len(self.candidates)

    @property
    def n_trustees(self) -> int:
        return len(self.trustee_vks)

    @property
    def mfca_threshold(self) -> float:
        return self.mfca_threshold_ppm / PPM

    @property
    def officer_ids(self) -> tuple[str, ...]:
        return tuple(officer_id(i + 1) for i in range(len(self.officer_vks)))

    def officer_keys(self) -> dict[str, int]:
        return dict(zip(self.officer_ids, self.officer_vks))

    def trustee_keys(self) -> dict[int, int]:
        return {j + 1: vk for j, vk in enumerate(self.trustee_vks)}

    def author_keys(self) -> dict[str, int]:
        keys = self.officer_keys()
        keys.update({trustee_id(j): vk for j, vk in self.trustee_keys().items()})
        keys[REGISTRY] = self.registry_vk
        return keys

    def window(self, phase: Phase) -> tuple[int, int] | None:
        for p, lo, hi in self.phase_schedule:
            if p == phase:
                return lo, hi
        return None

    # encoding

    def unsigned_canonical(self) -> list:
        return [
            self.election_id, list(self.candidates), list(self.officer_vks), self.officer_quorum,
            list(self.trustee_vks), self.threshold, self.registrar_vk, self.registry_vk,
            self.attestation_authority_vk, list(self.attestation_allow_list), self.attestation_max_age,
            [list(w) for w in self.phase_schedule], self.group_label, self.mfca_threshold_ppm,
            self.max_ring_size,
        ]

    def signed_bytes(self) -> bytes:
        return encode([MANIFEST_DOMAIN, self.unsigned_canonical()])

    def digest(self) -> bytes:
        """Identity of the election; binds every proof context."""
        return sha256(self.signed_bytes())

    def to_canonical(self) -> list:
        return [self.unsigned_canonical(), [[oid, s.to_canonical()] for oid, s in self.signatures]]

    @classmethod
    def from_canonical(cls, value, params: GroupParams) -> "ElectionManifest":
        try:
            body, sigs = value
            (eid, cands, ovks, quorum, tvks, t, reg, rgy, auth, allow, max_age,
             sched, label, mfca, ring) = body
            m = cls(
                eid, tuple(cands), tuple(ovks), quorum, tuple(tvks), t, reg, rgy, auth,
                tuple(allow), max_age, tuple(tuple(w) for w in sched), label, mfca, ring,
                tuple((oid, SchnorrSignature.from_canonical(s, params)) for oid, s in sigs),
            )
        except (TypeError, ValueError) as exc:
            raise DecodeError(f"manifest: {exc}") from None
        m.validate(params)
        return m

    def validate(self, params: GroupParams) -> None:
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise ManifestInvalid(msg)

        need(isinstance(self.election_id, str) and self.election_id != "", "election_id")
        need(len(self.candidates) >= 2, "need at least two candidates")
        need(all(isinstance(c, str) for c in self.candidates), "candidate names must be strings")
        need(len(set(self.candidates)) == len(self.candidates), "candidate names must be unique")
        need(len(self.officer_vks) >= 1, "no officers")
        need(_is_int(self.officer_quorum) and 1 <= self.officer_quorum <= len(self.officer_vks),
             "officer_quorum outside [1, n_PO]")
        need(_is_int(self.threshold) and 1 <= self.threshold <= len(self.trustee_vks),
             "threshold outside [1, n]")
        keys = [*self.officer_vks, *self.trustee_vks, self.registrar_vk, self.registry_vk,
                self.attestation_authority_vk]
        need(all(params.is_element(x) and x != 1 for x in keys), "verification key not a group element")
        need(all(isinstance(h, bytes) and len(h) == 32 for h in self.attestation_allow_list),
             "allow-list entries must be 32-byte hashes")
        need(_is_int(self.attestation_max_age), "attestation_max_age")
        for w in self.phase_schedule:
            need(len(w) == 3 and all(_is_int(x) for x in w) and w[0] in set(Phase) and w[1] <= w[2],
                 f"bad phase window {w}")
        need(len({w[0] for w in self.phase_schedule}) == len(self.phase_schedule), "duplicate phase window")
        need(self.group_label == params.label, f"group {self.group_label!r} != {params.label!r}")
        need(_is_int(self.mfca_threshold_ppm) and self.mfca_threshold_ppm <= PPM, "mfca threshold")
        need(_is_int(self.max_ring_size) and self.max_ring_size >= 0, "max_ring_size")

    def valid_signers(self, params: GroupParams) -> set[str]:
        """Distinct officers whose signature over the unsigned manifest verifies."""
        keys = self.officer_keys()
        msg = self.signed_bytes()
        ok = set()
        for oid, sig in self.signatures:
            pk = keys.get(oid)
            if pk is not None and oid not in ok and schnorr_verify(params, pk, msg, MANIFEST_DOMAIN, sig):
                ok.add(oid)
        return ok


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x >= 0


def make_schedule(windows: Mapping[Phase, tuple[int, int]]) -> tuple[tuple[int, int, int], ...]:
    return tuple(sorted((int(p), lo, hi) for p, (lo, hi) in windows.items()))


def sign_manifest(
    params: GroupParams, draft: ElectionManifest, officers: Iterable[tuple[str, KeyPair]]
) -> ElectionManifest:
    unsigned = replace(draft, signatures=())
    msg = unsigned.signed_bytes()
    sigs = tuple((oid, schnorr_sign(params, kp, msg, MANIFEST_DOMAIN)) for oid, kp in officers)
    return replace(unsigned, signatures=sigs)


def officer_pairs(officers: Mapping[str, KeyPair] | Sequence[tuple[str, KeyPair]]) -> list[tuple[str, KeyPair]]:
    if isinstance(officers, Mapping):
        return list(officers.items())
    return list(officers)
