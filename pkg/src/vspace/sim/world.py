"""Simulated participants and every secret they hold.

Nothing here is visible to the auditor; the keyring exists so fixtures can
forge consistently re-signed transcripts for mutation tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..crypto.group import GroupParams, Rng, derive_rng
from ..crypto.schnorr import KeyPair, keygen
from ..identity import (
    AuthSession,
    DidDocument,
    EligibilityCredential,
    attest_node,
    issue_credential,
    measure,
    mfca_update,
)
from ..protocol.manifest import REGISTRY, ElectionManifest, Phase, make_schedule, officer_id
from ..protocol.trustee import TrusteeNode

NODE_IMAGE = b"vspace-node/1"
ATTESTATION_MAX_AGE = 5
SETUP_TICK = 8
CREDENTIAL_TTL = 1000
MFCA_WEIGHTS = {"face": 0.5, "keystroke": 0.3, "behaviour": 0.2}


@dataclass
class Keyring:
    registry: KeyPair
    registrar: KeyPair
    authority: KeyPair
    officers: dict[str, KeyPair]
    trustees: list[TrusteeNode]

    def author_kps(self) -> dict[str, KeyPair]:
        out = dict(self.officers)
        out.update({f"trustee-{t.index}": t.kp for t in self.trustees})
        out[REGISTRY] = self.registry
        return out


@dataclass
class Voter:
    index: int
    kp: KeyPair
    did_doc: DidDocument
    credential: EligibilityCredential
    session: AuthSession | None = None
    label: str = "voter"
    rng: Rng = field(default=None, repr=False)

    @property
    def did(self) -> str:
        return self.did_doc.did


def build_keyring(params: GroupParams, seed: int, n_officers: int, n_trustees: int) -> Keyring:
    rng = derive_rng(seed, "keyring")
    return Keyring(
        registry=keygen(params, rng),
        registrar=keygen(params, rng),
        authority=keygen(params, rng),
        officers={officer_id(i): keygen(params, rng) for i in range(1, n_officers + 1)},
        trustees=[TrusteeNode(j, keygen(params, rng)) for j in range(1, n_trustees + 1)],
    )


def draft_manifest(
    params: GroupParams,
    keys: Keyring,
    election_id: str,
    candidates: list[str],
    officer_quorum: int,
    threshold: int,
    registration: tuple[int, int],
    voting: tuple[int, int],
    mfca_threshold: float = 0.8,
    max_ring_size: int = 64,
) -> ElectionManifest:
    return ElectionManifest(
        election_id=election_id,
        candidates=tuple(candidates),
        officer_vks=tuple(kp.pk for kp in keys.officers.values()),
        officer_quorum=officer_quorum,
        trustee_vks=tuple(t.kp.pk for t in keys.trustees),
        threshold=threshold,
        registrar_vk=keys.registrar.pk,
        registry_vk=keys.registry.pk,
        attestation_authority_vk=keys.authority.pk,
        attestation_allow_list=(measure(NODE_IMAGE),),
        attestation_max_age=ATTESTATION_MAX_AGE,
        phase_schedule=make_schedule({Phase.REGISTRATION: registration, Phase.VOTING: voting}),
        group_label=params.label,
        mfca_threshold_ppm=round(mfca_threshold * 1_000_000),
        max_ring_size=max_ring_size,
    )


def node_attestations(params: GroupParams, keys: Keyring, now: int, image: bytes = NODE_IMAGE) -> list:
    nodes = [*keys.officers, REGISTRY]
    return [attest_node(params, keys.authority, node, measure(image), now) for node in nodes]


def make_voter(
    params: GroupParams, keys: Keyring, election_id: str, seed: int, index: int, label: str = "voter"
) -> Voter:
    rng = derive_rng(seed, label, index)
    kp = keygen(params, rng)
    doc = DidDocument.create(kp.pk)
    cred = issue_credential(params, keys.registrar, doc.did, election_id, "district-1", CREDENTIAL_TTL)
    return Voter(index, kp, doc, cred, label=label, rng=rng)


def authenticate(voter: Voter, now: int, floor: float = 0.85) -> AuthSession:
    """Fresh MFCA session with modality scores drawn from ``[floor, 1]``."""
    session = AuthSession(voter.did, MFCA_WEIGHTS)
    for modality in MFCA_WEIGHTS:
        session = mfca_update(session, modality, round(voter.rng.uniform(floor, 1.0), 6), now)
    voter.session = session
    return session
