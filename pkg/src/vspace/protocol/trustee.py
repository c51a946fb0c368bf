"""Trustee node: holds one identity key and, after the ceremony, one secret share."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..crypto.dkg import (
    DecryptionShare,
    VSSDealing,
    dkg_deal,
    dkg_verify_share,
    open_share,
    partial_decrypt,
)
from ..crypto.elgamal import Ciphertext
from ..crypto.errors import ShareVerificationFailed
from ..crypto.group import GroupParams, Rng
from ..crypto.schnorr import KeyPair
from .state import tally_context


@dataclass
class TrusteeNode:
    index: int
    kp: KeyPair
    share: int | None = field(default=None, repr=False)

    def deal(self, params: GroupParams, threshold: int, trustee_pks: Mapping[int, int], rng: Rng) -> VSSDealing:
        return dkg_deal(params, self.index, threshold, trustee_pks, self.kp, rng)

    def receive(self, params: GroupParams, dealings: Sequence[VSSDealing], dealer_pks: Mapping[int, int]) -> None:
        """Open and check every dealer's share for this trustee, then keep the sum."""
        total = 0
        for d in dealings:
            s = open_share(params, d, self.index, self.kp, dealer_pks[d.dealer_index])
            if not dkg_verify_share(params, d, self.index, s):
                raise ShareVerificationFailed(d.dealer_index, self.index)
            total = (total + s) % params.q
        self.share = total

    def decryption_shares(
        self, params: GroupParams, manifest_hash: bytes, aggregate: Sequence[Ciphertext], vk: int, rng: Rng
    ) -> list[DecryptionShare]:
        if self.share is None:
            raise RuntimeError(f"trustee {self.index} holds no share")
        return [partial_decrypt(params, self.index, self.share, vk, ct, tally_context(manifest_hash, c), rng)
                for c, ct in enumerate(aggregate)]
