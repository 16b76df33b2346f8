"""Blocks, quorum certificates and protocol messages."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Any

GENESIS_ID = bytes(32)


def _h(*parts: bytes) -> bytes:
    d = hashlib.sha256()
    for p in parts:
        d.update(struct.pack(">I", len(p)))
        d.update(p)
    return d.digest()


@dataclass(frozen=True)
class QC:
    """Quorum certificate on (block, view), optionally carrying no-commit proofs.

    ``nc`` is a chain of proofs in increasing view order; each one promotes
    the certificate to the proof's view.
    """

    block: bytes
    view: int
    signers: tuple[int, ...]
    sigma: Any = field(default=None, compare=False, repr=False)
    nc: tuple = ()

    @property
    def eff(self) -> int:
        return self.nc[-1].v if self.nc else self.view

    @property
    def digest(self) -> bytes:
        ncs = b"".join(struct.pack(">Q", p.v) + bytes(str(sorted((c.replica, c.c) for c in p.claims)), "ascii")
                       for p in self.nc)
        return _h(b"qc", self.block, struct.pack(">Q", self.view), bytes(str(self.signers), "ascii"), ncs)

    def promoted(self, proof) -> QC:
        return QC(self.block, self.view, self.signers, self.sigma, self.nc + (proof,))


GENESIS_QC = QC(GENESIS_ID, 0, ())


@dataclass(frozen=True)
class Block:
    view: int
    parent: bytes
    qc: QC
    payload: bytes
    height: int

    @property
    def id(self) -> bytes:
        if self.height == 0:
            return GENESIS_ID
        return _h(b"block", struct.pack(">QQ", self.view, self.height), self.parent, self.qc.digest, self.payload)

    def short(self) -> str:
        return self.id.hex()[:8]


GENESIS = Block(0, GENESIS_ID, GENESIS_QC, b"", 0)


def vote_message(block_id: bytes, view: int) -> bytes:
    return b"WENDY-VOTE" + block_id + struct.pack(">Q", view)


@dataclass(frozen=True)
class Vote:
    """A vote on ``block`` labeled with the view of the certificate it feeds."""

    sender: int
    view: int
    block: bytes
    share: Any = field(compare=False, repr=False)


@dataclass(frozen=True)
class Proposal:
    sender: int
    view: int
    block: Block


@dataclass(frozen=True)
class NewView:
    sender: int
    view: int
    qc: QC
    claim: Any
    share: Any = field(repr=False)
    vote: Vote | None = None


@dataclass(frozen=True)
class UpdateView:
    sender: int
    view: int
    evidence: tuple[NewView, ...]


@dataclass(frozen=True)
class Nack:
    sender: int
    view: int
    qc: QC


@dataclass(frozen=True)
class NoCommit:
    sender: int
    view: int
    proof: Any
    block: Block


MESSAGE_KINDS = {
    Vote: "vote",
    Proposal: "proposal",
    NewView: "newview",
    UpdateView: "updateview",
    Nack: "nack",
    NoCommit: "nocommit",
}


def kind_of(msg) -> str:
    return MESSAGE_KINDS[type(msg)]
