from .audit import AuditReport, IncrementalAudit, Violation, safety_audit
from .auth import Authenticator, PairingAuth, SymbolicAuth
from .replica import MODES, RELAXED, STRICT, BlockStore, Replica, commit_target, leader_of
from .trace import TraceRecord
from .types import GENESIS, GENESIS_QC, QC, Block, Nack, NewView, NoCommit, Proposal, UpdateView, Vote

__all__ = [
    "AuditReport",
    "Authenticator",
    "Block",
    "BlockStore",
    "GENESIS",
    "GENESIS_QC",
    "IncrementalAudit",
    "MODES",
    "Nack",
    "NewView",
    "NoCommit",
    "PairingAuth",
    "Proposal",
    "QC",
    "RELAXED",
    "Replica",
    "STRICT",
    "SymbolicAuth",
    "TraceRecord",
    "UpdateView",
    "Violation",
    "Vote",
    "commit_target",
    "leader_of",
    "safety_audit",
]
