from .bls import (
    AggregateSignature,
    AggregationError,
    BlsKeyPair,
    SignatureShare,
    bgls_verify_agg,
    bls_agg,
    bls_keygen,
    bls_sign_share,
    bls_verify_multi,
    bls_verify_share,
    verify_pop,
)
from .group import DecodeError, counting_pairings, pairing_counter, reset_pairing_counter
from .keyfile import KeyFileError, decode_public, decode_secret, encode_public, encode_secret
from .wendysig import (
    DiffMessage,
    DoubleSignError,
    WendyKeyPair,
    WendyPublicKey,
    WendySigner,
    default_ell,
    max_diff,
    wendy_agg,
    wendy_keygen,
    wendy_sign_share,
    wendy_verify_agg,
    wendy_verify_share,
)

__all__ = [
    "AggregateSignature",
    "AggregationError",
    "BlsKeyPair",
    "DecodeError",
    "DiffMessage",
    "DoubleSignError",
    "KeyFileError",
    "SignatureShare",
    "WendyKeyPair",
    "WendyPublicKey",
    "WendySigner",
    "bgls_verify_agg",
    "bls_agg",
    "bls_keygen",
    "bls_sign_share",
    "bls_verify_multi",
    "bls_verify_share",
    "counting_pairings",
    "decode_public",
    "decode_secret",
    "default_ell",
    "encode_public",
    "encode_secret",
    "max_diff",
    "pairing_counter",
    "reset_pairing_counter",
    "verify_pop",
    "wendy_agg",
    "wendy_keygen",
    "wendy_sign_share",
    "wendy_verify_agg",
    "wendy_verify_share",
]
