"""LWE-based Secure Remote Password: registration, key exchange with
signal/extractor reconciliation, key confirmation, wire codec, and a
Monte-Carlo validation harness."""

from .params import ProtocolParams, default_params, validate
from .modq import ModQMatrix
from .reconcile import BitMatrix, KeyBits, SignalMatrix, extract, signal
from .srp_core import ClientSession, ServerSession, VerifierRecord, register
from .credstore import CredentialStore
from .harness import HarnessReport, simulate

__all__ = [
    "ProtocolParams", "default_params", "validate",
    "ModQMatrix",
    "BitMatrix", "KeyBits", "SignalMatrix", "extract", "signal",
    "ClientSession", "ServerSession", "VerifierRecord", "register",
    "CredentialStore",
    "HarnessReport", "simulate",
]
