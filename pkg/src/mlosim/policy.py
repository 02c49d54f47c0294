"""Traffic allocation policies applied when a flow arrives."""

from __future__ import annotations

import enum
from typing import Optional, Sequence

from .exceptions import UnservableFlowError


class PolicyKind(str, enum.Enum):
    SLCI = "SLCI"  # whole flow on the least congested interface
    MLSA = "MLSA"  # equal split over enabled interfaces
    MCAA = "MCAA"  # split proportional to free airtime
    SL_RANDOM = "SL_RANDOM"  # single-link station, pre-attached interface

    @classmethod
    def parse(cls, value) -> "PolicyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper().replace("-", "_"))
        except ValueError:
            raise ValueError(f"unknown policy {value!r}, valid: {[p.value for p in cls]}") from None


def _equal_split(bandwidth: float, n: int) -> list:
    shares = [bandwidth / n] * n
    shares[-1] = bandwidth - sum(shares[:-1])
    return shares


def allocate(bandwidth: float, enabled: Sequence, kind: PolicyKind, attachment: Optional[int] = None) -> list:
    """Split ``bandwidth`` over the station's enabled interfaces.

    ``enabled`` is a sequence of ``(interface, free_airtime, rate)`` ordered by
    band; the result is one share per entry, in the same order, summing to
    ``bandwidth``. ``attachment`` is the interface used by SL_RANDOM.
    """
    if not enabled:
        raise UnservableFlowError("station has no enabled interface")
    kind = PolicyKind.parse(kind)
    n = len(enabled)
    if kind is PolicyKind.MLSA:
        return _equal_split(bandwidth, n)
    if kind is PolicyKind.SLCI:
        # max() keeps the first (lowest band) entry on ties
        best = max(range(n), key=lambda i: enabled[i][1])
        return [bandwidth if i == best else 0.0 for i in range(n)]
    if kind is PolicyKind.SL_RANDOM:
        ifaces = [e[0] for e in enabled]
        if attachment not in ifaces:
            raise UnservableFlowError(f"attachment {attachment!r} is not an enabled interface {ifaces}")
        return [bandwidth if e[0] == attachment else 0.0 for e in enabled]
    # MCAA
    rho = [float(e[1]) for e in enabled]
    total = sum(rho)
    if total <= 0:
        return _equal_split(bandwidth, n)
    shares = [bandwidth * r / total for r in rho]
    # put the rounding residue on the largest share so the sum is exact
    top = max(range(n), key=lambda i: shares[i])
    shares[top] = bandwidth - sum(s for i, s in enumerate(shares) if i != top)
    return shares
