"""Token bucket used both as a meter (tagging) and as a shaper (release times).

Credit is kept as an exact integer in units of 1/(8e9) byte, so a rate of
``r`` bit/s accrues exactly ``r`` units per nanosecond. This keeps fractional
tokens while making every conformance verdict free of rounding.
"""
from .core import NS_PER_S

UNITS_PER_BYTE = 8 * NS_PER_S


class PermanentNonconformance(ValueError):
    """Packet larger than the bucket depth; it can never conform."""


class TokenBucket:
    def __init__(self, rate_bps, depth_bytes, tokens_bytes=None, now_ns=0):
        if rate_bps <= 0:
            raise ValueError("token rate must be positive")
        if depth_bytes <= 0:
            raise ValueError("bucket depth must be positive")
        self.rate_bps = int(round(rate_bps))
        self.depth_bytes = depth_bytes
        self._depth = int(depth_bytes * UNITS_PER_BYTE)
        if tokens_bytes is None:
            self._credit = self._depth
        else:
            self._credit = min(self._depth, int(tokens_bytes * UNITS_PER_BYTE))
        self.last_update = now_ns

    @property
    def tokens_bytes(self):
        return self._credit / UNITS_PER_BYTE

    def _refill(self, now_ns):
        elapsed = now_ns - self.last_update
        if elapsed < 0:
            raise ValueError("token bucket queried in the past")
        if elapsed:
            credit = self._credit + self.rate_bps * elapsed
            self._credit = credit if credit < self._depth else self._depth
            self.last_update = now_ns

    def tokens_at(self, now_ns):
        """Token level in bytes at ``now_ns`` without mutating state."""
        credit = self._credit + self.rate_bps * max(0, now_ns - self.last_update)
        return min(credit, self._depth) / UNITS_PER_BYTE

    def meter(self, size_bytes, now_ns):
        """Tag a packet: deduct and return True if tokens suffice, else False."""
        self._refill(now_ns)
        need = size_bytes * UNITS_PER_BYTE
        if self._credit >= need:
            self._credit -= need
            return True
        return False

    def next_conformance_ns(self, size_bytes, now_ns):
        """Earliest time at which ``meter`` would accept ``size_bytes``."""
        if size_bytes > self.depth_bytes:
            raise PermanentNonconformance(
                f"{size_bytes} B exceeds bucket depth {self.depth_bytes} B")
        credit = min(self._depth,
                     self._credit + self.rate_bps * max(0, now_ns - self.last_update))
        short = size_bytes * UNITS_PER_BYTE - credit
        if short <= 0:
            return now_ns
        return now_ns + -(-short // self.rate_bps)

    def __repr__(self):
        return (f"TokenBucket(rate={self.rate_bps} b/s, depth={self.depth_bytes} B, "
                f"tokens={self.tokens_bytes:.3f} B)")
