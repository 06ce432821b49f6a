"""Sensing codes: the signed folded-bin index of every channel at every node.

A channel q (one resolution_hz slot of the global grid) folds to the signed
residue of q modulo the node's FFT length, reduced into (-M/2, M/2]. The
vector of residues across nodes is the channel's code; two channels with the
same full code cannot be told apart, and the set of channels with all-distinct
codes spans lcm(node rates), the swarm's equivalent Nyquist rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConfigError, ValidationError
from .scenario import SwarmConfig


def _signed_residue(q, m: int):
    """Residue of q mod m mapped into (-m/2, m/2]; the +m/2 edge is kept."""
    r = np.mod(q, m)
    return np.where(2 * r > m, r - m, r)


@dataclass
class Codebook:
    q_total: int
    resolution_hz: float
    node_ids: list[int]
    m_points: list[int]
    zone_counts: list[int]
    codes: np.ndarray  # int, shape (P, Q), signed residues
    unambiguous_span_hz: float

    @property
    def span_channels(self) -> int:
        return math.lcm(*self.m_points)

    def bins(self) -> np.ndarray:
        """Unsigned FFT bin index per (node, channel): codes reduced mod M."""
        return np.vstack([np.mod(row, m) for row, m in zip(self.codes, self.m_points)])

    def row(self, node_id: int) -> int:
        try:
            return self.node_ids.index(node_id)
        except ValueError:
            raise ConfigError(f"unknown node_id {node_id}; have {self.node_ids}") from None

    def restrict(self, node_ids: list[int]) -> "Codebook":
        """Sub-codebook over a node subset, with the span recomputed.

        Used when a node drops out of the swarm: decoding continues over the
        remaining rows at a possibly reduced unambiguous span.
        """
        if not node_ids:
            raise ConfigError("cannot restrict a codebook to zero nodes")
        rows = [self.row(i) for i in node_ids]
        m_kept = [self.m_points[r] for r in rows]
        return Codebook(
            q_total=self.q_total,
            resolution_hz=self.resolution_hz,
            node_ids=list(node_ids),
            m_points=m_kept,
            zone_counts=[self.zone_counts[r] for r in rows],
            codes=self.codes[rows].copy(),
            unambiguous_span_hz=math.lcm(*m_kept) * self.resolution_hz,
        )


@dataclass
class CollisionReport:
    """Channel pairs sharing a full code column; empty means unambiguous."""

    pairs: list[tuple[int, int]]

    @property
    def empty(self) -> bool:
        return not self.pairs


def build_codebook(
    swarm: SwarmConfig,
    q_total: int | None = None,
    allow_ambiguous: bool = False,
) -> Codebook:
    """Code matrix over q_total channels (default: nyquist_rate / resolution).

    Channels beyond lcm(M_p) necessarily repeat earlier codes; requesting such
    a q_total demands allow_ambiguous=True as an explicit acknowledgement.
    """
    m_points = [swarm.m_points(i) for i in swarm.node_ids]
    span_channels = math.lcm(*m_points)
    if q_total is None:
        q_exact = swarm.nyquist_rate_hz / swarm.resolution_hz
        q_total = round(q_exact)
        if abs(q_exact - q_total) > 1e-6 * q_total:
            raise ConfigError(
                f"nyquist_rate_hz / resolution_hz = {q_exact} is not an integer"
            )
    if q_total < 1:
        raise ConfigError(f"q_total must be >= 1, got {q_total}")
    if q_total > span_channels and not allow_ambiguous:
        raise ConfigError(
            f"q_total {q_total} exceeds the unambiguous span of {span_channels} "
            f"channels; pass allow_ambiguous=True to accept code collisions"
        )
    q = np.arange(q_total, dtype=np.int64)
    codes = np.vstack([_signed_residue(q, m) for m in m_points])
    return Codebook(
        q_total=int(q_total),
        resolution_hz=swarm.resolution_hz,
        node_ids=list(swarm.node_ids),
        m_points=m_points,
        zone_counts=[-(-q_total // m) for m in m_points],
        codes=codes,
        unambiguous_span_hz=span_channels * swarm.resolution_hz,
    )


def unambiguous_span(swarm: SwarmConfig) -> float:
    """lcm of the node rates in Hz, i.e. lcm of the FFT lengths on the grid."""
    return swarm.unambiguous_span_hz


def signed_code_to_bin(code: int, m_points: int) -> int:
    """Map a signed residue back to its FFT bin index in [0, M)."""
    c = int(code)
    m = int(m_points)
    if not (-m < 2 * c <= m):
        raise ValidationError(f"code {code} is outside (-{m}/2, {m}/2]")
    return c % m


def verify_code_uniqueness(cb: Codebook) -> CollisionReport:
    """Exhaustive duplicate-column scan over all q_total channels.

    Sorts the columns lexicographically and walks equal runs, so the cost is
    O(P * Q log Q) rather than all-pairs.
    """
    order = np.lexsort(cb.codes[::-1])
    cols = cb.codes.T[order]
    same = np.all(cols[1:] == cols[:-1], axis=1)
    pairs: list[tuple[int, int]] = []
    start = 0
    for i in range(1, len(order) + 1):
        if i == len(order) or not same[i - 1]:
            if i - start > 1:
                group = sorted(int(order[j]) for j in range(start, i))
                pairs.extend(combinations(group, 2))
            start = i
    pairs.sort()
    return CollisionReport(pairs=pairs)
