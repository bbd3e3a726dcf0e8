"""Per-node link-state memory.

Three symmetric N x N matrices with per-entry timestamps: social tie R
(encounter counts over a sliding window), empirical adjacency A, and
measured distance D. Encounter windows are ring buffers of per-interval
flags kept only for directly observed peers; table exchange merges carry
scalar values with newer-stamp-wins semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAT_R, MAT_A, MAT_D = 0, 1, 2
_MAT_NAMES = {MAT_R: "R", MAT_A: "A", MAT_D: "D"}

NEVER = -math.inf


class TimestampedMatrix:
    """Symmetric value matrix plus last-update stamps; diagonal unused."""

    __slots__ = ("values", "stamps")

    def __init__(self, n: int, fill: float):
        self.values = np.full((n, n), fill)
        self.stamps = np.full((n, n), NEVER)

    def set_entry(self, i: int, j: int, value: float, stamp: float) -> None:
        """Unconditional local observation; keeps both triangles in step."""
        self.values[i, j] = self.values[j, i] = value
        self.stamps[i, j] = self.stamps[j, i] = stamp

    def merge_entry(self, i: int, j: int, value: float, stamp: float) -> bool:
        """Adopt (value, stamp) iff strictly newer; equal stamps keep local."""
        if stamp > self.stamps[i, j]:
            self.set_entry(i, j, value, stamp)
            return True
        return False


@dataclass(slots=True)
class TableRows:
    """Serialized (matrix, i, j, value, stamp) rows for table exchange."""

    mat: np.ndarray
    i: np.ndarray
    j: np.ndarray
    value: np.ndarray
    stamp: np.ndarray

    def __len__(self) -> int:
        return len(self.mat)

    @classmethod
    def empty(cls) -> "TableRows":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                   np.empty(0, dtype=np.int64), np.empty(0), np.empty(0))


class EncounterWindows:
    """Sliding encounter flags per directly observed peer.

    Each peer has a ring of r_mem per-interval booleans kept as a bitmask
    (newest bit lowest). The window only reflects local observation; peers
    with an all-clear window are dropped and treated as untracked again.
    """

    __slots__ = ("r_mem", "_mask", "_pending", "_full")

    def __init__(self, r_mem: int):
        if r_mem < 1 or r_mem > 62:
            raise ValueError("r_mem out of supported range")
        self.r_mem = r_mem
        self._full = (1 << r_mem) - 1
        self._mask: dict[int, int] = {}
        self._pending: set[int] = set()

    def mark(self, other: int) -> None:
        """Record an encounter in the current measurement interval."""
        self._pending.add(other)

    def tracked(self) -> list[int]:
        return sorted(set(self._mask) | self._pending)

    def roll(self, other: int) -> tuple[int, bool]:
        """Close the current interval for one peer: push its pending flag.

        Returns (encounter count, window-changed). An untracked peer with no
        pending encounter stays untracked and reports (0, False).
        """
        flag = 1 if other in self._pending else 0
        self._pending.discard(other)
        old = self._mask.get(other, 0)
        new = ((old << 1) | flag) & self._full
        changed = new != old
        if new:
            self._mask[other] = new
        else:
            self._mask.pop(other, None)
        return int(new.bit_count()), changed

    def count(self, other: int) -> int:
        return int(self._mask.get(other, 0).bit_count())


class LinkStateStore:
    """One node's R/A/D tables, encounter windows, and dirty-row queue."""

    def __init__(self, n_nodes: int, r_mem: int = 10):
        self.n = n_nodes
        self.r_mem = r_mem
        self.R = TimestampedMatrix(n_nodes, 0.0)
        self.A = TimestampedMatrix(n_nodes, 0.0)
        self.D = TimestampedMatrix(n_nodes, math.inf)
        self.windows = EncounterWindows(r_mem)
        self._mats = (self.R, self.A, self.D)
        self._dirty: set[tuple[int, int, int]] = set()

    def matrix(self, mat: int) -> TimestampedMatrix:
        return self._mats[mat]

    @staticmethod
    def _key(mat: int, i: int, j: int) -> tuple[int, int, int]:
        return (mat, i, j) if i < j else (mat, j, i)

    def set_entry(self, mat: int, i: int, j: int, value: float,
                  stamp: float) -> None:
        self._mats[mat].set_entry(i, j, value, stamp)
        self._dirty.add(self._key(mat, i, j))

    def merge_entry(self, mat: int, i: int, j: int, value: float,
                    stamp: float) -> bool:
        changed = self._mats[mat].merge_entry(i, j, value, stamp)
        if changed:
            self._dirty.add(self._key(mat, i, j))
        return changed

    def merge_neighbor_entries(self, sender: int, nbrs: np.ndarray,
                               stamps: np.ndarray) -> None:
        """Vectorized merge_entry(MAT_A, sender, nbr, 1.0, stamp) over a
        HELLO neighbor list (the hottest merge path)."""
        A = self.A
        take = stamps > A.stamps[sender, nbrs]
        if not take.any():
            return
        tn, ts = nbrs[take], stamps[take]
        A.values[sender, tn] = 1.0
        A.values[tn, sender] = 1.0
        A.stamps[sender, tn] = ts
        A.stamps[tn, sender] = ts
        add = self._dirty.add
        for b in tn.tolist():
            add(self._key(MAT_A, sender, b))

    def merge_rows(self, rows: TableRows) -> int:
        """Vectorized newer-wins merge of an exchange payload; adopted rows
        become dirty here as well so they keep propagating. Returns the
        number of adopted rows."""
        adopted = 0
        for m, M in enumerate(self._mats):
            sel = rows.mat == m
            if not sel.any():
                continue
            i, j = rows.i[sel], rows.j[sel]
            v, s = rows.value[sel], rows.stamp[sel]
            take = s > M.stamps[i, j]
            if not take.any():
                continue
            ti, tj, tv, ts = i[take], j[take], v[take], s[take]
            M.values[ti, tj] = tv
            M.values[tj, ti] = tv
            M.stamps[ti, tj] = ts
            M.stamps[tj, ti] = ts
            adopted += int(take.sum())
            for a, b in zip(ti.tolist(), tj.tolist()):
                self._dirty.add(self._key(m, a, b))
        return adopted

    def record_interval(self, self_id: int, other: int,
                        interval_end: float) -> int:
        """Close the current measurement interval for one peer: the social
        tie becomes the window's encounter count, stamped with the interval
        end whenever the window content changed."""
        count, changed = self.windows.roll(other)
        if changed:
            self.set_entry(MAT_R, self_id, other, float(count), interval_end)
        return count

    def _rows_from_keys(self, keys: list[tuple[int, int, int]]) -> TableRows:
        if not keys:
            return TableRows.empty()
        mat = np.array([k[0] for k in keys], dtype=np.int64)
        i = np.array([k[1] for k in keys], dtype=np.int64)
        j = np.array([k[2] for k in keys], dtype=np.int64)
        value = np.array([self._mats[m].values[a, b]
                          for m, a, b in keys])
        stamp = np.array([self._mats[m].stamps[a, b]
                          for m, a, b in keys])
        return TableRows(mat, i, j, value, stamp)

    def _freshest_dirty(self, cap: int) -> list[tuple[int, int, int]]:
        keys = sorted(
            self._dirty,
            key=lambda k: (-self._mats[k[0]].stamps[k[1], k[2]], k))
        return keys[:cap]

    def peek_dirty_rows(self, cap: int) -> TableRows:
        """Freshest changed rows by stamp, without consuming them."""
        return self._rows_from_keys(self._freshest_dirty(cap))

    def take_dirty_rows(self, cap: int) -> TableRows:
        """Freshest changed rows by stamp; the selected rows are no longer
        pending (unsent overflow stays queued for the next emission)."""
        keys = self._freshest_dirty(cap)
        self._dirty.difference_update(keys)
        return self._rows_from_keys(keys)

    def dirty_count(self) -> int:
        return len(self._dirty)

    def snapshot_rows(self, pairs: list[tuple[int, int]] | None = None
                      ) -> TableRows:
        """Serializable rows for every populated entry (or only the given
        pairs), one row per populated matrix per pair."""
        keys = []
        if pairs is None:
            for m, M in enumerate(self._mats):
                ii, jj = np.nonzero(np.triu(M.stamps > NEVER, 1))
                keys += [(m, int(a), int(b)) for a, b in zip(ii, jj)]
        else:
            for m, M in enumerate(self._mats):
                for a, b in pairs:
                    a, b = (a, b) if a < b else (b, a)
                    if M.stamps[a, b] > NEVER:
                        keys.append((m, a, b))
        return self._rows_from_keys(keys)
