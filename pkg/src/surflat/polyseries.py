"""Truncated multivariate polynomials over stacked coefficient arrays.

Monomials of total degree at most cap are enumerated once per ring; a
polynomial batch is a (n_monomials, width) float array, one column per site
or pair. Multiplication is a single scatter-add over precomputed index
triples, and exp of a constant-free polynomial terminates after cap steps by
nilpotency of the truncation ideal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


def _monomials(n_vars: int, cap: int):
    out = []
    for degree in range(cap + 1):
        for combo in itertools.combinations_with_replacement(
                range(n_vars), degree):
            exps = [0] * n_vars
            for v in combo:
                exps[v] += 1
            out.append(tuple(exps))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class PolyRing:
    """Truncated polynomial ring in n_vars variables, total degree <= cap."""

    n_vars: int
    cap: int
    monomials: tuple
    index: dict
    mul_table: np.ndarray

    @classmethod
    def create(cls, n_vars: int, cap: int) -> "PolyRing":
        monomials = _monomials(n_vars, cap)
        index = {m: i for i, m in enumerate(monomials)}
        triples = []
        for i, mi in enumerate(monomials):
            if sum(mi) > cap:
                continue
            for j, mj in enumerate(monomials):
                if sum(mi) + sum(mj) > cap:
                    continue
                mk = tuple(a + b for a, b in zip(mi, mj))
                triples.append((i, j, index[mk]))
        return cls(n_vars, cap, monomials, index,
                   np.array(triples, dtype=np.intp))

    def zeros(self, width: int) -> np.ndarray:
        return np.zeros((len(self.monomials), width))

    def constant(self, value: float, width: int) -> np.ndarray:
        out = self.zeros(width)
        out[0] = value
        return out

    def coeff(self, poly: np.ndarray, exps) -> np.ndarray:
        """Coefficient row of the given exponent tuple."""
        return poly[self.index[tuple(exps)]]

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = self.zeros(a.shape[1])
        i, j, k = self.mul_table.T
        np.add.at(out, k, a[i] * b[j])
        return out

    def power(self, a: np.ndarray, n: int) -> np.ndarray:
        out = self.constant(1.0, a.shape[1])
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def exp(self, a: np.ndarray) -> np.ndarray:
        if np.any(a[0] != 0.0):
            raise ValueError("exp needs a vanishing constant term")
        out = self.constant(1.0, a.shape[1])
        term = self.constant(1.0, a.shape[1])
        for n in range(1, self.cap + 1):
            term = self.mul(term, a) / n
            out = out + term
        return out
