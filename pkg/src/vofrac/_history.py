"""Nonlocal history loads for the L1 operator, one time series per node.

At step ``j`` every node ``i`` needs

    H_i^j = sum_{s=0}^{j-1} w_i[j - s] * d_i[s],   d_i[s] = y_i^{s+1} - y_i^s,

with fixed per-node weights ``w_i``.  Done naively, the step costs
``O(N j)`` and streams the whole difference history each step.  Steps are
grouped into blocks of ``B``: when a block starts at ``J`` the part of the
sum with ``s < J`` is computed for all ``B`` targets in one pass (each
stored difference is read once per block), and the ``s >= J`` tail is added
per step.  Summation order is fixed, so results are reproducible bit for
bit.
"""

from __future__ import annotations

import numba
import numpy as np

DEFAULT_BLOCK = 128


@numba.njit(cache=True)
def _far_block(weights, diffs, J, B, out):
    # out[i, k] = sum_{s<J} weights[i, J + k - s] * diffs[i, s], k = 0..B-1
    n = weights.shape[0]
    acc = np.zeros(B)
    for i in range(n):
        acc[:] = 0.0
        w = weights[i]
        d = diffs[i]
        for s in range(J):
            ds = d[s]
            seg = w[J - s : J - s + B]
            for k in range(B):
                acc[k] += seg[k] * ds
        out[i, :] = acc


@numba.njit(cache=True)
def _near(weights, diffs, far, J, j, out):
    n = weights.shape[0]
    k = j - J
    for i in range(n):
        acc = far[i, k]
        w = weights[i]
        d = diffs[i]
        for s in range(J, j):
            acc += w[j - s] * d[s]
        out[i] = acc


class HistoryAccumulator:
    """Incremental history loads for a march of ``n_steps`` steps.

    ``weights`` has shape ``(n_nodes, >= n_steps)``; column ``m`` is the
    weight applied to a difference ``m`` levels back.
    """

    def __init__(self, weights: np.ndarray, n_steps: int, block: int = DEFAULT_BLOCK):
        n_nodes = weights.shape[0]
        if weights.shape[1] < n_steps:
            raise ValueError("weight table too short for the requested steps")
        self.block = int(block)
        padded = np.zeros((n_nodes, n_steps + self.block))
        usable = weights[:, : n_steps + self.block]
        padded[:, : usable.shape[1]] = usable
        self.weights = padded
        self.diffs = np.zeros((n_nodes, n_steps))
        self.far = np.zeros((n_nodes, self.block))
        self.count = 0
        self._out = np.zeros(n_nodes)

    def push(self, diff) -> None:
        self.diffs[:, self.count] = diff
        self.count += 1

    def load(self) -> np.ndarray:
        """History load for the step that will produce level ``count + 1``."""
        j = self.count
        J = j - j % self.block
        if j == J:
            _far_block(self.weights, self.diffs, J, self.block, self.far)
        _near(self.weights, self.diffs, self.far, J, j, self._out)
        return self._out.copy()


def history_load_direct(weights: np.ndarray, diffs: np.ndarray, j: int) -> np.ndarray:
    """Reference evaluation of the same sum with numpy (``diffs`` is node-major)."""
    if j == 0:
        return np.zeros(weights.shape[0])
    w = weights[:, j:0:-1]
    return np.einsum("is,is->i", w, diffs[:, :j])


def causal_convolution(weights: np.ndarray, series: np.ndarray, block: int = DEFAULT_BLOCK) -> np.ndarray:
    """``out[i, j] = sum_{s=0}^{j} weights[i, j - s] * series[i, s]`` for every ``j``.

    Runs through :class:`HistoryAccumulator`, so the summation order is the
    same fixed one the solver uses.
    """
    n_nodes, n = series.shape
    shifted = np.zeros((n_nodes, n + 1))
    shifted[:, 1:] = weights[:, :n]
    acc = HistoryAccumulator(shifted, n + 1, block=block)
    out = np.empty((n_nodes, n))
    for j in range(n):
        acc.push(series[:, j])
        out[:, j] = acc.load()
    return out
