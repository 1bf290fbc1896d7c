"""Branch-then-merge regression network.

Each input feature first passes through its own small stack of tansig
layers (default 1 -> 2 -> 2), so features pick up nonlinearity before they
interact. The branch outputs are concatenated and reduced by a logsig
embedding layer narrower than the input count, followed by logsig fully
connected layers and a linear scalar output:

    x_i -> [2 tansig] -> [2 tansig]  (i = 1..3)
    concat(6) -> [2 logsig] -> [3 logsig] -> [2 logsig] -> [1 linear]

Parameter layout (flat vector): the branch blocks in input order, then the
embedding, fully connected and output layers. Inside every layer the weight
matrix (``out x in``, row-major) precedes the bias.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .activations import ACTIVATIONS
from .lm import TrainingDivergedError


@dataclass(frozen=True)
class NetworkSpec:
    input_count: int = 3
    branch_widths: tuple[int, ...] = (2, 2)
    embedding_width: int = 2
    fc_widths: tuple[int, ...] = (3, 2)
    output_count: int = 1
    branch_activation: str = "tansig"
    hidden_activation: str = "logsig"
    output_activation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "branch_widths", tuple(int(w) for w in self.branch_widths))
        object.__setattr__(self, "fc_widths", tuple(int(w) for w in self.fc_widths))
        if self.input_count < 1:
            raise ValueError("input_count must be positive")
        if not self.branch_widths:
            raise ValueError("at least one branch layer is required")
        if any(w < 1 for w in self.branch_widths + self.fc_widths) or self.embedding_width < 1:
            raise ValueError("layer widths must be positive")
        if self.embedding_width >= self.input_count:
            raise ValueError(
                f"embedding width {self.embedding_width} must be smaller than the "
                f"input count {self.input_count}"
            )
        if self.output_count != 1:
            raise ValueError("only scalar output is supported")
        for act in (self.branch_activation, self.hidden_activation, self.output_activation):
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["branch_widths"] = list(self.branch_widths)
        d["fc_widths"] = list(self.fc_widths)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        return cls(**d)


class Block(NamedTuple):
    name: str
    n_out: int
    n_in: int
    offset: int
    activation: str

    @property
    def size(self) -> int:
        return self.n_out * (self.n_in + 1)

    def unpack(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w_end = self.offset + self.n_out * self.n_in
        W = params[self.offset : w_end].reshape(self.n_out, self.n_in)
        b = params[w_end : w_end + self.n_out]
        return W, b


def layout(spec: NetworkSpec) -> tuple[list[list[Block]], list[Block]]:
    """Blocks of every branch (in input order) and of the merged trunk."""
    offset = 0
    branches = []
    for i in range(spec.input_count):
        chain, n_in = [], 1
        for k, width in enumerate(spec.branch_widths):
            blk = Block(f"branch{i}.{k}", width, n_in, offset, spec.branch_activation)
            chain.append(blk)
            offset += blk.size
            n_in = width
        branches.append(chain)
    trunk = []
    n_in = spec.input_count * spec.branch_widths[-1]
    widths = [("embedding", spec.embedding_width, spec.hidden_activation)]
    widths += [(f"fc{k}", w, spec.hidden_activation) for k, w in enumerate(spec.fc_widths)]
    widths += [("output", spec.output_count, spec.output_activation)]
    for name, width, act in widths:
        blk = Block(name, width, n_in, offset, act)
        trunk.append(blk)
        offset += blk.size
        n_in = width
    return branches, trunk


def parameter_count(spec: NetworkSpec) -> int:
    branches, trunk = layout(spec)
    return sum(b.size for chain in branches for b in chain) + sum(b.size for b in trunk)


def init_params(spec: NetworkSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` for weights and biases."""
    branches, trunk = layout(spec)
    params = np.empty(parameter_count(spec))
    for blk in [b for chain in branches for b in chain] + trunk:
        bound = 1.0 / np.sqrt(blk.n_in)
        params[blk.offset : blk.offset + blk.size] = rng.uniform(-bound, bound, blk.size)
    return params


# Dense chains shared by the branch network and the plain perceptron baseline.

def chain_forward(a0: np.ndarray, blocks: Sequence[Block], params: np.ndarray) -> list[np.ndarray]:
    acts = [a0]
    a = a0
    for blk in blocks:
        W, b = blk.unpack(params)
        a = ACTIVATIONS[blk.activation][0](a @ W.T + b)
        acts.append(a)
    return acts


def chain_backward(
    delta: np.ndarray,
    acts: list[np.ndarray],
    blocks: Sequence[Block],
    params: np.ndarray,
    jac: np.ndarray,
) -> np.ndarray:
    """Accumulate per-sample parameter derivatives into ``jac``.

    ``delta`` is d(output)/d(pre-activation) of the last block (``N x n_out``).
    Returns d(output)/d(chain input), ``N x n_in`` of the first block.
    """
    n = delta.shape[0]
    for li in range(len(blocks) - 1, -1, -1):
        blk = blocks[li]
        W, _ = blk.unpack(params)
        a_prev = acts[li]
        w_end = blk.offset + blk.n_out * blk.n_in
        jac[:, blk.offset : w_end] = (delta[:, :, None] * a_prev[:, None, :]).reshape(n, -1)
        jac[:, w_end : w_end + blk.n_out] = delta
        upstream = delta @ W
        if li > 0:
            delta = upstream * ACTIVATIONS[blocks[li - 1].activation][1](a_prev)
        else:
            return upstream
    return upstream  # pragma: no cover - blocks is never empty


def _check_inputs(spec: NetworkSpec, params: np.ndarray, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != spec.input_count:
        raise ValueError(f"expected {spec.input_count} features, got {X.shape[1]}")
    if params.shape != (parameter_count(spec),):
        raise ValueError(f"expected {parameter_count(spec)} parameters, got {params.shape}")
    return X


def _forward_all(spec, params, X):
    branches, trunk = layout(spec)
    branch_acts = [chain_forward(X[:, i : i + 1], chain, params) for i, chain in enumerate(branches)]
    merged = np.concatenate([acts[-1] for acts in branch_acts], axis=1)
    trunk_acts = chain_forward(merged, trunk, params)
    return branches, trunk, branch_acts, trunk_acts


def forward(spec: NetworkSpec, params, X) -> np.ndarray:
    """Network output for each row of the standardized feature matrix ``X``."""
    params = np.asarray(params, dtype=np.float64)
    X = _check_inputs(spec, params, X)
    *_, trunk_acts = _forward_all(spec, params, X)
    return trunk_acts[-1][:, 0]


def jacobian(spec: NetworkSpec, params, X, y) -> tuple[np.ndarray, np.ndarray]:
    """Errors ``e = forward(X) - y`` and ``J[i, p] = d e_i / d params_p``.

    Reverse-mode differentiation is run for every sample independently
    (vectorized over the sample axis).
    """
    params = np.asarray(params, dtype=np.float64)
    X = _check_inputs(spec, params, X)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValueError("targets must have one entry per sample")
    branches, trunk, branch_acts, trunk_acts = _forward_all(spec, params, X)
    e = trunk_acts[-1][:, 0] - y
    if not np.all(np.isfinite(e)):
        raise TrainingDivergedError("non-finite network output")

    n = X.shape[0]
    J = np.empty((n, params.size))
    delta = ACTIVATIONS[trunk[-1].activation][1](trunk_acts[-1])
    upstream = chain_backward(delta, trunk_acts, trunk, params, J)
    width = spec.branch_widths[-1]
    for i, (chain, acts) in enumerate(zip(branches, branch_acts)):
        d_out = upstream[:, i * width : (i + 1) * width]
        d_pre = d_out * ACTIVATIONS[chain[-1].activation][1](acts[-1])
        chain_backward(d_pre, acts, chain, params, J)
    if not np.all(np.isfinite(J)):
        raise TrainingDivergedError("non-finite Jacobian entry")
    return J, e
