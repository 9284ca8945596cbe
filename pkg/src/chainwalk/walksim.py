"""Dense state-vector simulation of the subset-graph walk in vertex-coin encoding.

A state is a complex array of shape ``(num_vertices, degree)``; row ``v`` is the
coin block of the vertex with colex rank ``v``. The data register (oracle
images of the vertex) is a deterministic function of the vertex and is left
implicit, so the swap-update is a pure basis permutation. Oracle cost is
tracked on the config instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Any, Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from . import amplify
from .combinat import DomainSpec, all_vertices, apply_coin, coin_from_index, coin_index
from .combinat import degree, reverse_coin, spectral_gap
from .errors import CapacityError, DomainError, GuaranteeUnavailableError

DEFAULT_MEMORY_CAP = 1 << 24  # complex amplitudes
SPECTRUM_CAP = 50_000
BUSY_RANK_TOL = 1e-9


class WalkSpace:
    """Index bookkeeping for one (domain, R) pair. Cached tables build lazily."""

    def __init__(self, spec: DomainSpec, R: int, memory_cap: int = DEFAULT_MEMORY_CAP):
        n_eff = spec.effective_size
        if not 1 <= R < n_eff:
            raise DomainError(f"need 1 <= R < N_eff, got R={R}, N_eff={n_eff}")
        self.spec = spec
        self.R = R
        self.num_vertices = comb(n_eff, R)
        self.degree = degree(n_eff, R)
        self.memory_cap = memory_cap
        if self.dim > memory_cap:
            raise CapacityError(
                f"state needs {self.dim} amplitudes, cap is {memory_cap}"
            )

    @property
    def dim(self) -> int:
        return self.num_vertices * self.degree

    @property
    def shape(self) -> tuple[int, int]:
        return (self.num_vertices, self.degree)

    @cached_property
    def vertices(self) -> np.ndarray:
        return all_vertices(self.spec, self.R)

    @cached_property
    def swap_permutation(self) -> np.ndarray:
        """``perm[i]`` is the flat basis index that basis index ``i`` maps to."""
        from .combinat import rank

        verts = self.vertices
        n_eff = self.spec.effective_size
        perm = np.empty(self.dim, dtype=np.int64)
        for v in range(self.num_vertices):
            S = tuple(int(x) for x in verts[v])
            for ci in range(self.degree):
                c = coin_from_index(ci, self.R, n_eff)
                T = apply_coin(S, c, self.spec)
                back = reverse_coin(S, c, self.spec)
                perm[v * self.degree + ci] = (
                    rank(T, self.spec) * self.degree + coin_index(back, self.R, n_eff)
                )
        return perm


@dataclass
class WalkConfig:
    space: WalkSpace
    marked: Callable[[tuple[int, ...]], bool]
    oracle: Any = None
    query_counter: int = 0

    @classmethod
    def build(
        cls,
        spec: DomainSpec,
        R: int,
        marked: Callable[[tuple[int, ...]], bool],
        oracle: Any = None,
        memory_cap: int = DEFAULT_MEMORY_CAP,
    ) -> "WalkConfig":
        return cls(WalkSpace(spec, R, memory_cap), marked, oracle)

    @cached_property
    def marked_mask(self) -> np.ndarray:
        verts = self.space.vertices
        return np.fromiter(
            (bool(self.marked(tuple(int(x) for x in row))) for row in verts),
            dtype=bool,
            count=len(verts),
        )

    @property
    def epsilon(self) -> float:
        return float(self.marked_mask.mean())

    @property
    def gap(self) -> float:
        return float(spectral_gap(self.space.spec.effective_size, self.space.R))


@dataclass
class EdgeAmplitudes:
    space: WalkSpace
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(self.space.shape)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "EdgeAmplitudes") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def vertex_probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def copy(self) -> "EdgeAmplitudes":
        return EdgeAmplitudes(self.space, self.amplitudes.copy())


# -- states ------------------------------------------------------------------


def uniform_edge_state(cfg: WalkConfig) -> EdgeAmplitudes:
    sp = cfg.space
    return EdgeAmplitudes(sp, np.full(sp.shape, 1.0 / math.sqrt(sp.dim), dtype=complex))


def _uniform_on(cfg: WalkConfig, mask: np.ndarray) -> EdgeAmplitudes:
    count = int(mask.sum())
    if count == 0:
        raise DomainError("empty support")
    sp = cfg.space
    amps = np.zeros(sp.shape, dtype=complex)
    amps[mask] = 1.0 / math.sqrt(count * sp.degree)
    return EdgeAmplitudes(sp, amps)


def unmarked_uniform_state(cfg: WalkConfig) -> EdgeAmplitudes:
    return _uniform_on(cfg, ~cfg.marked_mask)


def marked_uniform_state(cfg: WalkConfig) -> EdgeAmplitudes:
    return _uniform_on(cfg, cfg.marked_mask)


def vertex_state(cfg: WalkConfig, vertex_amps: np.ndarray) -> EdgeAmplitudes:
    """Vertex amplitudes tensored with the uniform coin."""
    sp = cfg.space
    va = np.asarray(vertex_amps, dtype=complex).reshape(sp.num_vertices, 1)
    return EdgeAmplitudes(sp, np.repeat(va, sp.degree, axis=1) / math.sqrt(sp.degree))


def random_vertex_state(cfg: WalkConfig, rng: np.random.Generator) -> EdgeAmplitudes:
    """Random normalised state inside the uniform-coin subspace."""
    n = cfg.space.num_vertices
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return vertex_state(cfg, v / np.linalg.norm(v))


# -- operators ---------------------------------------------------------------
# The array operators accept a trailing batch axis: shape (V, d) or (V, d, k).


def _swap_array(a: np.ndarray, space: WalkSpace) -> np.ndarray:
    flat = a.reshape((space.dim,) + a.shape[2:])
    out = np.empty_like(flat)
    out[space.swap_permutation] = flat
    return out.reshape(a.shape)


def _coin_reflect_array(a: np.ndarray) -> np.ndarray:
    return 2.0 * a.mean(axis=1, keepdims=True) - a


def _walk_array(a: np.ndarray, space: WalkSpace) -> np.ndarray:
    a = _coin_reflect_array(a)
    return _swap_array(_coin_reflect_array(_swap_array(a, space)), space)


def swup(state: EdgeAmplitudes, cfg: WalkConfig) -> EdgeAmplitudes:
    cfg.query_counter += 2
    return EdgeAmplitudes(state.space, _swap_array(state.amplitudes, state.space))


def ref_coin(state: EdgeAmplitudes, cfg: WalkConfig) -> EdgeAmplitudes:
    return EdgeAmplitudes(state.space, _coin_reflect_array(state.amplitudes))


def walk_op(state: EdgeAmplitudes, cfg: WalkConfig) -> EdgeAmplitudes:
    """One step: coin reflection, then the swapped coin reflection."""
    cfg.query_counter += 4
    return EdgeAmplitudes(state.space, _walk_array(state.amplitudes, state.space))


def reflect_uniform_exact(state: EdgeAmplitudes, cfg: WalkConfig) -> EdgeAmplitudes:
    u = 1.0 / math.sqrt(state.space.dim)
    overlap = u * state.amplitudes.sum()
    return EdgeAmplitudes(state.space, 2.0 * overlap * u - state.amplitudes)


def phase_flip_marked(state: EdgeAmplitudes, cfg: WalkConfig) -> EdgeAmplitudes:
    sign = np.where(cfg.marked_mask, -1.0, 1.0)[:, None]
    return EdgeAmplitudes(state.space, state.amplitudes * sign)


def measure_marked(
    state: EdgeAmplitudes, cfg: WalkConfig, rng: np.random.Generator
) -> tuple[bool, EdgeAmplitudes]:
    mask = cfg.marked_mask
    probs = state.vertex_probabilities()
    p_true = float(probs[mask].sum())
    p_false = float(probs[~mask].sum())
    if p_true + p_false <= 0.0:
        raise DomainError("degenerate measurement: state has zero mass")
    flag = bool(rng.random() * (p_true + p_false) < p_true)
    keep = mask if flag else ~mask
    amps = np.where(keep[:, None], state.amplitudes, 0.0)
    return flag, EdgeAmplitudes(state.space, amps / math.sqrt(p_true if flag else p_false))


# -- busy subspace and spectrum ----------------------------------------------


def busy_basis(cfg: WalkConfig) -> np.ndarray:
    """Orthonormal basis (columns, flat index) of the span of both coin-uniform families."""
    sp = cfg.space
    if sp.dim > SPECTRUM_CAP:
        raise CapacityError(f"dense spectrum needs dim <= {SPECTRUM_CAP}, got {sp.dim}")
    V, d = sp.shape
    fam_a = np.zeros((V, d, V))
    fam_a[np.arange(V), :, np.arange(V)] = 1.0 / math.sqrt(d)
    fam_b = _swap_array(fam_a, sp)
    cols = np.concatenate([fam_a, fam_b], axis=2).reshape(sp.dim, 2 * V)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, s > BUSY_RANK_TOL * max(s[0], 1.0)]


@dataclass
class SpectrumReport:
    eigenphases: list[float]
    fixed_vector_overlap: float
    min_nonzero_phase: float
    dim_busy: int
    predicted_min_phase: float
    gap: float
    zero_phase_count: int = 0

    @property
    def ratio_to_prediction(self) -> float:
        return self.min_nonzero_phase / self.predicted_min_phase


def _restricted_walk(cfg: WalkConfig) -> tuple[np.ndarray, np.ndarray]:
    Q = busy_basis(cfg)
    sp = cfg.space
    WQ = _walk_array(Q.reshape(sp.shape + (Q.shape[1],)), sp).reshape(Q.shape)
    return Q, Q.conj().T @ WQ


def _eig_unitary(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # For a normal matrix the complex Schur form is diagonal and its Schur
    # vectors are an orthonormal eigenbasis, even under degeneracy.
    T, Z = scipy.linalg.schur(M.astype(complex), output="complex")
    return np.angle(np.diag(T)), Z


def spectrum(cfg: WalkConfig, zero_tol: float = 1e-7) -> SpectrumReport:
    Q, M = _restricted_walk(cfg)
    phases, Z = _eig_unitary(M)
    phases = np.where(phases <= -math.pi, math.pi, phases)
    zero = np.abs(phases) < zero_tol
    vecs = Q @ Z
    u = np.full(cfg.space.dim, 1.0 / math.sqrt(cfg.space.dim))
    overlap = float(np.abs(u @ vecs[:, zero]).max()) if zero.any() else 0.0
    gap = cfg.gap
    nonzero = np.abs(phases[~zero])
    return SpectrumReport(
        eigenphases=sorted(float(p) for p in phases),
        fixed_vector_overlap=min(overlap, 1.0),
        min_nonzero_phase=float(nonzero.min()) if nonzero.size else math.nan,
        dim_busy=int(Q.shape[1]),
        predicted_min_phase=2.0 * math.acos(1.0 - gap) if gap <= 2 else math.pi,
        gap=gap,
        zero_phase_count=int(zero.sum()),
    )


def _qpe_zero_weight(phase: np.ndarray, t_bits: int) -> np.ndarray:
    """Probability that ``t_bits``-bit phase estimation reads 0 for eigenphase ``phase``."""
    T = 1 << t_bits
    frac = np.mod(phase / (2 * math.pi), 1.0)
    num = np.sin(math.pi * T * frac) ** 2
    den = (T * np.sin(math.pi * frac)) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(den < 1e-300, 1.0, num / den)
    return np.clip(w, 0.0, 1.0)


def reflect_uniform_phase_est(
    state: EdgeAmplitudes, cfg: WalkConfig, t_bits: int
) -> tuple[EdgeAmplitudes, float]:
    """Reflection about the uniform state built from phase estimation of one walk step.

    Each eigencomponent with phase ``p`` returns to a clean ancilla with
    factor ``2 w(p) - 1`` where ``w`` is the probability of reading zero; the
    remainder stays entangled with the ancilla and is discarded. The returned
    state is the renormalised clean-ancilla branch; fidelity is measured on
    the full (unnormalised) branch against the exact reflection.
    """
    if t_bits < 1:
        raise DomainError("t_bits must be at least 1")
    if (1 << t_bits) * cfg.space.dim > cfg.space.memory_cap * 64:
        raise CapacityError("phase estimation emulation too large")
    Q, M = _restricted_walk(cfg)
    phases, Z = _eig_unitary(M)
    basis = Q @ Z
    psi = state.amplitudes.reshape(-1)
    coeff = basis.conj().T @ psi
    outside = psi - basis @ coeff
    factor = 2.0 * _qpe_zero_weight(phases, t_bits) - 1.0
    out = basis @ (factor * coeff) + outside
    cfg.query_counter += 4 * 2 * ((1 << t_bits) - 1)
    exact = reflect_uniform_exact(state, cfg).amplitudes.reshape(-1)
    fidelity = float(abs(np.vdot(exact, out)) ** 2)
    nrm = np.linalg.norm(out)
    if nrm > 0:
        out = out / nrm
    return EdgeAmplitudes(state.space, out), fidelity


# -- amplification run -------------------------------------------------------


@dataclass
class RunStats:
    epsilon: float
    start: str
    iterations: int
    queries: int
    success_probability: float


def reflection_queries(cfg: WalkConfig) -> int:
    """Oracle cost charged for one reflection about the uniform state.

    Phase estimation resolving the phase gap needs about ``1/sqrt(gap)``
    controlled walk steps, run forward and backward; each step holds two
    swap-updates at two queries each.
    """
    steps = math.ceil(1.0 / math.sqrt(cfg.gap))
    return 2 * steps * 4


def amplify_iterations(
    state: EdgeAmplitudes, cfg: WalkConfig, iterations: int
) -> EdgeAmplitudes:
    for _ in range(iterations):
        state = reflect_uniform_exact(phase_flip_marked(state, cfg), cfg)
        cfg.query_counter += reflection_queries(cfg)
    return state


def classify_start(state: EdgeAmplitudes, cfg: WalkConfig, tol: float = 1e-9) -> str:
    if abs(abs(state.inner(uniform_edge_state(cfg))) - 1.0) < tol:
        return "uniform"
    if cfg.marked_mask.all():
        raise DomainError("no unmarked vertices to start from")
    if abs(abs(state.inner(unmarked_uniform_state(cfg))) - 1.0) < tol:
        return "bad"
    raise DomainError("start state must be the uniform or the unmarked-uniform state")


def mnrs_run(
    cfg: WalkConfig, start: EdgeAmplitudes, rng: np.random.Generator
) -> tuple[bool, EdgeAmplitudes, RunStats]:
    eps = cfg.epsilon
    if eps == 0.0:
        raise DomainError("no marked vertices")
    if eps >= 0.5:
        raise GuaranteeUnavailableError(f"epsilon {eps} >= 1/2")
    kind = classify_start(start, cfg)
    sch = amplify.schedule(eps)
    iters = sch.iters_uniform if kind == "uniform" else sch.iters_bad
    q0 = cfg.query_counter
    state = amplify_iterations(start, cfg, iters)
    p = float(state.vertex_probabilities()[cfg.marked_mask].sum())
    flag, state = measure_marked(state, cfg, rng)
    return flag, state, RunStats(eps, kind, iters, cfg.query_counter - q0, p)


# -- noisy update ------------------------------------------------------------


def corrupted_pairs(
    space: WalkSpace, mu: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded corruption pattern covering a ``mu`` fraction of basis pairs.

    Returns (indices, leak weights). Whole pairs are corrupted first; any
    fractional remainder is applied as a partial leak on one extra pair so the
    corrupted mass is exactly ``mu`` of the basis even when ``mu * dim < 1``.
    """
    total = mu * space.dim
    whole = int(math.floor(total))
    rest = total - whole
    count = whole + (1 if rest > 0 else 0)
    idx = rng.choice(space.dim, size=min(count, space.dim), replace=False)
    w = np.ones(len(idx))
    if rest > 0 and len(idx):
        w[-1] = rest
    return idx.astype(np.int64), w


def fidelity_decay(
    cfg: WalkConfig,
    mu: float,
    steps: int,
    rng: np.random.Generator,
    start: Optional[EdgeAmplitudes] = None,
) -> list[float]:
    """Overlap between ideal and corrupted walk trajectories for 1..steps steps.

    Corrupted pairs send (part of) their amplitude into an absorbing flag
    component that is orthogonal to every basis state, so the noisy branch
    loses norm instead of being rotated elsewhere.
    """
    if not 0.0 <= mu < 1.0:
        raise DomainError("mu must lie in [0, 1)")
    if steps < 0:
        raise DomainError("steps must be non-negative")
    sp = cfg.space
    idx, w = corrupted_pairs(sp, mu, rng)
    keep = np.ones(sp.dim)
    keep[idx] = np.sqrt(1.0 - w)
    keep = keep.reshape(sp.shape)

    def noisy_swap(a: np.ndarray) -> np.ndarray:
        return _swap_array(a * keep, sp)

    ideal = (start or uniform_edge_state(cfg)).amplitudes
    noisy = ideal.copy()
    out = []
    for _ in range(steps):
        ideal = _walk_array(ideal, sp)
        noisy = noisy_swap(_coin_reflect_array(noisy_swap(_coin_reflect_array(noisy))))
        cfg.query_counter += 4
        out.append(float(abs(np.vdot(ideal, noisy))))
    return out


def noise_bound(mu: float, N: int) -> float:
    return (1.0 - mu) ** (N / 2) - N * math.sqrt(mu)
