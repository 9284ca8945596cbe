"""Chained walks for finding many collisions of a random function.

Each walk runs on R-subsets of the inputs that are not yet recorded in the
collision table. A subset is *marked* when it holds an internal collision or
an input whose image is already in the table. After a successful walk the
solutions are pulled out one at a time until the remaining subset is
unmarked; the leftover state is then the uniform unmarked state on the
smaller graph and seeds the next walk.

Two backends share the same control flow:

* ``dense`` keeps the full vertex-coin state vector (small instances only).
* ``hidden`` samples the measurement record exactly without storing a state.
  With exact reflections the walk state always lies in the plane of the
  uniform marked and unmarked states, and every later measurement acts on a
  vertex drawn once from the uniform marked distribution, so the joint law
  of all outcomes can be sampled classically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import amplify
from .combinat import DomainSpec, all_vertices, colex_ranks, spectral_gap
from .errors import CapacityError, DomainError, InfeasibleError
from .rng import make_rng
from .walksim import (
    DEFAULT_MEMORY_CAP,
    EdgeAmplitudes,
    WalkConfig,
    WalkSpace,
    amplify_iterations,
    measure_marked,
    uniform_edge_state,
    vertex_state,
)

ENUMERATION_CAP = 10_000_000


# -- oracle and table --------------------------------------------------------


@dataclass
class FunctionOracle:
    n: int
    m: int
    table: np.ndarray
    seed: int
    queries: int = 0

    def __call__(self, x: int) -> int:
        self.queries += 1
        return int(self.table[x])

    @property
    def domain_size(self) -> int:
        return 1 << self.n

    def images(self, xs) -> np.ndarray:
        """Vectorised lookup that does not touch the query counter."""
        return self.table[np.asarray(xs, dtype=np.int64)]


def random_function(n: int, m: int, seed: int) -> FunctionOracle:
    if not 1 <= n <= 22:
        raise DomainError(f"n must lie in [1, 22], got {n}")
    # m above 2n is allowed here: such functions are simply collision-poor
    if not n <= m <= 62:
        raise DomainError(f"m must lie in [n, 62], got m={m}, n={n}")
    table = make_rng(seed).integers(0, 1 << m, size=1 << n, dtype=np.int64)
    return FunctionOracle(n, m, table, int(seed))


def function_from_table(values: Sequence[int], m: int) -> FunctionOracle:
    """Oracle for a hand-written table (tests and small examples)."""
    size = len(values)
    n = size.bit_length() - 1
    if size < 2 or 1 << n != size:
        raise DomainError("table length must be a power of two >= 2")
    arr = np.asarray(values, dtype=np.int64)
    if arr.min() < 0 or arr.max() >= 1 << m:
        raise DomainError("table values out of range")
    return FunctionOracle(n, m, arr, 0)


@dataclass
class CollisionTable:
    entries: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def images(self) -> frozenset[int]:
        return frozenset(self.entries)

    @property
    def preimages(self) -> frozenset[int]:
        return frozenset(x for xs in self.entries.values() for x in xs)

    def __len__(self) -> int:
        return len(self.entries)

    def copy(self) -> "CollisionTable":
        return CollisionTable(dict(self.entries))

    def add(self, image: int, xs: Iterable[int]) -> None:
        """Record a solution; a lone preimage extends its image's entry."""
        xs = tuple(sorted(int(x) for x in xs))
        if image in self.entries:
            merged = tuple(sorted(set(self.entries[image]) | set(xs)))
            self.entries[image] = merged
        else:
            if len(xs) < 2:
                raise DomainError("a new entry needs at least two preimages")
            self.entries[image] = xs

    def to_json(self) -> dict:
        return {str(u): list(xs) for u, xs in sorted(self.entries.items())}


def verify_table(C: CollisionTable, f: FunctionOracle) -> bool:
    seen: set[int] = set()
    for u, xs in C.entries.items():
        if len(set(xs)) != len(xs) or not xs:
            return False
        for x in xs:
            if not 0 <= x < f.domain_size or int(f.table[x]) != u or x in seen:
                return False
            seen.add(x)
    return True


def domain_for(f: FunctionOracle, C: CollisionTable) -> DomainSpec:
    return DomainSpec(f.domain_size, C.preimages)


# -- marking -----------------------------------------------------------------


def is_marked(S: Sequence[int], f: FunctionOracle, C: CollisionTable) -> bool:
    pre = C.preimages
    if any(x in pre for x in S):
        raise DomainError("vertex intersects the recorded preimages")
    imgs = [int(f.table[x]) for x in S]
    if len(set(imgs)) < len(imgs):
        return True
    im = C.images
    return any(u in im for u in imgs)


def marked_mask(vertices: np.ndarray, f: FunctionOracle, C: CollisionTable) -> np.ndarray:
    """``is_marked`` over every row of a vertex array."""
    if vertices.shape[1] == 0:
        return np.zeros(len(vertices), dtype=bool)
    imgs = f.table[vertices]
    srt = np.sort(imgs, axis=1)
    mask = np.any(srt[:, 1:] == srt[:, :-1], axis=1)
    if C.entries:
        mask |= np.isin(imgs, np.fromiter(C.entries, dtype=np.int64)).any(axis=1)
    return mask


Solution = tuple[int, tuple[int, ...]]  # (image, sorted preimages)


def solutions_in_vertex(S: Sequence[int], f: FunctionOracle, C: CollisionTable) -> list[Solution]:
    """Maximal same-image groups of width >= 2, plus each input whose image is recorded."""
    groups: dict[int, list[int]] = {}
    for x in S:
        groups.setdefault(int(f.table[x]), []).append(int(x))
    im = C.images
    out: list[Solution] = []
    for u in sorted(groups):
        xs = sorted(groups[u])
        if u in im:
            out.extend((u, (x,)) for x in xs)
        elif len(xs) >= 2:
            out.append((u, tuple(xs)))
    return out


# -- marked fraction ---------------------------------------------------------


def _elementary_symmetric(values: Iterable[int], R: int) -> int:
    e = [1] + [0] * R
    for v in values:
        for j in range(R, 0, -1):
            e[j] += e[j - 1] * v
    return e[R]


def marked_fraction(f: FunctionOracle, C: CollisionTable, R: int) -> Fraction:
    """Exact marked fraction by counting.

    Unmarked subsets pick at most one input per image and avoid recorded
    images, so their number is the R-th elementary symmetric polynomial of the
    per-image multiplicities over the unrecorded images.
    """
    spec = domain_for(f, C)
    n_eff = spec.effective_size
    if not 0 <= R <= n_eff:
        raise DomainError(f"R={R} outside [0, {n_eff}]")
    imgs = f.table[spec.effective_points()]
    values, counts = np.unique(imgs, return_counts=True)
    im = C.images
    allowed = (int(c) for v, c in zip(values, counts) if int(v) not in im)
    total = comb(n_eff, R)
    return 1 - Fraction(_elementary_symmetric(allowed, R), total)


def epsilon_exact(
    f: FunctionOracle, C: CollisionTable, R: int, method: str = "count"
) -> float:
    """Marked fraction of the subset graph; ``method='enumerate'`` walks every vertex."""
    if method == "count":
        return float(marked_fraction(f, C, R))
    if method != "enumerate":
        raise DomainError(f"unknown method {method!r}")
    spec = domain_for(f, C)
    if comb(spec.effective_size, R) > ENUMERATION_CAP:
        raise CapacityError("too many vertices to enumerate")
    return float(marked_mask(all_vertices(spec, R), f, C).mean())


def epsilon_bounds(R: int, imC: int, m: int) -> tuple[float, float]:
    a = R * imC / 2**m
    b = R * (R - 1) / 2**m
    return max(a, b), min(1.0, a + b)


# -- extraction --------------------------------------------------------------


@dataclass(frozen=True)
class ExtractionEvent:
    width: int
    image: int
    elements: tuple[int, ...]


def _vertex_amplitudes(state: EdgeAmplitudes) -> np.ndarray:
    amps = state.amplitudes
    if not np.allclose(amps, amps[:, :1], atol=1e-9):
        raise DomainError("extraction expects a uniform coin register")
    return amps[:, 0] * math.sqrt(state.space.degree)


def _rank_rows(rows: np.ndarray, spec: DomainSpec) -> np.ndarray:
    pos = np.full(spec.size, -1, dtype=np.int64)
    pts = spec.effective_points()
    pos[pts] = np.arange(len(pts))
    return colex_ranks(pos[rows], spec.effective_size)


def extract_vertices(
    amps: np.ndarray,
    spec: DomainSpec,
    R: int,
    f: FunctionOracle,
    C: CollisionTable,
    rng: np.random.Generator,
    on_event: Optional[Callable[[np.ndarray, DomainSpec, int, CollisionTable], None]] = None,
) -> tuple[CollisionTable, int, DomainSpec, np.ndarray, list[ExtractionEvent]]:
    """Measured extraction loop on dense vertex amplitudes.

    ``amps`` is indexed by colex rank of R-subsets of ``spec``'s effective
    domain. Returns the new table, size, domain, residual amplitudes and the
    event list. ``on_event`` sees the post-collapse state after every solution.
    """
    amps = np.asarray(amps, dtype=complex)
    if abs(np.linalg.norm(amps) - 1.0) > 1e-8:
        raise DomainError("state is not normalised")
    C = C.copy()
    events: list[ExtractionEvent] = []
    while True:
        verts = all_vertices(spec, R)
        mask = marked_mask(verts, f, C)
        prob = np.abs(amps) ** 2
        p_true = float(prob[mask].sum())
        flag = bool(rng.random() < p_true)
        keep = mask if flag else ~mask
        amps = np.where(keep, amps, 0.0)
        amps /= math.sqrt(p_true if flag else 1.0 - p_true)
        if not flag:
            return C, R, spec, amps, events
        prob = np.abs(amps) ** 2
        support = np.flatnonzero(prob > 0)
        sols_of = {}
        weights: dict[Solution, float] = {}
        for v in support:
            sols = solutions_in_vertex(verts[v], f, C)
            sols_of[v] = sols
            share = prob[v] / len(sols)
            for s in sols:
                weights[s] = weights.get(s, 0.0) + share
        keys = sorted(weights)
        p = np.array([weights[k] for k in keys])
        image, xs = keys[int(rng.choice(len(keys), p=p / p.sum()))]
        r = len(xs)
        new_spec = spec.with_excluded(xs)
        new_R = R - r
        rows, vals = [], []
        for v, sols in sols_of.items():
            if (image, xs) in sols:
                rows.append([x for x in verts[v] if x not in xs])
                vals.append(amps[v] / math.sqrt(len(sols)))
        new_amps = np.zeros(comb(new_spec.effective_size, new_R), dtype=complex)
        new_amps[_rank_rows(np.asarray(rows, dtype=np.int64).reshape(len(rows), new_R), new_spec)] = vals
        new_amps /= np.linalg.norm(new_amps)
        C.add(image, xs)
        events.append(ExtractionEvent(r, image, xs))
        spec, R, amps = new_spec, new_R, new_amps
        if on_event is not None:
            on_event(amps, spec, R, C)


def extract(
    state: EdgeAmplitudes,
    f: FunctionOracle,
    C: CollisionTable,
    R: int,
    rng: np.random.Generator,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> tuple[CollisionTable, int, EdgeAmplitudes]:
    """Extraction on a walk state; the residual is returned with a uniform coin."""
    if R != state.space.R:
        raise DomainError("R does not match the state")
    amps = _vertex_amplitudes(state)
    C2, R2, spec2, res, _ = extract_vertices(amps, state.space.spec, R, f, C, rng)
    space = WalkSpace(spec2, R2, memory_cap)
    cfg = WalkConfig(space, lambda S: False)
    return C2, R2, vertex_state(cfg, res)


def sample_marked_vertex(
    f: FunctionOracle, C: CollisionTable, R: int, rng: np.random.Generator,
    max_tries: int = 1_000_000,
) -> tuple[int, ...]:
    """Uniform draw from the marked subsets by rejection."""
    pts = domain_for(f, C).effective_points()
    for _ in range(max_tries):
        S = np.sort(rng.choice(pts, size=R, replace=False))
        if marked_mask(S[None, :], f, C)[0]:
            return tuple(int(x) for x in S)
    raise InfeasibleError("no marked subset found")


def extract_hidden(
    S: Sequence[int], f: FunctionOracle, C: CollisionTable, rng: np.random.Generator
) -> tuple[CollisionTable, tuple[int, ...], list[ExtractionEvent]]:
    """Extraction record for a subset drawn from the post-walk distribution."""
    C = C.copy()
    S = tuple(S)
    events = []
    while True:
        sols = solutions_in_vertex(S, f, C)
        if not sols:
            return C, S, events
        image, xs = sols[int(rng.integers(len(sols)))]
        S = tuple(x for x in S if x not in xs)
        C.add(image, xs)
        events.append(ExtractionEvent(len(xs), image, xs))


# -- chained driver ----------------------------------------------------------


@dataclass
class WalkRecord:
    R: int
    images: tuple[int, ...]
    preimages: tuple[int, ...]
    epsilon: Fraction
    start: str
    iterations: int
    success: bool


@dataclass
class ChainReport:
    walks_executed: int = 0
    total_walk_iterations: int = 0
    oracle_queries: int = 0
    extraction_events: list[ExtractionEvent] = field(default_factory=list)
    initial_R: int = 0
    final_R: int = 0
    setups: int = 0
    backend: str = ""
    walks: list[WalkRecord] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "walks_executed": self.walks_executed,
            "total_walk_iterations": self.total_walk_iterations,
            "oracle_queries": self.oracle_queries,
            "extraction_events": [
                {"width": e.width, "image": e.image, "elements": list(e.elements)}
                for e in self.extraction_events
            ],
            "initial_R": self.initial_R,
            "final_R": self.final_R,
            "setups": self.setups,
            "backend": self.backend,
        }


def walk_queries(spec: DomainSpec, R: int, iterations: int) -> int:
    steps = math.ceil(1.0 / math.sqrt(float(spectral_gap(spec.effective_size, R))))
    return iterations * 2 * steps * 4


class _DenseState:
    def __init__(self, f, memory_cap):
        self.f = f
        self.memory_cap = memory_cap
        self.cfg: Optional[WalkConfig] = None
        self.state: Optional[EdgeAmplitudes] = None

    def config(self, spec: DomainSpec, R: int, C: CollisionTable) -> WalkConfig:
        space = WalkSpace(spec, R, self.memory_cap)
        cfg = WalkConfig(space, lambda S: is_marked(S, self.f, C))
        cfg.marked_mask = marked_mask(space.vertices, self.f, C)
        return cfg


def chained_session(
    f: FunctionOracle,
    target: int,
    R: int,
    rng: np.random.Generator,
    backend: str = "hidden",
    min_R: int = 1,
    memory_cap: int = DEFAULT_MEMORY_CAP,
    on_residual: Optional[Callable[[np.ndarray, DomainSpec, int, CollisionTable], None]] = None,
) -> tuple[CollisionTable, ChainReport]:
    """Walk and extract until the table holds ``target`` images.

    The run starts with one check measurement on the uniform state over all
    R-subsets; a marked outcome goes straight to extraction. Each later walk
    starts from the unmarked uniform state and uses the from-bad iteration
    count. When the marked fraction reaches 1/2 that count no longer
    guarantees anything, so the walk is set up afresh from the uniform state
    and uses the from-uniform count instead.
    """
    if backend not in ("dense", "hidden"):
        raise DomainError(f"unknown backend {backend!r}")
    C = CollisionTable()
    spec = domain_for(f, C)
    rep = ChainReport(initial_R=R, final_R=R, backend=backend)
    dense = _DenseState(f, memory_cap) if backend == "dense" else None
    hidden: Optional[tuple[int, ...]] = None

    def setup(spec, R, C):
        rep.setups += 1
        rep.oracle_queries += R
        if dense is not None:
            dense.cfg = dense.config(spec, R, C)
            dense.state = uniform_edge_state(dense.cfg)

    def after_success(spec, R, C):
        nonlocal hidden
        if dense is not None:
            C2, R2, spec2, res, events = extract_vertices(
                _vertex_amplitudes(dense.state), spec, R, f, C, rng
            )
            if R2 >= 1 and R2 < spec2.effective_size:
                dense.cfg = dense.config(spec2, R2, C2)
                dense.state = vertex_state(dense.cfg, res)
            if on_residual is not None:
                on_residual(res, spec2, R2, C2)
        else:
            S = sample_marked_vertex(f, C, R, rng) if hidden is None else hidden
            C2, S2, events = extract_hidden(S, f, C, rng)
            R2, spec2 = len(S2), domain_for(f, C2)
        hidden = None
        rep.extraction_events.extend(events)
        return C2, R2, spec2

    if target <= 0:
        return C, rep

    # Initial state and its check measurement.
    setup(spec, R, C)
    eps = marked_fraction(f, C, R)
    if dense is not None:
        flag, dense.state = measure_marked(dense.state, dense.cfg, rng)
    else:
        flag = bool(rng.random() < float(eps))
    if flag:
        C, R, spec = after_success(spec, R, C)

    while len(C) < target:
        if R < min_R:
            raise InfeasibleError(
                f"subset size fell to {R}, below the guard {min_R}; "
                "raise ell relative to k"
            )
        if R < 1 or R >= spec.effective_size:
            raise InfeasibleError(f"subset size {R} leaves no walk to run")
        eps = marked_fraction(f, C, R)
        if eps == 0:
            raise InfeasibleError("no marked subsets remain; the function has too few collisions")
        sch = amplify.schedule(float(eps))
        if eps >= Fraction(1, 2):
            setup(spec, R, C)
            start, iters = "uniform", sch.iters_uniform
        else:
            start, iters = "bad", sch.iters_bad
        rep.walks.append(
            WalkRecord(R, tuple(sorted(C.images)), tuple(sorted(C.preimages)), eps, start, iters, False)
        )
        rep.walks_executed += 1
        rep.total_walk_iterations += iters
        rep.oracle_queries += walk_queries(spec, R, iters)
        if dense is not None:
            dense.state = amplify_iterations(dense.state, dense.cfg, iters)
            flag, dense.state = measure_marked(dense.state, dense.cfg, rng)
        else:
            a = sch.alpha
            p = math.sin(a + 2 * iters * a if start == "uniform" else 2 * iters * a) ** 2
            flag = bool(rng.random() < p)
        rep.walks[-1].success = flag
        if flag:
            C, R, spec = after_success(spec, R, C)
    rep.final_R = R
    return C, rep


def run_chained(
    f: FunctionOracle,
    k: int,
    ell: int,
    seed: int,
    backend: str = "auto",
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> tuple[CollisionTable, ChainReport]:
    """Find ``2**k`` distinct-image collisions with walks on ``2**ell``-subsets."""
    if k < 0 or ell < 0:
        raise DomainError("k and ell must be non-negative")
    if k == 0:
        return CollisionTable(), ChainReport(backend="none")
    if not k <= ell <= f.m / 2:
        raise InfeasibleError(f"need k <= ell <= m/2, got k={k}, ell={ell}, m={f.m}")
    if 2**ell < 4 * 2**k:
        raise InfeasibleError(f"need 2^ell >= 4 * 2^k, got ell={ell}, k={k}")
    R = 2**ell
    if R >= f.domain_size:
        raise InfeasibleError("2^ell must be below the domain size")
    if backend == "auto":
        dim = comb(f.domain_size, R) * R * (f.domain_size - R)
        backend = "dense" if dim <= memory_cap else "hidden"
    if backend == "dense":
        dim = comb(f.domain_size, R) * R * (f.domain_size - R)
        if dim > memory_cap:
            raise CapacityError(f"dense state needs {dim} amplitudes, cap is {memory_cap}")
    C, rep = chained_session(
        f, 2**k, R, make_rng(seed), backend=backend, min_R=2 ** (ell - 1), memory_cap=memory_cap
    )
    if not verify_table(C, f):
        raise AssertionError("chained run produced an invalid table")
    return C, rep
