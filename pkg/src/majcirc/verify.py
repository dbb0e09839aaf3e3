"""Verification of candidate majority circuits against the majority function.

Three regimes:

* verify_all: exhaustive truth-table sweep for small n.
* verify_minmax: the two critical weight layers only (least weight where
  majority is 1 and largest where it is 0), exhaustively or by exact-uniform
  sampling.  For monotone circuits, zero errors on these two layers implies
  exactness everywhere, which is what makes this mode decisive.
* estimate_agreement: i.i.d. uniform inputs, with a distribution-free
  confidence half-width for the agreement rate.

All bulk evaluation goes through a chunked vectorized engine.  Chunks own
their randomness (one derived stream per chunk index), and results are
merged in chunk order, so every report is byte-identical no matter how many
worker threads processed it.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .core import Assignment, LayeredCircuit, majority_threshold
from ._rand import philox

DEFAULT_CHUNK = 8192
EXHAUSTIVE_CAP = 30
LAYER_CAP = 10**8

# Dense matrix evaluation beats per-support gather sums once the layer has
# many distinct supports; the factor reflects the BLAS advantage.
_DENSE_ADVANTAGE = 16


class CapExceeded(ValueError):
    """The requested exhaustive sweep is too large; use layer or sample modes."""


def _group_sum(below: np.ndarray, sig: tuple) -> np.ndarray:
    """Weighted input sum shared by all gates with support signature sig."""
    positions = [p for p, _ in sig]
    start, stop = positions[0], positions[-1] + 1
    contiguous = stop - start == len(positions)
    if all(w == 1 for _, w in sig):
        if contiguous:
            return below[:, start:stop].sum(axis=1, dtype=np.int64)
        return below[:, positions].sum(axis=1, dtype=np.int64)
    wts = np.fromiter((w for _, w in sig), dtype=np.int64, count=len(sig))
    return below[:, positions].astype(np.int64) @ wts


def _eval_layer(gates, below: np.ndarray) -> np.ndarray:
    """Outputs of one layer of gates on a batch of value rows.

    below: (m, width) integer 0/1 matrix.  Groups gates sharing a support so
    each distinct weighted sum is computed once; falls back to one dense
    matrix product when supports are mostly distinct.
    """
    m = below.shape[0]
    width = below.shape[1]
    groups: dict[tuple, list[int]] = {}
    for idx, g in enumerate(gates):
        groups.setdefault(g.inputs, []).append(idx)
    gather_cost = sum(len(sig) for sig in groups)
    out = np.empty((m, len(gates)), dtype=np.uint8)
    if len(gates) * width <= _DENSE_ADVANTAGE * gather_cost:
        w = np.zeros((width, len(gates)), dtype=np.float64)
        thetas = np.empty(len(gates), dtype=np.float64)
        for idx, g in enumerate(gates):
            for p, wt in g.inputs:
                w[p, idx] = wt
            thetas[idx] = g.theta
        sums = below.astype(np.float64) @ w
        np.greater_equal(sums, thetas, out=out, casting="unsafe")
        return out
    for sig, idxs in groups.items():
        sums = _group_sum(below, sig)
        thetas = np.fromiter((gates[i].theta for i in idxs), dtype=np.int64, count=len(idxs))
        cols = np.asarray(idxs, dtype=np.intp)
        out[:, cols] = sums[:, None] >= thetas[None, :]
    return out


def eval_bulk(c: LayeredCircuit, bits: np.ndarray) -> np.ndarray:
    """Top-gate outputs for a (m, n) 0/1 matrix of assignments."""
    if bits.ndim != 2 or bits.shape[1] != c.n:
        raise ValueError(f"expected a (m, {c.n}) bit matrix, got {bits.shape}")
    values = bits
    for layer in c.layers:
        values = _eval_layer(layer, values)
    return values[:, c.top]


def truth_table(c: LayeredCircuit, chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """Full 2^n truth table, index i holding the output where x1 is the most
    significant bit of i.  Only for n small enough to enumerate."""
    if c.n > EXHAUSTIVE_CAP:
        raise CapExceeded(
            f"n={c.n} exceeds the exhaustive cap {EXHAUSTIVE_CAP}; "
            "use verify_minmax or estimate_agreement"
        )
    out = np.empty(2**c.n, dtype=np.uint8)
    for start, bits in _index_chunks(c.n, chunk):
        out[start : start + bits.shape[0]] = eval_bulk(c, bits)
    return out


def _index_chunks(n: int, chunk: int) -> Iterator[tuple[int, np.ndarray]]:
    shifts = (n - 1 - np.arange(n, dtype=np.uint64)).astype(np.uint64)
    total = 2**n
    for start in range(0, total, chunk):
        vals = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        bits = ((vals[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
        yield start, bits


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one verification run.

    checked_by_weight / errors_by_weight map input weight to counts (weights
    with zero checked inputs are omitted).  agreement is exact over what was
    checked; ci_halfwidth is only set in sample mode.
    """

    mode: str
    total_checked: int
    errors: int
    checked_by_weight: dict[int, int] = field(default_factory=dict)
    errors_by_weight: dict[int, int] = field(default_factory=dict)
    seed: int | None = None
    ci_halfwidth: float | None = None

    @property
    def agreement(self) -> Fraction:
        if self.total_checked == 0:
            raise ValueError("empty report has no agreement rate")
        return Fraction(self.total_checked - self.errors, self.total_checked)

    def error_fraction(self, weight: int) -> Fraction:
        checked = self.checked_by_weight.get(weight, 0)
        if checked == 0:
            raise ValueError(f"no inputs of weight {weight} were checked")
        return Fraction(self.errors_by_weight.get(weight, 0), checked)

    def to_json(self) -> str:
        obj: dict = {
            "mode": self.mode,
            "total_checked": self.total_checked,
            "errors": self.errors,
            "agreement": str(self.agreement) if self.total_checked else None,
            "checked_by_weight": {str(w): self.checked_by_weight[w] for w in sorted(self.checked_by_weight)},
            "errors_by_weight": {str(w): self.errors_by_weight[w] for w in sorted(self.errors_by_weight)},
        }
        if self.seed is not None:
            obj["seed"] = self.seed
        if self.ci_halfwidth is not None:
            obj["ci_halfwidth"] = self.ci_halfwidth
        return json.dumps(obj, separators=(", ", ": "))

    def to_csv(self) -> str:
        lines = ["weight,checked,errors"]
        for w in sorted(self.checked_by_weight):
            lines.append(f"{w},{self.checked_by_weight[w]},{self.errors_by_weight.get(w, 0)}")
        return "\n".join(lines) + "\n"


def _tally(bits: np.ndarray, outs: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    weights = bits.sum(axis=1, dtype=np.int64)
    truth = weights >= majority_threshold(n)
    wrong = outs.astype(bool) != truth
    checked = np.bincount(weights, minlength=n + 1)
    errors = np.bincount(weights[wrong], minlength=n + 1)
    return checked, errors


def _merge_counts(n: int, parts: list[tuple[np.ndarray, np.ndarray]]) -> tuple[dict[int, int], dict[int, int], int, int]:
    checked = np.zeros(n + 1, dtype=np.int64)
    errors = np.zeros(n + 1, dtype=np.int64)
    for c, e in parts:
        checked += c
        errors += e
    cd = {int(w): int(checked[w]) for w in range(n + 1) if checked[w]}
    ed = {int(w): int(errors[w]) for w in range(n + 1) if errors[w]}
    return cd, ed, int(checked.sum()), int(errors.sum())


# Worker processes receive the circuit once at pool start-up and read it
# from this module-level slot; job tuples then stay tiny.  Results come back
# through pool.map, which preserves job order, so the merged report cannot
# depend on scheduling.
_WORK_CTX: dict = {}


def _pool_init(ctx: dict) -> None:
    _WORK_CTX.clear()
    _WORK_CTX.update(ctx)


def _run_chunks(fn: Callable, jobs: list, workers: int, ctx: dict) -> list:
    """Apply the top-level worker fn to each job, in job order.

    Sampling and random generation hold the interpreter lock, so scaling
    comes from processes, not threads.  A single worker runs inline.
    """
    if workers <= 1 or len(jobs) <= 1:
        _pool_init(ctx)
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(
        max_workers=min(workers, len(jobs)), initializer=_pool_init, initargs=(ctx,)
    ) as pool:
        return list(pool.map(fn, jobs))


def _work_exhaustive(job):
    c = _WORK_CTX["circuit"]
    start, stop, chunk_n = job
    shifts = (chunk_n - 1 - np.arange(chunk_n, dtype=np.uint64)).astype(np.uint64)
    vals = np.arange(start, stop, dtype=np.uint64)
    bits = ((vals[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    return _tally(bits, eval_bulk(c, bits), chunk_n)


def _work_layer_exact(job):
    c = _WORK_CTX["circuit"]
    bits = job
    return _tally(bits, eval_bulk(c, bits), c.n)


def _work_layer_sample(job):
    c = _WORK_CTX["circuit"]
    w, size, index = job
    bits = sample_layer_chunk(c.n, w, size, _WORK_CTX["seed"], index)
    return _tally(bits, eval_bulk(c, bits), c.n)


def _work_agreement(job):
    c = _WORK_CTX["circuit"]
    size, index = job
    rng = philox(_WORK_CTX["seed"], "agreement", c.n, index)
    bits = rng.integers(0, 2, size=(size, c.n), dtype=np.uint8)
    return _tally(bits, eval_bulk(c, bits), c.n)


def verify_all(
    c: LayeredCircuit,
    *,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    cap: int = EXHAUSTIVE_CAP,
) -> VerificationReport:
    """Compare the circuit with majority on every one of the 2^n inputs."""
    if c.n > cap:
        raise CapExceeded(
            f"n={c.n} exceeds the exhaustive cap {cap}; "
            "use verify_minmax or estimate_agreement"
        )
    total = 2**c.n
    jobs = [(s, min(s + chunk, total), c.n) for s in range(0, total, chunk)]
    parts = _run_chunks(_work_exhaustive, jobs, workers, {"circuit": c})
    cd, ed, total, errs = _merge_counts(c.n, parts)
    return VerificationReport("exhaustive", total, errs, cd, ed)


# -- weight-layer enumeration and sampling ----------------------------------


def enumerate_layer(n: int, w: int) -> Iterator[Assignment]:
    """All weight-w assignments in ascending order of the integer whose most
    significant bit is x1."""
    for v in _layer_values(n, w):
        yield Assignment(tuple((v >> (n - 1 - i)) & 1 for i in range(n)))


def _layer_values(n: int, w: int) -> Iterator[int]:
    if not 0 <= w <= n:
        return
    if w == 0:
        yield 0
        return
    v = (1 << w) - 1
    limit = 1 << n
    while v < limit:
        yield v
        lo = v & -v
        lz = v + lo
        v = lz | (((v ^ lz) // lo) >> 2)


def layer_size(n: int, w: int) -> int:
    return math.comb(n, w)


def _layer_chunks_exact(n: int, w: int, chunk: int) -> Iterator[np.ndarray]:
    shifts = (n - 1 - np.arange(n, dtype=np.uint64)).astype(np.uint64)
    buf: list[int] = []
    for v in _layer_values(n, w):
        buf.append(v)
        if len(buf) == chunk:
            vals = np.array(buf, dtype=np.uint64)
            yield ((vals[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
            buf = []
    if buf:
        vals = np.array(buf, dtype=np.uint64)
        yield ((vals[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def _bounded_uniform_rows(rng: np.random.Generator, bounds: np.ndarray, count: int) -> np.ndarray:
    """Row i holds count exact-uniform draws from [0, bounds[i]).

    One bulk draw of 32-bit words plus rejection of the (about 1 in 10^6)
    words falling in the incomplete final cycle of each modulus, so the
    result is exactly uniform rather than merely unbiased to float
    precision.
    """
    words = rng.integers(0, 1 << 32, size=(len(bounds), count), dtype=np.uint32)
    limits64 = ((1 << 32) // bounds) * bounds
    # Bounds dividing 2^32 use every word; their limit wraps to 0 below and
    # must be excluded from the rejection test.
    partial = limits64 < (1 << 32)
    limits = limits64.astype(np.uint32)
    bad = (words >= limits[:, None]) & partial[:, None]
    while bad.any():
        rows, cols = np.nonzero(bad)
        words[rows, cols] = rng.integers(0, 1 << 32, size=len(rows), dtype=np.uint32)
        bad[rows, cols] = words[rows, cols] >= limits[rows]
    np.mod(words, bounds[:, None].astype(np.uint32), out=words)
    return words


def sample_layer_chunk(n: int, w: int, count: int, seed: int, chunk_index: int) -> np.ndarray:
    """One chunk of exact-uniform weight-w samples as a (count, n) matrix.

    Bits are drawn left to right with the exact conditional probability of a
    one given how many ones remain, so the resulting vector is uniform over
    the weight-w layer.  The chunk owns stream (seed, "layer", n, w, index)
    regardless of which worker runs it.
    """
    rng = philox(seed, "layer", n, w, chunk_index)
    bounds = np.arange(n, 0, -1, dtype=np.uint64)
    u = _bounded_uniform_rows(rng, bounds, count)
    ones_left = np.full(count, w, dtype=np.uint32)
    bits = np.empty((n, count), dtype=np.uint8)
    take = np.empty(count, dtype=bool)
    for i in range(n):
        np.less(u[i], ones_left, out=take)
        row = bits[i]
        np.copyto(row, take, casting="unsafe")
        np.subtract(ones_left, row, out=ones_left, casting="unsafe")
    return np.ascontiguousarray(bits.T)


def sample_layer(n: int, w: int, count: int, seed: int, chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
    if not 0 <= w <= n:
        raise ValueError(f"weight {w} out of range 0..{n}")
    done = 0
    index = 0
    while done < count:
        size = min(chunk, count - done)
        yield sample_layer_chunk(n, w, size, seed, index)
        done += size
        index += 1


def verify_minmax(
    c: LayeredCircuit,
    *,
    samples: int | None = None,
    seed: int | None = None,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    cap: int = LAYER_CAP,
) -> VerificationReport:
    """Check the two critical weight layers: ceil(n/2) and ceil(n/2) - 1.

    With samples=None both layers are enumerated exhaustively (subject to
    cap).  Otherwise each layer gets `samples` exact-uniform draws using the
    given seed.  n=1 has no weight-0..-1 layer below the threshold; the
    lower layer is skipped when empty.
    """
    n = c.n
    w_min = majority_threshold(n)
    layers = [w for w in (w_min, w_min - 1) if 0 <= w <= n]
    if samples is None:
        need = sum(layer_size(n, w) for w in layers)
        if need > cap:
            raise CapExceeded(
                f"critical layers hold {need} assignments, over the cap {cap}; "
                "use sampled mode"
            )
        if n > 64:
            raise CapExceeded("exact layer enumeration supports n up to 64")
        parts = []
        for w in layers:
            jobs = list(_layer_chunks_exact(n, w, chunk))
            parts += _run_chunks(_work_layer_exact, jobs, workers, {"circuit": c})
        cd, ed, total, errs = _merge_counts(n, parts)
        return VerificationReport("layers", total, errs, cd, ed)
    if seed is None:
        raise ValueError("sampled mode needs a seed")
    jobs = []
    for w in layers:
        done = 0
        index = 0
        while done < samples:
            size = min(chunk, samples - done)
            jobs.append((w, size, index))
            done += size
            index += 1
    parts = _run_chunks(_work_layer_sample, jobs, workers, {"circuit": c, "seed": seed})
    cd, ed, total, errs = _merge_counts(n, parts)
    return VerificationReport("sample", total, errs, cd, ed, seed=seed)


def estimate_agreement(
    c: LayeredCircuit,
    samples: int,
    seed: int,
    *,
    delta: float = 0.01,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> VerificationReport:
    """Agreement rate with majority over i.i.d. uniform random inputs.

    The reported half-width sqrt(ln(2/delta) / (2*samples)) bounds the
    deviation of the observed rate from the true one with probability at
    least 1 - delta, with no distributional assumptions.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    jobs = []
    done = 0
    index = 0
    while done < samples:
        size = min(chunk, samples - done)
        jobs.append((size, index))
        done += size
        index += 1
    parts = _run_chunks(_work_agreement, jobs, workers, {"circuit": c, "seed": seed})
    cd, ed, total, errs = _merge_counts(c.n, parts)
    half = math.sqrt(math.log(2.0 / delta) / (2.0 * samples))
    return VerificationReport("sample", total, errs, cd, ed, seed=seed, ci_halfwidth=half)


# -- colex ranking utilities (small-n oracle for the samplers) --------------


def colex_rank(ones: tuple[int, ...]) -> int:
    """Rank of a strictly increasing tuple of one-positions in colex order."""
    r = 0
    for j, p in enumerate(sorted(ones), start=1):
        r += math.comb(p, j)
    return r


def colex_unrank(n: int, w: int, rank: int) -> tuple[int, ...]:
    """Inverse of colex_rank over 0-based position tuples of length w."""
    if not 0 <= rank < math.comb(n, w):
        raise ValueError(f"rank {rank} out of range for C({n},{w})")
    ones = []
    for j in range(w, 0, -1):
        p = j - 1
        while math.comb(p + 1, j) <= rank:
            p += 1
        ones.append(p)
        rank -= math.comb(p, j)
    return tuple(reversed(ones))
