"""Monte Carlo and exact estimates of surjection probabilities for random presentations.

The event for a presentation with relators ``r_1..r_rho`` of length l is

    every r_k lies in K = ker f   and   their images do not generate K' = H_1(K; F_q)
    as an F_q[J]-module,

which is exactly the existence of a surjection, carrying f, onto some
extension of J by an irreducible F_q[J]-module.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import CapacityError, InvalidInputError
from .fqlin import check_prime
from .groups import ORDER_CAP, group_from_spec
from .schreier import (
    SchreierSystem,
    build_split_extension,
    build_system,
    crossed_evaluate_batch,
    decode_fiber,
    min_module_generators,
    module_generates_batch,
)
from .walk import build_chain, period, summed_distribution
from .words import ReducedWord, index_to_letter, sample_reduced_indices

__all__ = [
    "ExperimentConfig",
    "EstimateResult",
    "SweepRow",
    "ConfigError",
    "parse_config",
    "load_config",
    "trial_rng",
    "sample_presentation",
    "estimate_surjection_probability",
    "exact_surjection_probability",
    "walk_epsilon",
    "lemma_bound",
    "proposition_bound",
    "c_of_M",
    "sweep",
    "write_csv",
    "write_manifest",
    "EXACT_TUPLE_CAP",
    "CSV_HEADER",
]

EXACT_TUPLE_CAP = 10**7
DEFAULT_BLOCK = 4096
CSV_HEADER = ["l", "rho", "q", "estimate", "ci", "exact", "bound", "parity"]


class ConfigError(InvalidInputError):
    pass


def _parse_lengths(text: str) -> tuple[int, ...]:
    """``"50"``, ``"2,4,8"``, ``"2..20"`` or ``"2..20:2"``."""
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if ".." in part:
            rng, _, step = part.partition(":")
            lo, hi = rng.split("..")
            out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
        elif part:
            out.append(int(part))
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    lengths: tuple[int, ...]
    rho: int
    group: str  # see groups.group_from_spec
    f_images: tuple[int, ...]
    q: int
    trials: int
    seed: int
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not self.lengths or min(self.lengths) < 1:
            raise ConfigError("l must be a nonempty list of lengths >= 1")
        if self.rho < 0:
            raise ConfigError(f"rho must be >= 0, got {self.rho}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if len(self.f_images) != self.n:
            raise ConfigError(f"f lists {len(self.f_images)} images for n = {self.n}")
        if self.block_size < 1:
            raise ConfigError("block_size must be >= 1")
        try:
            check_prime(self.q)
        except InvalidInputError as exc:
            raise ConfigError(f"q: {exc}") from None

    @cached_property
    def system(self) -> SchreierSystem:
        return build_system(group_from_spec(self.group), self.f_images, self.q)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lengths"] = list(self.lengths)
        d["f_images"] = list(self.f_images)
        return d

    def to_text(self) -> str:
        return "\n".join(
            [
                f"n = {self.n}",
                f"l = {','.join(map(str, self.lengths))}",
                f"rho = {self.rho}",
                f"J = {self.group}",
                f"f = {' '.join(map(str, self.f_images))}",
                f"q = {self.q}",
                f"trials = {self.trials}",
                f"seed = {self.seed}",
                f"block_size = {self.block_size}",
            ]
        ) + "\n"


_REQUIRED = ("n", "l", "rho", "J", "f", "q", "trials", "seed")


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment).

    A JSON run manifest is also accepted, so a run can be repeated from its
    manifest.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        cfg = data.get("config", data)
        try:
            return ExperimentConfig(
                n=cfg["n"], lengths=tuple(cfg["lengths"]), rho=cfg["rho"], group=cfg["group"],
                f_images=tuple(cfg["f_images"]), q=cfg["q"], trials=cfg["trials"], seed=cfg["seed"],
                block_size=cfg.get("block_size", DEFAULT_BLOCK),
            )
        except KeyError as exc:
            raise ConfigError(f"{source}: manifest config is missing field {exc.args[0]!r}") from None
    kv: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        kv[key.strip()] = value.strip()
    for key in _REQUIRED:
        if key not in kv:
            raise ConfigError(f"{source}: missing required field {key!r}")
    unknown = set(kv) - set(_REQUIRED) - {"block_size"}
    if unknown:
        raise ConfigError(f"{source}: unknown field(s) {sorted(unknown)}")
    try:
        return ExperimentConfig(
            n=int(kv["n"]),
            lengths=_parse_lengths(kv["l"]),
            rho=int(kv["rho"]),
            group=kv["J"],
            f_images=tuple(int(x) for x in kv["f"].replace(",", " ").split()),
            q=int(kv["q"]),
            trials=int(kv["trials"]),
            seed=int(kv["seed"]),
            block_size=int(kv.get("block_size", DEFAULT_BLOCK)),
        )
    except ValueError as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path))


# sampling ----------------------------------------------------------------------


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based stream for one block of trials, independent of execution order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def sample_presentation(n: int, l: int, rho: int, rng: np.random.Generator) -> list[ReducedWord]:
    """``rho`` independent uniform relators from S_l (repetitions allowed)."""
    if rho == 0:
        return []
    idx = sample_reduced_indices(n, l, rho, rng)
    return [ReducedWord(tuple(index_to_letter(int(a)) for a in row), n) for row in idx]


@dataclass(frozen=True)
class EstimateResult:
    l: int
    estimate: float
    half_width: float
    trials: int
    events: int
    in_kernel: int  # trials whose relators all lie in K
    parity: str | None = None  # "even"/"odd" when the walk on the extension has period 2

    def __str__(self):
        return f"l={self.l}: {self.estimate:.5f} +/- {self.half_width:.5f} ({self.events}/{self.trials})"


def _run_block(sys: SchreierSystem, l: int, rho: int, size: int, rng: np.random.Generator):
    if rho == 0:
        return size, size  # vacuously in K; nothing generates
    letters = sample_reduced_indices(sys.n, l, size * rho, rng)
    vecs, js = crossed_evaluate_batch(sys, letters)
    vecs = vecs.reshape(size, rho, sys.D)
    in_k = (js.reshape(size, rho) == 0).all(axis=1)
    events = int((~module_generates_batch(sys, vecs[in_k])).sum()) if in_k.any() else 0
    return events, int(in_k.sum())


def estimate_surjection_probability(
    sys: SchreierSystem,
    l: int,
    rho: int,
    trials: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK,
    threads: int = 1,
    parity: str | None = None,
) -> EstimateResult:
    """Monte Carlo frequency of the surjection event over ``trials`` presentations.

    Trials are split into fixed blocks; block b draws from ``trial_rng(seed, l, b)``
    so the result does not depend on ``threads``.
    """
    nblocks = -(-trials // block_size)
    sizes = [min(block_size, trials - b * block_size) for b in range(nblocks)]

    def work(b):
        return _run_block(sys, l, rho, sizes[b], trial_rng(seed, l, b))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(nblocks)))
    else:
        parts = [work(b) for b in range(nblocks)]
    events = sum(p[0] for p in parts)
    in_k = sum(p[1] for p in parts)
    p = events / trials
    hw = 1.96 * math.sqrt(p * (1 - p) / trials)
    return EstimateResult(l, p, hw, trials, events, in_k, parity)


def exact_surjection_probability(
    sys: SchreierSystem, l: int, rho: int, order_cap: int = ORDER_CAP, tuple_cap: int = EXACT_TUPLE_CAP
) -> float:
    """Exact event probability from the walk on the split extension K' x| J.

    Sums, over all rho-tuples of fiber elements (trivial J-part), the product
    of their length-l probabilities times the non-generation indicator.
    """
    if rho == 0:
        return 1.0
    size = sys.q**sys.D
    if size**rho > tuple_cap:
        raise CapacityError(f"(q^D)^rho = {size}^{rho} exceeds tuple cap {tuple_cap}")
    H = build_split_extension(sys, cap=order_cap)
    mu = summed_distribution(build_chain(H), l)[:size]
    support = np.flatnonzero(mu > 0)
    if len(support) == 0:
        return 0.0
    total = 0.0
    combos = itertools.product(range(len(support)), repeat=rho)
    while True:
        chunk = np.array(list(itertools.islice(combos, 50000)), dtype=np.int64)
        if len(chunk) == 0:
            break
        elems = support[chunk]
        weights = mu[elems].prod(axis=1)
        fails = ~module_generates_batch(sys, decode_fiber(sys, elems))
        total += float(weights[fails].sum())
    return total


# bounds ------------------------------------------------------------------------


def lemma_bound(epsilon: float, m: int, E_size: int, J_size: int, stated: bool = True) -> float:
    """(1 - (1-eps)^m prod_{j<=m} (1 - |E|^-j)) * (c/|J|)^m.

    ``c = 2 + 2 eps`` for the bound as stated (it also covers period-2 walks);
    ``c = 1 + eps`` is the aperiodic factor obtained in the argument.  For
    eps >= 1 the uniformity factor (1-eps) is clamped at 0.
    """
    if epsilon < 0:
        raise InvalidInputError(f"epsilon must be >= 0, got {epsilon}")
    if m < 1:
        raise InvalidInputError(f"m must be >= 1, got {m}")
    prod = 1.0
    for j in range(1, m + 1):
        prod *= 1.0 - float(E_size) ** (-j)
    first = 1.0 - max(0.0, 1.0 - epsilon) ** m * prod
    c = 2.0 + 2.0 * epsilon if stated else 1.0 + epsilon
    return first * (c / J_size) ** m


def proposition_bound(m: int, q: int, J_size: int) -> float:
    """Sum of the eps = 1/2 bound over at most |J| irreducibles with |E| >= q."""
    return J_size * lemma_bound(0.5, m, q, J_size, stated=True)


def c_of_M(M: int, n: int) -> int:
    """Upper bound M*n for the number of relators needed at index bound M."""
    if M < 1 or n < 2:
        raise InvalidInputError("need M >= 1 and n >= 2")
    return M * n


@dataclass(frozen=True)
class WalkEpsilon:
    epsilon: float
    fiber_mass: float
    period: int


def walk_epsilon(sys: SchreierSystem, l: int, chain=None) -> WalkEpsilon:
    """Smallest eps for which the length-l law on the extension meets both
    uniformity requirements of the bound.

    ``|P(h | fiber) - 1/|B|| <= eps/|B|`` for every h in the fiber B = K', and
    ``P(fiber) <= kappa (1 + eps) / |J|`` with kappa the walk's period.
    """
    if chain is None:
        chain = build_chain(build_split_extension(sys))
    size = sys.q**sys.D
    mu = summed_distribution(chain, l)[:size]
    mass = float(mu.sum())
    kappa = period(chain)
    if mass == 0:
        return WalkEpsilon(0.0, 0.0, kappa)
    cond = size * float(np.abs(mu / mass - 1.0 / size).max())
    excess = sys.J.order * mass / kappa - 1.0
    return WalkEpsilon(max(cond, excess, 0.0), mass, kappa)


# sweeps and output -------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    l: int
    rho: int
    q: int
    estimate: float
    ci: float
    exact: float | None
    bound: float | None
    parity: str
    epsilon: float | None = None

    def csv_fields(self) -> list[str]:
        def f(x):
            return "" if x is None else (f"{x:.10g}" if isinstance(x, float) else str(x))

        return [f(self.l), f(self.rho), f(self.q), f(self.estimate), f(self.ci), f(self.exact),
                f(self.bound), self.parity]


def sweep(cfg: ExperimentConfig, threads: int = 1, exact: bool = True, m: int | None = None) -> list[SweepRow]:
    """One estimate per length in ``cfg.lengths``, with the bound and (when feasible) the exact value."""
    sys = cfg.system
    if m is None:
        m = min_module_generators(sys).value
    try:
        chain = build_chain(build_split_extension(sys))
        per = period(chain)
    except CapacityError:
        chain, per = None, None
    rows = []
    for l in cfg.lengths:
        parity = ("even" if l % 2 == 0 else "odd") if per == 2 else "aperiodic"
        est = estimate_surjection_probability(
            sys, l, cfg.rho, cfg.trials, cfg.seed, cfg.block_size, threads, parity if per == 2 else None
        )
        bound = eps = None
        if chain is not None:
            we = walk_epsilon(sys, l, chain)
            eps = we.epsilon
            bound = 0.0 if we.fiber_mass == 0 else lemma_bound(eps, m, sys.q, sys.J.order, stated=True)
        ex = None
        if exact:
            try:
                ex = exact_surjection_probability(sys, l, cfg.rho)
            except CapacityError:
                pass
        rows.append(SweepRow(l, cfg.rho, cfg.q, est.estimate, est.half_width, ex, bound, parity, eps))
    return rows


def write_csv(rows: Sequence[SweepRow], path: str | Path | None = None) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def write_manifest(path: str | Path, subcommand: str, config: dict, seed: int | None,
                   started: float, extra: dict | None = None) -> dict:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "seed": seed,
        "version": __version__,
        "duration_s": round(time.time() - started, 3),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
