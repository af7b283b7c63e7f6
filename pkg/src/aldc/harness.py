"""Monte-Carlo experiments: configuration, trials, CSV output.

A config file is INI-style::

    [code]
    name = insdel_paldc      ; paldc | insdel_paldc | raldc_hamming | raldc_insdel
    k = 16384
    a = 16
    A = 32
    c = 8
    t = 32

    [compiler]               ; insdel codes only, all optional
    tau = 32
    gamma = 0.1
    theta = 0.05
    pad_rate = 0.25

    [puzzle]                 ; raldc codes only, all optional
    T = 16384
    copies = 9
    sample_copies = 5

    [experiment]
    seed = 1
    trials = 20
    deltas = 0, 0.001
    kappas = 128, 1024
    ks = 16384               ; optional, defaults to [code] k
    strategies = uniform_indel
    output = results.csv
    timing = false           ; wall_ms is written as NA unless true

Every trial derives its own seed from ``(master seed, cell, trial)`` so a
run is reproducible cell by cell and independent of scheduling.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .codes import Code, CompilerKnobs
from .errors import DecodeFailure, InvalidInput
from .hamming_paldc import PaldcParams
from .oracle import CorruptedOracle

CSV_HEADER = ["code", "n", "k", "delta", "kappa", "strategy", "seed", "success", "queries", "alpha", "wall_ms"]


@dataclass(frozen=True)
class Cell:
    delta: float
    kappa: int
    k: int
    strategy: str


@dataclass
class ExperimentConfig:
    code: Code
    cells: list[Cell]
    trials: int = 10
    seed: int = 1
    output: str | None = None
    timing: bool = False
    workers: int = 1

    def problems(self) -> list[str]:
        out = []
        for k in sorted({c.k for c in self.cells}):
            out += [f"k={k}: {p}" for p in self.code.with_k(k).problems()]
        for c in self.cells:
            if c.strategy not in self.code.strategies:
                out.append(f"strategy {c.strategy!r} does not apply to {self.code.name}")
            if not 1 <= c.kappa <= c.k:
                out.append(f"kappa={c.kappa} outside [1, k={c.k}]")
            if c.delta < 0:
                out.append(f"delta={c.delta} is negative")
        if self.trials < 0:
            out.append("trials must be non-negative")
        return sorted(set(out), key=out.index)


@dataclass
class TrialRecord:
    code: str
    n: int
    k: int
    delta: float
    kappa: int
    strategy: str
    seed: int
    success: bool
    queries: int
    alpha: float
    wall_ms: float | None = None

    def row(self) -> list[str]:
        return [self.code, str(self.n), str(self.k), repr(self.delta), str(self.kappa), self.strategy,
                str(self.seed), "1" if self.success else "0", str(self.queries), repr(self.alpha),
                "NA" if self.wall_ms is None else f"{self.wall_ms:.3f}"]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(v)) for v in text.replace(";", ",").split(",") if v.strip()]


def _typed(cls, section) -> dict:
    out = {}
    for f in fields(cls):
        if f.name in section:
            raw = section[f.name]
            kind = type(getattr(cls(), f.name))
            out[f.name] = kind(float(raw)) if kind is int else kind(raw)
    return out


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep "A" distinct from "a"
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidInput(f"config: {exc}") from None
    try:
        sec = cp["code"] if cp.has_section("code") else {}
        name = sec.get("name", "paldc")
        paldc = PaldcParams(**_typed(PaldcParams, sec))
        knobs = CompilerKnobs(**_typed(CompilerKnobs, cp["compiler"] if cp.has_section("compiler") else {}))
        pz = cp["puzzle"] if cp.has_section("puzzle") else {}
        code = Code(name, paldc, knobs, T=int(pz.get("T", 1 << 14)), copies=int(pz.get("copies", 9)),
                    sample_copies=int(pz.get("sample_copies", 5)))
        ex = cp["experiment"] if cp.has_section("experiment") else {}
        deltas = _floats(ex.get("deltas", "0"))
        kappas = _ints(ex.get("kappas", str(paldc.block_bits)))
        ks = _ints(ex.get("ks", str(paldc.k)))
        strategies = [s.strip() for s in ex.get("strategies", code.strategies[0]).split(",") if s.strip()]
        cells = [Cell(d, kap, k, s) for k, d, kap, s in itertools.product(ks, deltas, kappas, strategies)]
        timing = str(ex.get("timing", "false")).strip().lower() in ("1", "true", "yes", "on")
        return ExperimentConfig(code, cells, trials=int(ex.get("trials", 10)), seed=int(ex.get("seed", 1)),
                                output=ex.get("output"), timing=timing, workers=int(ex.get("workers", 1)))
    except (ValueError, TypeError, KeyError) as exc:
        raise InvalidInput(f"config: {exc}") from None


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None


def trial_seed(master: int, cell: int, trial: int) -> int:
    digest = hashlib.sha256(f"aldc-trial:{master}:{cell}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _sub_seed(seed: int, label: str) -> bytes:
    return hashlib.sha256(f"{label}:{seed}".encode()).digest()


def run_trial(code: Code, cell: Cell, seed: int, timing: bool = False) -> TrialRecord:
    code = code.with_k(cell.k)
    start = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=int.from_bytes(_sub_seed(seed, "rng")[:16], "little")))
    x = rng.integers(0, 2, code.k, dtype=np.uint8)
    key = code.gen(_sub_seed(seed, "key"))
    word = code.encode(x, key, _sub_seed(seed, "enc"))
    bad, _ = code.corrupt(word, cell.delta, cell.strategy, int.from_bytes(_sub_seed(seed, "chan")[:8], "little"))
    L = int(rng.integers(1, code.k - cell.kappa + 2))
    R = L + cell.kappa - 1
    oracle = CorruptedOracle(bad)
    try:
        out = code.decode(oracle, L, R, key, rng)
        success = bool(np.array_equal(out, x[L - 1 : R]))
    except DecodeFailure:
        success = False
    wall = (time.perf_counter() - start) * 1e3 if timing else None
    q = oracle.queries_used
    return TrialRecord(code.name, code.n, code.k, cell.delta, cell.kappa, cell.strategy, seed,
                       success, q, q / (R - L + 1), wall)


def _run_one(args):
    code, cell, seed, timing, order = args
    return order, run_trial(code, cell, seed, timing)


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> list[TrialRecord]:
    probs = cfg.problems()
    if probs:
        raise InvalidInput("invalid configuration:\n" + "\n".join(probs))
    jobs = [(cfg.code, cell, trial_seed(cfg.seed, ci, t), cfg.timing, (ci, t))
            for ci, cell in enumerate(cfg.cells) for t in range(cfg.trials)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            done = list(pool.map(_run_one, jobs))
    else:
        done = [_run_one(j) for j in jobs]
    done.sort(key=lambda pair: pair[0])
    records = [rec for _, rec in done]
    if write and cfg.output:
        with open(cfg.output, "w", newline="", encoding="utf-8") as fh:
            fh.write(records_csv(records))
    return records


def records_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def summary_table(records: list[TrialRecord]) -> str:
    """Success rate and mean / max alpha per (delta, kappa, n, strategy)."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.delta, rec.kappa, rec.n, rec.strategy), []).append(rec)
    lines = [f"{'delta':>10} {'kappa':>7} {'n':>9} {'strategy':>15} {'trials':>6} {'success':>8} {'mean_a':>12} {'max_a':>12}"]
    for (d, kap, n, s), recs in groups.items():
        al = [r.alpha for r in recs]
        rate = sum(r.success for r in recs) / len(recs)
        lines.append(f"{d:>10g} {kap:>7} {n:>9} {s:>15} {len(recs):>6} {rate:>8.3f} "
                     f"{np.mean(al):>12.2f} {max(al):>12.2f}")
    return "\n".join(lines)
