"""Reproducible Monte-Carlo sweeps over the number of tests."""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import bounds
from .channel import EveView, OutcomeVector, eavesdrop, run_tests
from .decode import DEFAULT_ML_CAP, dnd_decode, dnd_success, ml_decode, ml_success
from .design import (
    DesignParams,
    SecrecyMode,
    DefectiveSet,
    assign_rows,
    bin_size,
    generate_codebook,
    realize_design,
)
from .secrecy import posterior_over_w

CSV_COLUMNS = (
    "T", "M", "ml_success", "ml_ci", "dnd_success", "dnd_ci", "mean_survivors",
    "mi_bits", "mi_se", "thr_ml", "thr_dnd", "thr_converse", "dnd_bound",
)
TRACE_COLUMNS = ("trial_id", "w_true", "Y", "Z", "decoder", "success", "tie", "n_survivors")
DECODERS = ("ml", "dnd")
ENGINES = ("auto", "full", "fast")
CHUNK = 200
# auto engine switches DND-only sweeps to conditional sampling above this many codebook bits
FAST_ENGINE_BITS = 1 << 16


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    params: DesignParams
    t_grid: tuple
    trials: int = 100
    master_seed: int = 0
    decoders: frozenset = frozenset({"dnd"})
    ml_cap: int = DEFAULT_ML_CAP
    leakage: bool = False
    output_path: str = "sweep.csv"
    eps: float = 0.0
    engine: str = "auto"
    fixed_m: int | None = None
    fixed_codebook: bool = False

    def __post_init__(self):
        grid = tuple(int(t) for t in self.t_grid)
        if not grid:
            raise ConfigError("t_grid must be non-empty")
        if any(t < 1 for t in grid):
            raise ConfigError("t_grid entries must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("t_grid must be strictly increasing")
        object.__setattr__(self, "t_grid", grid)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        decoders = frozenset(self.decoders)
        if not decoders <= set(DECODERS):
            raise ConfigError(f"unknown decoder(s) {sorted(decoders - set(DECODERS))}")
        object.__setattr__(self, "decoders", decoders)
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if self.engine == "fast" and (decoders - {"dnd"} or self.leakage or self.fixed_codebook):
            raise ConfigError("the fast engine only supports DND on fresh codebooks without leakage")
        if self.fixed_m is not None and self.fixed_m < 1:
            raise ConfigError("fixed_m must be >= 1")
        if self.ml_cap < 1:
            raise ConfigError("ml_cap must be >= 1")

    def params_at(self, t: int) -> DesignParams:
        return dataclasses.replace(self.params, n_tests=int(t))

    def bin_size_at(self, t: int) -> int:
        return self.fixed_m if self.fixed_m is not None else bin_size(self.params_at(t))

    def engine_at(self, t: int) -> str:
        if self.engine != "auto":
            return self.engine
        if self.decoders != {"dnd"} or self.leakage or self.fixed_codebook:
            return "full"
        p = self.params
        bits = p.n_items * self.bin_size_at(t) * t
        return "fast" if bits > FAST_ENGINE_BITS else "full"


# -- config parsing --------------------------------------------------------------

_BOOL = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


def _parse_value(key, raw, lineno):
    try:
        if key in ("n", "k", "trials", "seed", "ml_cap", "fixed_m"):
            return int(raw)
        if key in ("delta", "eps_prime", "density", "eps"):
            return float(raw)
        if key == "t_grid":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if key == "decoders":
            return frozenset(x.strip() for x in raw.split(",") if x.strip() and x.strip() != "none")
        if key in ("leakage", "fixed_codebook"):
            return _BOOL[raw.lower()]
        return raw
    except (ValueError, KeyError):
        raise ConfigError(f"line {lineno}: cannot parse {key}={raw!r}") from None


CONFIG_KEYS = (
    "n", "k", "t_grid", "delta", "eps_prime", "mode", "trials", "seed", "decoders",
    "ml_cap", "leakage", "out", "density", "eps", "engine", "fixed_m", "fixed_codebook",
)


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw, lineno)

    for key in ("n", "k", "t_grid"):
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    delta = values.get("delta", 0.0)
    if not 0.0 <= delta < 1.0:
        raise ConfigError(f"delta must lie in [0, 1), got {delta}")
    eps_prime = values.get("eps_prime", 0.0)
    if eps_prime < 0:
        raise ConfigError(f"eps_prime must be >= 0, got {eps_prime}")
    mode = values.get("mode", "weak")
    if mode not in ("weak", "strong"):
        raise ConfigError(f"mode must be weak or strong, got {mode!r}")
    if values["k"] < 1 or values["n"] <= values["k"]:
        raise ConfigError(f"need 0 < k < n, got n={values['n']}, k={values['k']}")
    density = values.get("density")
    if density is not None and not 0 < density < 1:
        raise ConfigError(f"density must lie in (0, 1), got {density}")
    if values.get("trials", 1) < 1:
        raise ConfigError("trials must be >= 1")
    if values.get("ml_cap", 1) < 1:
        raise ConfigError("ml_cap must be >= 1")
    if values.get("eps", 0.0) < 0:
        raise ConfigError("eps must be >= 0")
    grid = values["t_grid"]
    if not grid:
        raise ConfigError("t_grid must be non-empty")
    try:
        params = DesignParams(
            values["n"], values["k"], grid[0], delta, eps_prime, density, SecrecyMode(mode)
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(
        params=params,
        t_grid=grid,
        trials=values.get("trials", 100),
        master_seed=values.get("seed", 0),
        decoders=values.get("decoders", frozenset({"dnd"})),
        ml_cap=values.get("ml_cap", DEFAULT_ML_CAP),
        leakage=values.get("leakage", False),
        output_path=values.get("out", "sweep.csv"),
        eps=values.get("eps", 0.0),
        engine=values.get("engine", "auto"),
        fixed_m=values.get("fixed_m"),
        fixed_codebook=values.get("fixed_codebook", False),
    )


# -- single trials -----------------------------------------------------------------


@dataclass
class TrialOutcome:
    trial_id: int
    w_true: int
    y: OutcomeVector | None = None
    z: EveView | None = None
    dnd_success: bool | None = None
    dnd_survivors: int | None = None
    ml_success: bool | None = None
    ml_tie: bool | None = None
    ml_bin_sets: int | None = None
    gain_bits: float | None = None


def trial_seed(master_seed: int, t: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, t, trial])


def run_trial(config: ExperimentConfig, t: int, trial: int, keep_vectors: bool = False) -> TrialOutcome:
    params = config.params_at(t)
    m = config.bin_size_at(t)
    ss_codebook, ss_rows, ss_set, ss_eve = trial_seed(config.master_seed, t, trial).spawn(4)

    if config.engine_at(t) == "fast" and not keep_vectors:
        return _fast_dnd_trial(params, m, trial, np.random.default_rng(ss_set))

    if config.fixed_codebook:
        ss_codebook = np.random.SeedSequence([config.master_seed & 0xFFFFFFFFFFFFFFFF, t])
    codebook_seed = int(ss_codebook.generate_state(1, np.uint64)[0])
    codebook = generate_codebook(params, codebook_seed, m=m)
    truth = DefectiveSet.random(params.n_items, params.n_defective, np.random.default_rng(ss_set))
    design = realize_design(codebook, assign_rows(codebook, np.random.default_rng(ss_rows)))
    y = run_tests(design, truth)
    out = TrialOutcome(trial, truth.index_w)

    if "dnd" in config.decoders:
        res = dnd_decode(codebook, y)
        out.dnd_success = dnd_success(res, truth)
        out.dnd_survivors = res.n_survivors
    if "ml" in config.decoders:
        res = ml_decode(codebook, y, config.ml_cap)
        out.ml_success = ml_success(res, truth)
        out.ml_tie = res.n_bin_sets > 1
        out.ml_bin_sets = res.n_bin_sets
    z = None
    if config.leakage or keep_vectors:
        z = eavesdrop(y, params.delta, np.random.default_rng(ss_eve))
    if config.leakage:
        out.gain_bits = posterior_over_w(codebook, z, config.ml_cap).info_gain_bits
    if keep_vectors:
        out.y, out.z = y, z
    return out


def _fast_dnd_trial(params: DesignParams, m: int, trial: int, rng: np.random.Generator) -> TrialOutcome:
    """DND outcome sampled from its exact conditional law.

    Only the K selected defective rows shape Y.  Given Y with ``n0`` negative
    tests, each non-defective row survives independently with probability
    ``q**n0`` and a bin of M such rows survives with ``1 - (1 - q**n0)**M``,
    independently across items, so the survivor count is binomial.
    """
    n, k, p = params.n_items, params.n_defective, params.row_density
    truth = DefectiveSet.random(n, k, rng)
    rows = rng.random((k, params.n_tests)) < p
    n0 = int(params.n_tests - rows.any(axis=0).sum())
    row_ok = (1.0 - p) ** n0
    survive = -math.expm1(m * math.log1p(-row_ok)) if row_ok < 1.0 else 1.0
    extra = int(rng.binomial(n - k, survive))
    return TrialOutcome(trial, truth.index_w, dnd_success=extra == 0, dnd_survivors=k + extra)


def _run_chunk(args):
    config, t, start, stop = args
    return [run_trial(config, t, i) for i in range(start, stop)]


# -- sweeps ------------------------------------------------------------------------


@dataclass
class SweepRecord:
    T: int
    M: int
    ml_success: float | None = None
    ml_ci: float | None = None
    dnd_success: float | None = None
    dnd_ci: float | None = None
    mean_survivors: float | None = None
    mi_bits: float | None = None
    mi_se: float | None = None
    thr_ml: float | None = None
    thr_dnd: float | None = None
    thr_converse: float | None = None
    dnd_bound: float | None = None


@dataclass
class SweepResult:
    records: list = field(default_factory=list)

    def column(self, name):
        return [getattr(r, name) for r in self.records]


def wilson_halfwidth(successes: int, n: int) -> float:
    lo, hi = proportion_confint(successes, n, alpha=0.05, method="wilson")
    return float(hi - lo) / 2


def analytic_columns(config: ExperimentConfig, t: int) -> dict:
    p = config.params
    n, k, delta = p.n_items, p.n_defective, p.delta
    out = {
        "thr_ml": bounds.t_threshold_ml(n, k, delta, config.eps).value,
        "thr_converse": bounds.t_converse(n, k, delta, 0.0),
        "thr_dnd": None,
        "dnd_bound": None,
    }
    if bounds.dnd_margin(k, delta) > 0:
        out["thr_dnd"] = bounds.t_threshold_dnd(n, k, delta, config.eps)
        beta = t / (k * math.log2(n))
        out["dnd_bound"] = bounds.dnd_error_bound(n, k, delta, beta).bound
    return out


def worker_count(requested: int | None = None) -> int:
    workers = requested or os.cpu_count() or 1
    cap = os.environ.get("SGT_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"SGT_THREADS must be an integer, got {cap!r}") from None
    return max(1, workers)


def run_trials(config: ExperimentConfig, t: int, workers: int = 1) -> list[TrialOutcome]:
    """All trials at one T, ordered by trial index whatever the scheduling."""
    chunks = [(config, t, s, min(s + CHUNK, config.trials)) for s in range(0, config.trials, CHUNK)]
    if workers <= 1 or len(chunks) == 1:
        results = [_run_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, chunks))
    return [o for chunk in results for o in chunk]


def summarize(config: ExperimentConfig, t: int, outcomes: list[TrialOutcome]) -> SweepRecord:
    rec = SweepRecord(T=t, M=config.bin_size_at(t), **analytic_columns(config, t))
    n = len(outcomes)
    if "dnd" in config.decoders:
        wins = sum(bool(o.dnd_success) for o in outcomes)
        rec.dnd_success = wins / n
        rec.dnd_ci = wilson_halfwidth(wins, n)
        rec.mean_survivors = sum(o.dnd_survivors for o in outcomes) / n
    if "ml" in config.decoders:
        wins = sum(bool(o.ml_success) for o in outcomes)
        rec.ml_success = wins / n
        rec.ml_ci = wilson_halfwidth(wins, n)
    if config.leakage:
        gains = np.array([o.gain_bits for o in outcomes])
        rec.mi_bits = float(gains.mean())
        rec.mi_se = float(gains.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return rec


def run_sweep(config: ExperimentConfig, workers: int | None = 1) -> SweepResult:
    """One record per T.  Output depends only on ``config``, not on ``workers``."""
    workers = worker_count(workers)
    result = SweepResult()
    for t in config.t_grid:
        result.records.append(summarize(config, t, run_trials(config, t, workers)))
    return result


# -- CSV I/O ---------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def sweep_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in result.records:
        writer.writerow([_fmt(getattr(rec, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(sweep_csv_text(result))


def read_csv(path) -> SweepResult:
    result = SweepResult()
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for row in reader:
            kwargs = {}
            for c in CSV_COLUMNS:
                raw = row[c]
                if raw == "":
                    kwargs[c] = None
                elif c in ("T", "M"):
                    kwargs[c] = int(raw)
                else:
                    kwargs[c] = float(raw)
            result.records.append(SweepRecord(**kwargs))
    return result


def trace_rows(config: ExperimentConfig, outcomes: list[TrialOutcome]):
    """Per-trial, per-decoder trace rows in ``TRACE_COLUMNS`` order."""
    for o in outcomes:
        base = [o.trial_id, o.w_true, str(o.y) if o.y is not None else "", str(o.z) if o.z is not None else ""]
        if "dnd" in config.decoders:
            yield base + ["dnd", int(o.dnd_success), 0, o.dnd_survivors]
        if "ml" in config.decoders:
            yield base + ["ml", int(o.ml_success), int(o.ml_tie), o.ml_bin_sets]


def write_trace(config: ExperimentConfig, outcomes: list[TrialOutcome], path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        writer.writerows(trace_rows(config, outcomes))


def leakage_csv_rows(rows) -> str:
    """Rows of (N, K, T, M, delta, trials, LeakageEstimate) as leakage-sweep CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("N", "K", "T", "M", "delta", "trials", "mi_bits", "std_err", "normalized"))
    for n, k, t, m, delta, trials, est in rows:
        writer.writerow([n, k, t, m, _fmt(delta), trials, _fmt(est.mi_bits), _fmt(est.std_err), _fmt(est.normalized)])
    return buf.getvalue()
