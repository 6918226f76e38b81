"""Monte Carlo comparison harness: paired replicates, error records,
mean-equality testing, and rank grouping per (model, tau) cell."""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .estimators import EstimatorSpec, SampleSession
from .intervals import levelset_error
from .models import TruthOracle, get_model


class ConfigError(ValueError):
    """Invalid simulation configuration; message names the offending field."""


@dataclass(frozen=True)
class SimulationConfig:
    models: tuple[int, ...]
    methods: tuple[EstimatorSpec, ...]
    taus: tuple[float, ...]
    n: int
    replicates: int
    seed: int
    alpha: float = 0.05
    threads: int = 1

    def __post_init__(self):
        if not self.models:
            raise ConfigError("models: must be a nonempty list of ids in 1..18")
        if any(not 1 <= m <= 18 for m in self.models):
            raise ConfigError("models: ids must be in 1..18")
        if len(set(self.models)) != len(self.models):
            raise ConfigError("models: duplicate ids")
        if not self.methods:
            raise ConfigError("methods: must be nonempty")
        labels = [m.label for m in self.methods]
        if len(set(labels)) != len(labels):
            raise ConfigError("methods: duplicate labels; set distinct 'label' fields")
        if not self.taus or any(not 0.0 < t < 1.0 for t in self.taus):
            raise ConfigError("taus: values must lie in (0, 1)")
        if self.n < 10:
            raise ConfigError("n: must be >= 10")
        if self.replicates < 2:
            raise ConfigError("replicates: must be >= 2")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError("alpha: must be in (0, 0.5)")
        if self.threads < 1:
            raise ConfigError("threads: must be >= 1")

    @classmethod
    def from_dict(cls, obj: dict) -> "SimulationConfig":
        try:
            methods = tuple(_spec_from_dict(m) for m in obj["methods"])
            return cls(
                models=tuple(int(m) for m in obj["models"]),
                methods=methods,
                taus=tuple(float(t) for t in obj["taus"]),
                n=int(obj["n"]),
                replicates=int(obj["replicates"]),
                seed=int(obj["seed"]),
                alpha=float(obj.get("alpha", 0.05)),
                threads=int(obj.get("threads", 1)),
            )
        except KeyError as exc:
            raise ConfigError(f"{exc.args[0]}: missing required field") from exc
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "models": list(self.models),
            "methods": [_spec_to_dict(m) for m in self.methods],
            "taus": list(self.taus),
            "n": self.n,
            "replicates": self.replicates,
            "seed": self.seed,
            "alpha": self.alpha,
            "threads": self.threads,
        }


def _spec_from_dict(obj: dict) -> EstimatorSpec:
    known = {"method", "bandwidth", "threshold", "M", "r", "j", "label"}
    extra = set(obj) - known
    if extra:
        raise ConfigError(f"methods: unknown keys {sorted(extra)}")
    return EstimatorSpec(
        method=obj["method"],
        bandwidth=obj.get("bandwidth"),
        threshold=obj.get("threshold"),
        M=obj.get("M"),
        r=obj.get("r"),
        j=obj.get("j"),
        name=obj.get("label"),
    )


def _spec_to_dict(spec: EstimatorSpec) -> dict:
    out: dict = {"method": spec.method}
    for key, attr in (("bandwidth", "bandwidth"), ("threshold", "threshold"),
                      ("M", "M"), ("r", "r"), ("j", "j"), ("label", "name")):
        val = getattr(spec, attr)
        if val is not None:
            out[key] = val
    return out


def default_config(desk: bool = False, seed: int = 20100501, threads: int = 1) -> SimulationConfig:
    """The shipped final-comparison configuration; `desk` scales it down."""
    methods = (
        EstimatorSpec(method="plugin", bandwidth="cv", threshold="hyndman", name="cv"),
        EstimatorSpec(method="walther", bandwidth="sj", r=0.1, name="w-r3"),
        EstimatorSpec(method="chr", bandwidth="sj", threshold="hyndman", r=0.1, name="chr-r3"),
        EstimatorSpec(method="ms", M=2, name="ms2"),
        EstimatorSpec(method="ms", M=1, name="ms1"),
    )
    return SimulationConfig(
        models=tuple(range(1, 19)),
        methods=methods,
        taus=(0.2, 0.5, 0.8),
        n=400 if desk else 1600,
        replicates=200 if desk else 1000,
        seed=seed,
        alpha=0.05,
        threads=threads,
    )


@dataclass(frozen=True)
class ErrorRecord:
    """One replicate's error for one (model, method, tau) cell."""

    model_id: int
    method: str
    tau: float
    replicate: int
    error: float
    degenerate: str = ""  # "", "empty-estimate", or "estimator-error:<type>"


@dataclass
class RunResult:
    """Records plus the diagnostics the manifest wants."""

    records: list[ErrorRecord]
    model_checksums: dict[int, str] = field(default_factory=dict)
    event_counts: dict[str, int] = field(default_factory=dict)


def replicate_seed(seed: int, model_id: int, b: int) -> int:
    """Stable 64-bit per-replicate seed derived by hashing."""
    digest = hashlib.sha256(f"{seed}:{model_id}:{b}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def run_simulation(config: SimulationConfig,
                   session_factory: Callable | None = None) -> RunResult:
    """Run the full replicate grid; output is deterministic in the config and
    independent of the thread count.

    Every method and tau sees the identical sample for a fixed (model,
    replicate) pair.  Estimator failures and empty estimates are recorded as
    degenerate with the full missed true mass as the error.
    """
    factory = session_factory or (lambda sample, model: SampleSession(sample))
    models = [get_model(m) for m in config.models]
    truths = {(m.id, tau): TruthOracle.compute(m, tau)
              for m in models for tau in config.taus}

    def worker(task: tuple[int, int]):
        mi, b = task
        model = models[mi]
        sample = model.sample(config.n, replicate_seed(config.seed, model.id, b))
        digest = hashlib.sha256(sample.tobytes()).hexdigest()
        session = factory(sample, model)
        cell_errors = []
        for spec in config.methods:
            for tau in config.taus:
                truth = truths[(model.id, tau)]
                try:
                    est = session.estimate(spec, tau)
                    err = levelset_error(truth.level_set, est, model)
                    degenerate = "" if est else "empty-estimate"
                except Exception as exc:  # noqa: BLE001 - failures become data
                    err = truth.true_mass
                    degenerate = f"estimator-error:{type(exc).__name__}"
                cell_errors.append((err, degenerate))
        return digest, cell_errors, list(getattr(session, "events", []))

    tasks = [(mi, b) for mi in range(len(models)) for b in range(config.replicates)]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(worker, tasks))
    else:
        outcomes = [worker(t) for t in tasks]

    by_task = dict(zip(tasks, outcomes))
    records: list[ErrorRecord] = []
    event_counts: dict[str, int] = {}
    checksums: dict[int, str] = {}
    for mi, model in enumerate(models):
        chain = hashlib.sha256()
        for b in range(config.replicates):
            digest, _, events = by_task[(mi, b)]
            chain.update(digest.encode())
            for ev in events:
                key = ev.split(":")[0]
                event_counts[key] = event_counts.get(key, 0) + 1
        checksums[model.id] = chain.hexdigest()
        for si, spec in enumerate(config.methods):
            for ti, tau in enumerate(config.taus):
                cell = si * len(config.taus) + ti
                for b in range(config.replicates):
                    err, degenerate = by_task[(mi, b)][1][cell]
                    records.append(ErrorRecord(model.id, spec.label, tau, b, err, degenerate))
                    if degenerate:
                        event_counts["degenerate-estimate"] = (
                            event_counts.get("degenerate-estimate", 0) + 1)
    return RunResult(records, checksums, event_counts)


# -- statistics over records --------------------------------------------------

def _matching_errors(records: Sequence[ErrorRecord], model_id: int, method: str,
                     tau: float) -> np.ndarray:
    rows = [(r.replicate, r.error) for r in records
            if r.model_id == model_id and r.method == method and r.tau == tau]
    rows.sort()
    return np.array([e for _, e in rows])


def mean_errors(records: Sequence[ErrorRecord], model_id: int, method: str,
                tau: float) -> tuple[float, float, int]:
    """Mean, standard error, and count of the matching replicate errors."""
    errs = _matching_errors(records, model_id, method, tau)
    k = len(errs)
    if k < 2:
        raise ValueError("need at least 2 matching records")
    return float(np.mean(errs)), float(np.std(errs, ddof=1) / np.sqrt(k)), k


def paired_mean_test(errs_a: np.ndarray, errs_b: np.ndarray) -> float:
    """Two-sided paired t-test p-value on replicate-aligned error vectors.

    Degenerate cases: identical vectors give p = 1; a deterministic nonzero
    difference gives p = 0.
    """
    a = np.asarray(errs_a, dtype=float)
    b = np.asarray(errs_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("error vectors must be replicate-aligned with equal length")
    if len(a) < 2:
        raise ValueError("need at least 2 paired replicates")
    d = a - b
    sd = float(np.std(d, ddof=1))
    mean = float(np.mean(d))
    if sd == 0.0:
        return 1.0 if mean == 0.0 else 0.0
    t = mean / (sd / np.sqrt(len(d)))
    return float(2.0 * stats.t.sf(abs(t), len(d) - 1))


@dataclass(frozen=True)
class RankRow:
    method: str
    mean: float
    stderr: float
    group: int  # 1 = best group


def rank_methods(records: Sequence[ErrorRecord], model_id: int, tau: float,
                 alpha: float) -> list[RankRow]:
    """Methods sorted by mean error and chain-grouped by adjacent equality tests.

    Adjacent methods merge into one colour group when the paired test does
    not reject mean equality at level alpha; the group index increments at
    each rejected adjacent pair.
    """
    methods = []
    seen = set()
    for r in records:
        if r.model_id == model_id and r.tau == tau and r.method not in seen:
            seen.add(r.method)
            methods.append(r.method)
    if len(methods) < 2:
        raise ValueError("ranking needs at least 2 methods")
    stats_rows = []
    for m in methods:
        mean, stderr, _ = mean_errors(records, model_id, m, tau)
        stats_rows.append((mean, m, stderr))
    stats_rows.sort()
    out: list[RankRow] = []
    group = 1
    for i, (mean, method, stderr) in enumerate(stats_rows):
        if i > 0:
            prev = stats_rows[i - 1][1]
            p = paired_mean_test(_matching_errors(records, model_id, prev, tau),
                                 _matching_errors(records, model_id, method, tau))
            if p < alpha:
                group += 1
        out.append(RankRow(method, mean, stderr, group))
    return out


# -- CSV round-trip ------------------------------------------------------------

CSV_HEADER = "model,method,tau,replicate,error,degenerate"


def records_to_csv(records: Sequence[ErrorRecord]) -> str:
    """Shortest round-trip decimal formatting keeps reruns byte-identical."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(f"{r.model_id},{r.method},{r.tau!r},{r.replicate},{r.error!r},{r.degenerate}")
    return "\n".join(lines) + "\n"


def records_from_csv(text: str) -> list[ErrorRecord]:
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"errors CSV must start with header {CSV_HEADER!r}")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise ValueError(f"bad errors CSV row: {ln!r}")
        out.append(ErrorRecord(int(parts[0]), parts[1], float(parts[2]),
                               int(parts[3]), float(parts[4]), parts[5]))
    return out
