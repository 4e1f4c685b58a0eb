"""Batch pipeline: manifest + config in, scored cohort report out.

One run reproduces the whole analysis chain: ingest raw trial CSVs, build
the elastic mean of the healthy cohort, align everyone to it, score the
three distances, and emit plot-ready tables plus a JSON summary. Outputs
are deterministic: same inputs and config give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .analytics import (
    DistanceMatrix,
    linear_regression,
    pairwise_matrix,
    rolling_correlation,
    welch_t_test,
)
from .core import (
    DegenerateInputError,
    DistanceTriple,
    InsufficientDataError,
    Trajectory,
    TrajectoryMeta,
    l2_norm,
)
from .preprocess import RawRecording, butterworth_lowpass, resample
from .registration import (
    RegistrationResult,
    align_to_reference,
    cosine_distance,
    group_action,
    phase_amplitude_separation,
    phase_distance,
    to_srvf,
)

__all__ = [
    "COHORTS",
    "ManifestError",
    "ManifestEntry",
    "PipelineConfig",
    "load_manifest",
    "ingest",
    "IngestResult",
    "IngestedTrial",
    "CohortReport",
    "run_pipeline",
]

COHORTS = ("healthy", "DMD", "SMA")


class ManifestError(ValueError):
    """Manifest or trial file problem, with file/row context in the message."""


@dataclass(frozen=True)
class ManifestEntry:
    participant_id: str
    cohort: str
    trial_path: Path
    brooke_score: int | None = None
    dynamometry: float | None = None


_CONFIG_RANGES = {
    "grid_n": "integer >= 3",
    "filter_order": "integer >= 1",
    "cutoff_ratio": "real in (0, 1)",
    "channel": "non-empty column name",
    "dp_max_slope": "integer >= 1",
    "mean_max_iter": "integer >= 1",
    "mean_tol": "real > 0",
    "rolling_window_frac": "real in (0, 1]",
}


@dataclass(frozen=True)
class PipelineConfig:
    grid_n: int = 101
    filter_order: int = 3
    cutoff_ratio: float = 0.1
    channel: str = "gyro"
    dp_max_slope: int = 7
    mean_max_iter: int = 20
    mean_tol: float = 1e-4
    rolling_window_frac: float = 0.1

    def __post_init__(self):
        checks = {
            "grid_n": self.grid_n >= 3,
            "filter_order": self.filter_order >= 1,
            "cutoff_ratio": 0.0 < self.cutoff_ratio < 1.0,
            "channel": bool(self.channel),
            "dp_max_slope": self.dp_max_slope >= 1,
            "mean_max_iter": self.mean_max_iter >= 1,
            "mean_tol": self.mean_tol > 0.0,
            "rolling_window_frac": 0.0 < self.rolling_window_frac <= 1.0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ManifestError(
                    f"config field {name}={getattr(self, name)!r} "
                    f"out of range (expected {_CONFIG_RANGES[name]})"
                )

    @classmethod
    def from_file(cls, path: Path | str,
                  overrides: dict | None = None) -> "PipelineConfig":
        """Read `key = value` lines; '#' starts a comment; unknown keys error."""
        path = Path(path)
        known = {f.name for f in fields(cls)}
        raw: dict = {}
        line_of: dict = {}
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ManifestError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}"
                )
            key, _, value = stripped.partition("=")
            key, value = key.strip(), value.strip()
            if key not in known:
                raise ManifestError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                if key in ("grid_n", "filter_order", "dp_max_slope",
                           "mean_max_iter"):
                    raw[key] = int(value)
                elif key in ("cutoff_ratio", "mean_tol", "rolling_window_frac"):
                    raw[key] = float(value)
                else:
                    raw[key] = value
            except ValueError as exc:
                raise ManifestError(f"{path}:{lineno}: field {key}: {exc}") from exc
            line_of[key] = lineno
        if overrides:
            raw.update(overrides)
        try:
            return cls(**raw)
        except ManifestError as exc:
            # point at the offending line when the bad value came from the file
            for name, lineno in line_of.items():
                if f"field {name}=" in str(exc) and name not in (overrides or {}):
                    raise ManifestError(f"{path}:{lineno}: {exc}") from exc
            raise ManifestError(f"{path}: {exc}") from exc


def load_manifest(path: Path | str) -> list[ManifestEntry]:
    """Parse the cohort manifest CSV; paths resolve relative to it."""
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    entries = []
    seen = set()
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"participant_id", "cohort", "trial_path"}
        have = set(reader.fieldnames or [])
        if not required <= have:
            raise ManifestError(
                f"{path}: manifest missing columns {sorted(required - have)}"
            )
        for rowno, row in enumerate(reader, start=2):
            pid = (row.get("participant_id") or "").strip()
            cohort = (row.get("cohort") or "").strip()
            trial = (row.get("trial_path") or "").strip()
            if not pid or not trial:
                raise ManifestError(
                    f"{path}:{rowno}: participant_id and trial_path are required"
                )
            if cohort not in COHORTS:
                raise ManifestError(
                    f"{path}:{rowno}: cohort {cohort!r} not one of {COHORTS}"
                )
            key = (pid, trial)
            if key in seen:
                raise ManifestError(
                    f"{path}:{rowno}: duplicate participant/trial pair {key}"
                )
            seen.add(key)
            brooke_raw = (row.get("brooke_score") or "").strip()
            dyn_raw = (row.get("dynamometry") or "").strip()
            try:
                brooke = int(brooke_raw) if brooke_raw else None
                dyn = float(dyn_raw) if dyn_raw else None
            except ValueError as exc:
                raise ManifestError(f"{path}:{rowno}: {exc}") from exc
            if brooke is not None and not (1 <= brooke <= 6):
                raise ManifestError(
                    f"{path}:{rowno}: brooke_score {brooke} outside 1..6"
                )
            if dyn is not None and (not math.isfinite(dyn) or dyn < 0):
                raise ManifestError(
                    f"{path}:{rowno}: dynamometry must be a nonnegative real"
                )
            entries.append(ManifestEntry(pid, cohort,
                                         (path.parent / trial).resolve(),
                                         brooke, dyn))
    entries.sort(key=lambda e: (e.participant_id, e.trial_path.name))
    return entries


def _read_trial(path: Path, channel: str) -> RawRecording:
    if not path.is_file():
        raise ManifestError(f"trial file not found: {path}")
    times, values = [], []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        have = set(reader.fieldnames or [])
        if "time_s" not in have:
            raise ManifestError(f"{path}: missing required column 'time_s'")
        if channel not in have:
            raise ManifestError(f"{path}: missing channel column {channel!r}")
        for rowno, row in enumerate(reader, start=2):
            try:
                t = float(row["time_s"])
                v = float(row[channel])
            except (TypeError, ValueError) as exc:
                raise ManifestError(f"{path}:{rowno}: {exc}") from exc
            if times and t <= times[-1]:
                raise ManifestError(
                    f"{path}:{rowno}: timestamps not strictly increasing"
                )
            times.append(t)
            values.append(v)
    if len(times) < 8:
        raise ManifestError(f"{path}: fewer than 8 samples ({len(times)})")
    return RawRecording(np.array(times), np.array(values))


@dataclass(frozen=True)
class IngestedTrial:
    entry: ManifestEntry
    label: str
    trajectory: Trajectory


@dataclass(frozen=True)
class IngestResult:
    items: list[IngestedTrial]
    skipped: list[tuple[str, str]]  # (label, reason)

    @property
    def trajectories(self) -> list[Trajectory]:
        return [it.trajectory for it in self.items]


def ingest(manifest_path: Path | str, config: PipelineConfig,
           skip_bad: bool = False) -> IngestResult:
    """Load, resample, and smooth every trial named by the manifest.

    A bad trial aborts the run with file/row context unless `skip_bad`,
    in which case it is recorded in `skipped` instead.
    """
    entries = load_manifest(manifest_path)
    if not entries:
        raise InsufficientDataError(f"{manifest_path}: manifest lists no trials")
    per_pid: dict[str, int] = {}
    for e in entries:
        per_pid[e.participant_id] = per_pid.get(e.participant_id, 0) + 1

    items, skipped = [], []
    for e in entries:
        trial = e.trial_path.stem
        label = (e.participant_id if per_pid[e.participant_id] == 1
                 else f"{e.participant_id}#{trial}")
        try:
            rec = _read_trial(e.trial_path, config.channel)
            traj = resample(rec, config.grid_n)
            traj = butterworth_lowpass(traj, config.filter_order,
                                       config.cutoff_ratio)
        except (ManifestError, ValueError) as exc:
            if not skip_bad:
                raise
            skipped.append((label, str(exc)))
            continue
        meta = TrajectoryMeta(participant=e.participant_id, cohort=e.cohort,
                              trial=trial)
        items.append(IngestedTrial(e, label, traj.with_meta(meta)))
    return IngestResult(items, skipped)


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParticipantScore:
    label: str
    cohort: str
    brooke_score: int | None
    dynamometry: float | None
    triple: DistanceTriple


@dataclass(frozen=True)
class CohortReport:
    scores: list[ParticipantScore]
    t_tests: dict
    regressions: dict
    matrix_pre: DistanceMatrix | None
    matrix_post: DistanceMatrix | None
    matrix_summary: dict
    mean: Trajectory
    separation: RegistrationResult
    rolling: dict[str, np.ndarray]
    rolling_window: int
    skipped: list[tuple[str, str]]

    def summary_dict(self) -> dict:
        return {
            "cohort_sizes": {
                "healthy": sum(1 for s in self.scores if s.cohort == "healthy"),
                "patient": sum(1 for s in self.scores if s.cohort != "healthy"),
            },
            "skipped_trials": len(self.skipped),
            "skipped": [{"label": l, "reason": r} for l, r in self.skipped],
            "separation": {
                "iterations": self.separation.iterations,
                "converged": self.separation.converged,
            },
            "distances": {
                s.label: {
                    "cohort": s.cohort,
                    "amplitude": s.triple.amplitude,
                    "phase": s.triple.phase,
                    "cosine": s.triple.cosine,
                }
                for s in self.scores
            },
            "t_tests": self.t_tests,
            "regressions": self.regressions,
            "matrix_summary": self.matrix_summary,
            "rolling_window": self.rolling_window,
        }


def split_by_cohort(items: list[IngestedTrial]):
    healthy = [it for it in items if it.entry.cohort == "healthy"]
    patients = [it for it in items if it.entry.cohort != "healthy"]
    return healthy, patients


def build_healthy_mean(items: list[IngestedTrial],
                       config: PipelineConfig) -> RegistrationResult:
    healthy, _ = split_by_cohort(items)
    if len(healthy) < 2:
        raise DegenerateInputError(
            f"cannot build reference mean: need >= 2 healthy trials, "
            f"have {len(healthy)}"
        )
    return phase_amplitude_separation(
        [it.trajectory for it in healthy],
        max_iter=config.mean_max_iter,
        tol=config.mean_tol,
        max_slope=config.dp_max_slope,
    )


def score_against_mean(items: list[IngestedTrial], mean: Trajectory,
                       config: PipelineConfig):
    """Align every trial to the mean; return (scores, alignment)."""
    alignment = align_to_reference([it.trajectory for it in items], mean,
                                   max_slope=config.dp_max_slope)
    q_mean = to_srvf(mean)
    scores = []
    for it, warp, aligned in zip(items, alignment.warps, alignment.aligned):
        q_i = to_srvf(it.trajectory)
        amp = l2_norm(q_mean.q - group_action(q_i, warp).q, mean.grid)
        triple = DistanceTriple(
            amplitude=amp,
            phase=phase_distance(warp),
            cosine=cosine_distance(mean, aligned),
        )
        scores.append(ParticipantScore(it.label, it.entry.cohort,
                                       it.entry.brooke_score,
                                       it.entry.dynamometry, triple))
    return scores, alignment


def cohort_t_tests(scores: list[ParticipantScore]) -> dict:
    healthy = [s for s in scores if s.cohort == "healthy"]
    patients = [s for s in scores if s.cohort != "healthy"]
    out = {}
    for metric in ("amplitude", "phase", "cosine"):
        if len(healthy) < 2 or len(patients) < 2:
            out[metric] = {"skipped": "need >= 2 trials per group"}
            continue
        res = welch_t_test([getattr(s.triple, metric) for s in healthy],
                           [getattr(s.triple, metric) for s in patients])
        out[metric] = {"t": res.t_statistic, "p": res.p_value, "dof": res.dof}
    return out


def cohort_regressions(scores: list[ParticipantScore]) -> dict:
    out = {}
    covariates = {
        "brooke": lambda s: s.brooke_score,
        "dynamometry": lambda s: s.dynamometry,
    }
    for metric in ("amplitude", "phase"):
        for cov_name, get in covariates.items():
            key = f"{metric}_vs_{cov_name}"
            subset = [(float(get(s)), getattr(s.triple, metric))
                      for s in scores if get(s) is not None]
            if len(subset) < 3:
                out[key] = {"n": len(subset), "skipped": "fewer than 3 points"}
                continue
            x = [p[0] for p in subset]
            y = [p[1] for p in subset]
            try:
                res = linear_regression(x, y)
            except DegenerateInputError as exc:
                out[key] = {"n": len(subset), "skipped": str(exc)}
                continue
            out[key] = {"n": len(subset), "slope": res.slope,
                        "intercept": res.intercept, "r": res.r,
                        "p": res.p_value}
    return out


def block_summary(matrix: DistanceMatrix, cohorts: list[str]) -> dict | None:
    """Mean within-healthy and healthy-to-patient distances, plus their ratio."""
    is_h = np.array([c == "healthy" for c in cohorts])
    if is_h.sum() < 2 or (~is_h).sum() < 1:
        return None
    v = matrix.values
    hh = v[np.ix_(is_h, is_h)]
    within = float(hh[np.triu_indices_from(hh, k=1)].mean())
    between = float(v[np.ix_(is_h, ~is_h)].mean())
    return {
        "within_healthy": within,
        "between": between,
        "ratio": between / within if within > 0 else None,
    }


# ---------------------------------------------------------------------------
# Writers (9 significant digits everywhere, NaN spelled "nan")
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_distances_csv(path: Path, scores: list[ParticipantScore]) -> None:
    write_csv(path, ["participant", "cohort", "amplitude", "phase", "cosine"],
              [[s.label, s.cohort, _fmt(s.triple.amplitude),
                _fmt(s.triple.phase), _fmt(s.triple.cosine)] for s in scores])


def write_matrix_csv(path: Path, matrix: DistanceMatrix) -> None:
    rows = [[lbl] + [_fmt(v) for v in row]
            for lbl, row in zip(matrix.labels, matrix.values)]
    write_csv(path, ["label"] + list(matrix.labels), rows)


def write_mean_csv(path: Path, mean: Trajectory) -> None:
    write_csv(path, ["t", "value"],
              [[_fmt(t), _fmt(v)] for t, v in zip(mean.grid.points, mean.values)])


def write_rolling_csv(path: Path, grid_points: np.ndarray, window: int,
                      values: np.ndarray) -> None:
    h = grid_points[1] - grid_points[0]
    centers = grid_points[: values.size] + 0.5 * (window - 1) * h
    write_csv(path, ["t_center", "correlation"],
              [[_fmt(t), _fmt(v)] for t, v in zip(centers, values)])


def run_pipeline(manifest_path: Path | str, config: PipelineConfig,
                 out_dir: Path | str, skip_bad: bool = False) -> CohortReport:
    """Execute the full analysis and write every report artifact.

    Outputs in `out_dir`: distances.csv, matrix_pre.csv, matrix_post.csv,
    stats.json, mean_healthy.csv, and rolling/<label>.csv per trial.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ingested = ingest(manifest_path, config, skip_bad=skip_bad)
    items = ingested.items
    if not items:
        raise InsufficientDataError("every trial was skipped; nothing to analyze")

    separation = build_healthy_mean(items, config)
    mean = separation.mean
    scores, alignment = score_against_mean(items, mean, config)

    curves = [it.trajectory for it in items]
    labels = [it.label for it in items]
    cohorts = [it.entry.cohort for it in items]
    matrix_pre = pairwise_matrix(curves, "cosine", registered=False,
                                 labels=labels)
    matrix_post = pairwise_matrix(curves, "cosine", registered=True,
                                  max_slope=config.dp_max_slope, labels=labels)
    matrix_summary = {
        "pre": block_summary(matrix_pre, cohorts),
        "post": block_summary(matrix_post, cohorts),
    }

    window = max(3, int(round(config.rolling_window_frac * config.grid_n)))
    rolling = {
        it.label: rolling_correlation(aligned, mean, window)
        for it, aligned in zip(items, alignment.aligned)
    }

    report = CohortReport(
        scores=scores,
        t_tests=cohort_t_tests(scores),
        regressions=cohort_regressions(scores),
        matrix_pre=matrix_pre,
        matrix_post=matrix_post,
        matrix_summary=matrix_summary,
        mean=mean,
        separation=separation,
        rolling=rolling,
        rolling_window=window,
        skipped=ingested.skipped,
    )

    write_distances_csv(out / "distances.csv", scores)
    write_matrix_csv(out / "matrix_pre.csv", matrix_pre)
    write_matrix_csv(out / "matrix_post.csv", matrix_post)
    write_mean_csv(out / "mean_healthy.csv", mean)
    rolling_dir = out / "rolling"
    rolling_dir.mkdir(exist_ok=True)
    for label, values in report.rolling.items():
        write_rolling_csv(rolling_dir / f"{label}.csv", mean.grid.points,
                          window, values)
    with (out / "stats.json").open("w") as fh:
        json.dump(report.summary_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
