"""Command-line entry point: CSV ingestion, measure dispatch, JSON risk reports.

Commands
--------
``risk scalar|vector|mixture|mtce|mtdrm|signed2d|axioms|copula-fit|copula-distance``

Input is a CSV of loss scenarios (header row of asset names, optional final
``weight`` column).  Output is a versioned JSON report on stdout or ``--out``.
Exit codes: 0 success, 2 validation error, 3 match-assertion failure,
4 degenerate tail.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .copula import (
    CopulaLike,
    clayton,
    comonotone,
    countermonotone_2d,
    empirical_copula,
    fit_archimedean,
    frank,
    frechet_distances,
    gof_distance,
    gumbel,
    independence,
    survival_copula,
)
from .distortion import (
    ConfidenceBand,
    Distortion,
    blend_diagnostics,
    cvar_ramp,
    identity,
    power,
    var_step,
)
from .errors import (
    DataError,
    DegenerateTailError,
    JointRiskError,
    MatchError,
    ParameterError,
)
from .portfolio import ScenarioSet, cvar, scenario_set, var
from .scalar_risk import (
    JointRiskSpec,
    axiom_suite,
    gamma_ls_form,
    gamma_survival_form,
    varcvar_spec_factory,
)
from .signed import gamma_signed_2d
from .vector_risk import TailRegionSpec, h_vector, mixture_var_cvar, mtce, mtdrm

SCHEMA_VERSION = 1
DEFAULT_MATCH_THRESHOLD = 0.05

MEASURES = (
    "scalar",
    "vector",
    "mixture",
    "mtce",
    "mtdrm",
    "signed2d",
    "axioms",
    "copula-fit",
    "copula-distance",
)


@dataclass
class RunConfig:
    measure: str
    input_path: str
    copula_choice: str = "empirical"
    band: ConfidenceBand | None = None
    q: float | None = None
    distortion_kinds: tuple[str, ...] = ()
    grid_n: int | None = None
    seed: int = 0
    match_policy: str = "warn"
    match_threshold: float = DEFAULT_MATCH_THRESHOLD
    out_path: str | None = None
    trials: int = 100

    def echo(self) -> dict:
        d = asdict(self)
        d["band"] = None if self.band is None else [self.band.alpha1, self.band.alpha2]
        d["distortion_kinds"] = list(self.distortion_kinds)
        return d


def _read_rows(path: str) -> tuple[list[str], np.ndarray, np.ndarray | None]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"--input: cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"--input: {path} is empty")
    header = [h.strip() for h in rows[0]]
    has_weights = bool(header) and header[-1].lower() == "weight"
    names = header[:-1] if has_weights else header
    if not names:
        raise DataError(f"--input: {path} has no asset columns")
    if len(rows) < 2:
        raise DataError(f"--input: {path} has a header but no data rows")

    data, weights = [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(
                f"--input: {path}: row {r} has {len(row)} cells, expected {len(header)}"
            )
        parsed = []
        for c, cell in enumerate(row, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise DataError(
                    f"--input: {path}: row {r}, column {c}: cannot parse {cell.strip()!r} as a number"
                ) from None
        if has_weights:
            if parsed[-1] <= 0.0:
                raise DataError(f"--input: {path}: row {r}: weight must be positive")
            weights.append(parsed[-1])
            parsed = parsed[:-1]
        data.append(parsed)
    return names, np.array(data), np.array(weights) if has_weights else None


def ingest_csv(path: str) -> ScenarioSet:
    """Read a scenario CSV: header of asset names, optional final weight column."""
    names, data, weights = _read_rows(path)
    return scenario_set(data, weights, names)


def _parse_band(raw: str | None) -> ConfidenceBand | None:
    if raw is None:
        return None
    parts = raw.split(",")
    try:
        a1, a2 = (float(p) for p in parts)
        return ConfidenceBand(a1, a2)
    except (ValueError, ParameterError) as exc:
        raise ParameterError(f"--band: expected 'a1,a2' with 0 < a1 <= a2 < 1, got {raw!r}") from exc


def _parse_match(raw: str) -> tuple[str, float]:
    if raw == "warn":
        return "warn", DEFAULT_MATCH_THRESHOLD
    if raw == "assert":
        return "assert", DEFAULT_MATCH_THRESHOLD
    if raw.startswith("assert:"):
        try:
            thr = float(raw.split(":", 1)[1])
        except ValueError:
            thr = -1.0
        if thr <= 0.0:
            raise ParameterError(f"--match: threshold must be a positive number, got {raw!r}")
        return "assert", thr
    raise ParameterError(f"--match: expected 'warn' or 'assert:<threshold>', got {raw!r}")


def _resolve_copula(config: RunConfig, s: ScenarioSet) -> tuple[CopulaLike, dict]:
    """Build the declared copula and its descriptive info from the config string."""
    choice = config.copula_choice.strip().lower()
    info: dict = {"choice": config.copula_choice}
    if choice == "empirical":
        cop = empirical_copula(s)
        info.update(family="empirical", params={})
        return cop, info
    if choice.startswith("fit:"):
        family = choice.split(":", 1)[1]
        cop = fit_archimedean(s, family)
        info.update(family=cop.family, params={"theta": cop.theta}, fitted=True)
        return cop, info
    name, _, param = choice.partition(":")
    if name == "independence":
        cop = independence(s.dim)
    elif name == "comonotone":
        cop = comonotone(s.dim)
    elif name == "countermonotone":
        cop = countermonotone_2d()
        if s.dim != 2:
            raise ParameterError("--copula: countermonotone requires two-column data")
    elif name in ("clayton", "gumbel", "frank"):
        try:
            theta = float(param)
        except ValueError:
            raise ParameterError(
                f"--copula: {name} needs a parameter, e.g. '{name}:2.0'"
            ) from None
        cop = {"clayton": clayton, "gumbel": gumbel, "frank": frank}[name](theta, s.dim)
    else:
        raise ParameterError(f"--copula: unknown choice {config.copula_choice!r}")
    info.update(family=cop.family, params={} if cop.theta is None else {"theta": cop.theta})
    return cop, info


def _parse_distortion_kind(raw: str) -> str:
    kind = raw.strip().lower()
    if kind in ("var", "cvar", "identity") or (
        kind.startswith("power:") and len(kind.split(":")) == 2
    ):
        return kind
    raise ParameterError(
        f"--distortion: expected var|cvar|identity|power:<k>, got {raw!r}"
    )


def _build_distortions(config: RunConfig, dim: int, level: float | None) -> tuple[Distortion, ...]:
    kinds = list(config.distortion_kinds) or ["identity"]
    if len(kinds) == 1:
        kinds = kinds * dim
    if len(kinds) != dim:
        raise ParameterError(
            f"--distortion: got {len(kinds)} kinds for {dim} components (give 1 or {dim})"
        )
    out = []
    for kind in kinds:
        if kind in ("var", "cvar"):
            if level is None:
                raise ParameterError(f"--distortion: {kind} requires --band to set the level")
            out.append(var_step(level) if kind == "var" else cvar_ramp(level))
        elif kind == "identity":
            out.append(identity())
        else:
            try:
                k = float(kind.split(":", 1)[1])
            except ValueError:
                raise ParameterError(f"--distortion: bad power exponent in {kind!r}") from None
            out.append(power(k))
    return tuple(out)


def _scenario_summary(s: ScenarioSet, band: ConfidenceBand | None) -> dict:
    means = (s.weights @ s.losses).tolist()
    summary = {
        "d": s.dim,
        "m": s.m,
        "names": list(s.names),
        "nonnegative": s.nonnegative,
        "means": means,
    }
    if band is not None:
        for label, lvl in (("alpha1", band.alpha1), ("alpha2", band.alpha2)):
            summary[f"var_{label}"] = [var(s, i, lvl) for i in range(s.dim)]
            summary[f"cvar_{label}"] = [cvar(s, i, lvl) for i in range(s.dim)]
    return summary


def _copula_diagnostics(
    config: RunConfig, s: ScenarioSet, cop: CopulaLike, info: dict
) -> dict:
    diag = dict(info)
    if s.m >= 2:
        emp = empirical_copula(s)
        diag["gof_distance"] = gof_distance(emp, cop, config.grid_n)
    else:
        diag["gof_distance"] = None
    if s.dim >= 2:
        d_ul, d_uc = frechet_distances(cop, config.grid_n)
        diag.update(d_ul=d_ul, d_uc=d_uc)
    if config.band is not None:
        # one-column data carries no dependence spread; the blend then sits
        # at the high endpoint
        diag.update(blend_diagnostics(cop, config.band, config.grid_n))
    return diag


def _check_match(config: RunConfig, diag: dict) -> None:
    dist = diag.get("gof_distance")
    if dist is None:
        return
    if config.match_policy == "assert" and dist > config.match_threshold:
        raise MatchError(
            f"declared copula rejected: gof distance {dist:.6g} exceeds "
            f"threshold {config.match_threshold:.6g}"
        )


def run(config: RunConfig) -> dict:
    """Execute one configured computation and assemble the JSON-ready report."""
    names, data, raw_weights = _read_rows(config.input_path)
    s = scenario_set(data, raw_weights, names)
    notes = []
    if raw_weights is not None and abs(float(raw_weights.sum()) - 1.0) > 1e-12:
        notes.append(f"weights renormalized from sum {float(raw_weights.sum()):g}")
    cop, info = _resolve_copula(config, s)
    diag = _copula_diagnostics(config, s, cop, info)
    _check_match(config, diag)

    level = diag.get("alpha_c")
    measure = config.measure
    results: dict

    if measure == "scalar":
        gs = _build_distortions(config, s.dim, level)
        spec = JointRiskSpec(_coupling(cop), gs)
        if not s.nonnegative:
            raise DataError(
                "scalar: data has negative losses; use the signed2d command (d = 2 only)"
            )
        value = gamma_survival_form(s, spec)
        value_ls = gamma_ls_form(s, spec)
        gap = abs(value - value_ls) / max(abs(value), abs(value_ls), 1e-12)
        results = {"gamma": value, "gamma_ls": value_ls, "formulation_gap": gap,
                   "distortions": [g.label() for g in gs]}
    elif measure == "vector":
        gs = _build_distortions(config, s.dim, level)
        res = h_vector(s, JointRiskSpec(_coupling(cop), gs))
        results = res.as_dict()
        results["distortions"] = [g.label() for g in gs]
    elif measure == "mixture":
        if config.band is None:
            raise ParameterError("mixture: --band is required")
        kinds = list(config.distortion_kinds) or ["var"]
        if len(kinds) == 1:
            kinds = kinds * s.dim
        for k in kinds:
            if k not in ("var", "cvar"):
                raise ParameterError(f"mixture: --distortion must be var or cvar, got {k!r}")
        res = mixture_var_cvar(s, cop, config.band, kinds, config.grid_n)
        results = res.as_dict()
    elif measure == "mtce":
        if config.q is None:
            raise ParameterError("mtce: --q is required")
        results = mtce(s, cop, config.q).as_dict()
    elif measure == "mtdrm":
        gs = _build_distortions(config, s.dim, level)
        region = (
            TailRegionSpec("joint_exceedance", config.q)
            if config.q is not None
            else TailRegionSpec()
        )
        res = mtdrm(s, cop, gs, region)
        results = res.as_dict()
        results["distortions"] = [g.label() for g in gs]
    elif measure == "signed2d":
        gs = _build_distortions(config, s.dim, level)
        results = {"gamma_signed": gamma_signed_2d(s, JointRiskSpec(_coupling(cop), gs)),
                   "distortions": [g.label() for g in gs]}
    elif measure == "axioms":
        if config.band is None:
            raise ParameterError("axioms: --band is required")
        kinds = list(config.distortion_kinds) or ["var"]
        for k in kinds:
            if k not in ("var", "cvar"):
                raise ParameterError(f"axioms: --distortion must be var or cvar, got {k!r}")
        factory = varcvar_spec_factory(
            config.band, kinds[0] if len(kinds) == 1 else kinds, config.grid_n
        )
        report = axiom_suite(factory, [cop], trials=config.trials, seed=config.seed)
        results = report.as_dict()
    elif measure == "copula-fit":
        results = {"family": info.get("family"), "params": info.get("params"),
                   "gof_distance": diag.get("gof_distance")}
    elif measure == "copula-distance":
        results = {
            "gof_distance": diag.get("gof_distance"),
            "d_ul": diag.get("d_ul"),
            "d_uc": diag.get("d_uc"),
        }
    else:
        raise ParameterError(f"unknown measure {measure!r}")

    summary = _scenario_summary(s, config.band)
    summary["notes"] = notes
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config.echo(),
        "scenarios": summary,
        "copula": diag,
        "results": {measure: results},
        "provenance": {
            "package": "jointrisk",
            "version": __version__,
            "seed": config.seed,
            "generated_at": datetime.now(timezone.utc).isoformat(),
        },
    }


def _coupling(cop: CopulaLike) -> CopulaLike:
    """The coupling copula of the scalar measure: the survival copula of the dependence."""
    return survival_copula(cop)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return f if np.isfinite(f) else None
    return value


def render_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risk",
        description="Copula-based joint risk measures of scenario loss portfolios",
    )
    sub = parser.add_subparsers(dest="measure", required=True)
    for name in MEASURES:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="scenario CSV (header row, optional weight column)")
        p.add_argument("--copula", default="empirical",
                       help="independence|comonotone|countermonotone|clayton:t|gumbel:t|frank:t|fit:<family>|empirical")
        p.add_argument("--band", default=None, help="confidence band 'a1,a2'")
        p.add_argument("--q", type=float, default=None, help="tail level in (0,1)")
        p.add_argument("--distortion", action="append", default=None,
                       help="var|cvar|identity|power:<k>; repeat per component")
        p.add_argument("--grid-n", type=int, default=None, help="unit-grid resolution for copula maxima")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--match", default="warn", help="warn (default) or assert:<threshold>")
        p.add_argument("--out", default=None, help="report path (default: stdout)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    policy, threshold = _parse_match(args.match)
    kinds = tuple(_parse_distortion_kind(k) for k in (args.distortion or []))
    if args.q is not None and not 0.0 < args.q < 1.0:
        raise ParameterError(f"--q: must lie in (0, 1), got {args.q}")
    if args.grid_n is not None and args.grid_n < 2:
        raise ParameterError(f"--grid-n: must be >= 2, got {args.grid_n}")
    return RunConfig(
        measure=args.measure,
        input_path=args.input,
        copula_choice=args.copula,
        band=_parse_band(args.band),
        q=args.q,
        distortion_kinds=kinds,
        grid_n=args.grid_n,
        seed=args.seed,
        match_policy=policy,
        match_threshold=threshold,
        out_path=args.out,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        report = run(config)
    except MatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DegenerateTailError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except JointRiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render_report(report)
    if config.out_path:
        with open(config.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
