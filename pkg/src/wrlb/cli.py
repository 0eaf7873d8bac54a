"""Experiment runner: flat configs, deterministic seeding, CSV/JSON artifacts.

Every subcommand resolves its configuration from defaults, an optional
flat ``key = value`` file, and command-line flags (flags win), validates
it against the library preconditions, and writes one machine-readable
output whose header block records the fully resolved configuration plus
a build identifier and timestamp.  Reruns with an identical
configuration produce byte-identical files apart from the timestamp.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import subprocess
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .besov import ratio_survey, sobolev_norm, sobolev_pair_norm
from .dynamics import FlowParams, PhasePoint, energy as flow_energy, evolve
from .energy import energy_derivative, estimate_functional, full_energy
from .errors import WrlbError
from .gaussian import (
    MeasureSpec,
    RenormContext,
    sample,
    sample_batch,
    sample_u_batch,
    sigma_n,
    spectral_decay_fit,
    wick_square,
)
from .measure import BallSet, density_moments, partition_function, pushforward_mass
from .spectral import l2_norm_sq, zeros
from .variational import minimize_shift, shift_gradient

EXPERIMENTS = (
    "sample",
    "evolve",
    "energy-audit",
    "sigma-scan",
    "density",
    "transport",
    "variational",
    "besov-audit",
    "decay-fit",
)

# config-file / flag spelling -> attribute, parser
_KEYS = {
    "experiment": ("experiment", str),
    "s": ("s", float),
    "N": ("n", int),
    "M": ("m", int),
    "G": ("grid", int),
    "dt": ("dt", float),
    "t": ("t", float),
    "p": ("p", int),
    "R": ("radius", float),
    "sigma": ("sigma", float),
    "epsilon": ("epsilon", float),
    "samples": ("samples", int),
    "iters": ("iters", int),
    "seed": ("seed", int),
    "out-path": ("out_path", str),
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    s: float = 4.0
    n: int = 8
    m: int = 8
    grid: int = 33
    dt: float = 1e-3
    t: float = 1.0
    p: int = 1
    radius: float = 10.0
    sigma: float = 3.4
    epsilon: float = 0.1
    samples: int = 10_000
    iters: int = 100
    seed: int = 0
    out_path: str = ""

    @classmethod
    def from_sources(cls, experiment: str, file_values: dict, overrides: dict) -> "ExperimentConfig":
        """Defaults, then config-file values, then flags; derived fields last."""
        merged = dict(file_values)
        merged.update(overrides)
        merged.pop("experiment", None)
        fields = {attr for attr, _ in _KEYS.values()}
        unknown = set(merged) - fields
        if unknown:
            raise ValueError(f"unknown key {sorted(unknown)[0]!r}")
        out = dict(merged)
        out.setdefault("s", cls.s)
        out.setdefault("n", cls.n)
        out.setdefault("grid", 4 * out["n"] + 1)
        out.setdefault("sigma", out["s"] - 0.6)
        suffix = "json" if experiment in ("sample", "variational") else "csv"
        out.setdefault("out_path", f"{experiment}.{suffix}")
        return cls(experiment=experiment, **out)


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; '#' comments; unknown keys rejected."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in _KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        attr, cast = _KEYS[key]
        try:
            values[attr] = cast(val)
        except ValueError:
            raise ValueError(f"line {lineno}: field {key!r} expects {cast.__name__}, got {val!r}")
    return values


def validate(config: ExperimentConfig) -> list[str]:
    """Empty list iff a run of this configuration would start."""
    out = []
    if config.experiment not in EXPERIMENTS:
        out.append(f"unknown experiment {config.experiment!r}")
        return out
    if config.s <= 1.5:
        out.append("s must exceed 3/2")
    if config.n < 1:
        out.append("N must be >= 1")
    if config.m < 1:
        out.append("M must be >= 1")
    if config.grid < 4 * config.n + 1:
        out.append("dealiasing requires G >= 4N+1")
    elif config.grid % 2 == 0:
        out.append("G must be odd")
    if config.dt <= 0.0 or config.dt > 0.1:
        out.append("dt must lie in (0, 0.1]")
    if config.experiment == "energy-audit" and (
        config.s < 4.0 or config.s != int(config.s) or int(config.s) % 2
    ):
        out.append("s must be even >= 4 for energy experiments")
    if not 0.0 < config.epsilon < 0.5:
        out.append("epsilon must lie in (0, 1/2)")
    if config.p not in (1, 2, 4):
        out.append("p must be one of 1, 2, 4")
    if config.radius <= 0.0:
        out.append("R must be positive")
    if config.samples < 1:
        out.append("samples must be >= 1")
    if config.experiment in ("density", "transport", "variational") and config.samples < 1000:
        out.append(f"{config.experiment} needs samples >= 1000")
    if config.iters < 1:
        out.append("iters must be >= 1")
    if config.seed == -1 and config.experiment != "evolve":
        out.append("seed -1 (zero data) only applies to evolve")
    return out


# ----------------------------------------------------------------------
# output plumbing


def _build_id() -> str:
    try:
        head = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if head.returncode == 0:
            return head.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # shortest digits that still round-trip
    return str(value)


def _config_items(config: ExperimentConfig):
    for key, (attr, _) in _KEYS.items():
        yield key, getattr(config, attr)


def _header_lines(config: ExperimentConfig, meta: dict) -> list[str]:
    lines = [f"# {key} = {_fmt(value)}" for key, value in _config_items(config)]
    lines.append(f"# build = {_build_id()}")
    lines.append(f"# timestamp = {datetime.now(timezone.utc).isoformat()}")
    lines.extend(f"# result.{key} = {_fmt(value)}" for key, value in meta.items())
    return lines


def write_csv(config: ExperimentConfig, columns, rows, meta: dict | None = None) -> None:
    lines = _header_lines(config, meta or {})
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    Path(config.out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(config: ExperimentConfig, payload: dict) -> None:
    doc = {
        "config": {key: value for key, value in _config_items(config)},
        "build": _build_id(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    doc.update(payload)
    Path(config.out_path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_header(path) -> dict:
    """Parse the '# key = value' block of an emitted CSV back into a dict."""
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.startswith("# "):
            break
        key, _, val = (part.strip() for part in line[2:].partition("="))
        if key in _KEYS:
            attr, cast = _KEYS[key]
            values[attr] = cast(val)
    return values


# ----------------------------------------------------------------------
# experiment bodies


def _run_sample(cfg: ExperimentConfig) -> None:
    spec = MeasureSpec(s=cfg.s, kind="nu", m=cfg.m)
    u_norms, v_norms = [], []
    for lo in range(0, cfg.samples, 512):
        idx = np.arange(lo, min(cfg.samples, lo + 512))
        batch = sample_batch(spec, cfg.seed, idx)
        u_norms.append(np.sqrt(l2_norm_sq(batch.u)))
        v_norms.append(np.sqrt(l2_norm_sq(batch.v)))
    u_norms = np.concatenate(u_norms)
    v_norms = np.concatenate(v_norms)
    write_json(
        cfg,
        {
            "spec": {"s": cfg.s, "kind": "nu", "m": cfg.m},
            "seed": cfg.seed,
            "count": cfg.samples,
            "u_l2": {"mean": float(u_norms.mean()), "min": float(u_norms.min()), "max": float(u_norms.max())},
            "v_l2": {"mean": float(v_norms.mean()), "min": float(v_norms.min()), "max": float(v_norms.max())},
        },
    )


_run_sample.op = "sample_batch"


def _run_evolve(cfg: ExperimentConfig) -> None:
    ctx = RenormContext.create(cfg.n, cfg.s, grid=cfg.grid)
    if cfg.seed == -1:
        point = PhasePoint(zeros(cfg.n), zeros(cfg.n))
    else:
        point = sample(MeasureSpec(s=cfg.s, kind="nu", m=cfg.n), cfg.seed)

    def row(step):
        return (
            step * cfg.dt,
            float(flow_energy(point, cfg.n, ctx)),
            float(sobolev_norm(point.u, cfg.sigma)),
            float(sobolev_norm(point.v, cfg.sigma - 1.0)),
        )

    total = int(round(cfg.t / cfg.dt))
    stride = max(1, total // 200)
    rows = [row(0)]
    done = 0
    while done < total:
        k = min(stride, total - done)
        point = evolve(point, FlowParams(n=cfg.n, dt=cfg.dt, t=k * cfg.dt), ctx)
        done += k
        rows.append(row(done))
    write_csv(cfg, ("t", "E_N", "u_Hsigma", "v_Hsigma1"), rows)


_run_evolve.op = "evolve"


def _run_energy_audit(cfg: ExperimentConfig) -> None:
    ctx = RenormContext.create(cfg.n, cfg.s, grid=cfg.grid)
    spec = MeasureSpec(s=cfg.s, kind="nu", m=cfg.n)
    forward = FlowParams(n=cfg.n, dt=cfg.dt, t=cfg.dt)
    backward = FlowParams(n=cfg.n, dt=cfg.dt, t=-cfg.dt)
    rows = []
    for i in range(cfg.samples):
        p = sample(spec, cfg.seed, index=i)
        plus = full_energy(evolve(p, forward, ctx), ctx).total
        minus = full_energy(evolve(p, backward, ctx), ctx).total
        rows.append(
            (
                float(flow_energy(p, cfg.n, ctx)),
                full_energy(p, ctx).total,
                energy_derivative(p, ctx).total,
                (plus - minus) / (2.0 * cfg.dt),
                estimate_functional(p, ctx, eps=cfg.epsilon),
                float(sobolev_pair_norm(p, cfg.sigma)),
            )
        )
    write_csv(cfg, ("E_N", "E_sN_total", "dE_analytic", "dE_fd", "F_value", "Hsigma_norm"), rows)


_run_energy_audit.op = "energy_derivative"


def _run_sigma_scan(cfg: ExperimentConfig) -> None:
    rows = []
    for n in range(1, cfg.n + 1):
        value = sigma_n(cfg.s, n)
        rows.append((n, value, value / n))
    write_csv(cfg, ("N", "sigma_N", "sigma_N_over_N"), rows)


_run_sigma_scan.op = "sigma_n"


def _run_density(cfg: ExperimentConfig) -> None:
    stats = density_moments(cfg.s, cfg.n, cfg.p, cfg.samples, cfg.seed)
    row = (stats.mean, stats.ci95, stats.count, float(np.log(stats.max)))
    write_csv(cfg, ("estimate", "ci95", "count", "max_exponent"), [row])


_run_density.op = "density_moments"


def _run_transport(cfg: ExperimentConfig) -> None:
    ball = BallSet(R=cfg.radius, sigma=cfg.sigma)
    ctx = RenormContext.create(cfg.n, cfg.s, grid=cfg.grid)
    stats = pushforward_mass(ball, cfg.t, cfg.s, cfg.n, cfg.samples, cfg.seed, ctx)
    top = float(np.log(stats.max)) if stats.max > 0 else -np.inf
    row = (stats.mean, stats.ci95, stats.count, top)
    write_csv(cfg, ("estimate", "ci95", "count", "max_exponent"), [row])


_run_transport.op = "pushforward_mass"


def _run_variational(cfg: ExperimentConfig) -> None:
    diag: dict = {}
    best, bound = minimize_shift(cfg.s, cfg.n, cfg.samples, cfg.seed, iters=cfg.iters, diagnostics=diag)
    z = partition_function(cfg.s, cfg.n, samples=cfg.samples, seed=cfg.seed)
    log_z = float(np.log(z.mean))
    grad = shift_gradient(best, cfg.s, cfg.n, cfg.samples, cfg.seed)
    write_json(
        cfg,
        {
            "bound": bound,
            "logZ_mc": log_z,
            "gap": bound + log_z,
            "iterations": diag["iterations"],
            "grad_norm": float(np.sqrt(np.sum(np.abs(grad.coeffs) ** 2))),
        },
    )


_run_variational.op = "minimize_shift"


def _run_besov_audit(cfg: ExperimentConfig) -> None:
    worst = ratio_survey(cfg.samples, cfg.seed)
    fixture = _calibration().get("besov_ratios", {})
    rows = [
        (name, ratio, float(fixture.get(name, np.nan)))
        for name, ratio in worst.items()
    ]
    write_csv(cfg, ("lemma", "max_ratio", "fixture_max"), rows)


_run_besov_audit.op = "ratio_survey"


def _run_decay_fit(cfg: ExperimentConfig) -> None:
    ctx = RenormContext.create(cfg.n, cfg.s, grid=cfg.grid)
    spec = MeasureSpec(s=cfg.s, kind="nu", m=cfg.n)
    chunk = max(8, 2_000_000 // ctx.grid**3)

    def squares():
        for lo in range(0, cfg.samples, chunk):
            idx = np.arange(lo, min(cfg.samples, lo + chunk))
            yield wick_square(sample_u_batch(spec, cfg.seed, idx), ctx)

    radii = range(2, min(16, 2 * cfg.n) + 1)
    fit = spectral_decay_fit(squares(), radii, min_samples=min(1000, cfg.samples))
    rows = list(zip(fit.radii, fit.mean_sq, fit.stderr))
    meta = {"slope": fit.slope, "slope_se": fit.slope_se, "intercept": fit.intercept}
    write_csv(cfg, ("abs_n", "mean_sq", "stderr"), rows, meta=meta)


_run_decay_fit.op = "spectral_decay_fit"


def _calibration() -> dict:
    path = Path(__file__).parent / "data" / "calibration.json"
    if path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    return {}


_RUNNERS = {
    "sample": _run_sample,
    "evolve": _run_evolve,
    "energy-audit": _run_energy_audit,
    "sigma-scan": _run_sigma_scan,
    "density": _run_density,
    "transport": _run_transport,
    "variational": _run_variational,
    "besov-audit": _run_besov_audit,
    "decay-fit": _run_decay_fit,
}


def run(config: ExperimentConfig) -> int:
    """Validate, dispatch, and write artifacts; exit-status semantics."""
    problems = validate(config)
    if problems:
        for msg in problems:
            print(f"config error: {msg}", file=sys.stderr)
        return 2
    runner = _RUNNERS[config.experiment]
    try:
        runner(config)
    except WrlbError as exc:
        print(f"error in {runner.op}: {exc}", file=sys.stderr)
        return 3
    return 0


# ----------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wrlb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--s", type=float, dest="s")
        p.add_argument("--N", type=int, dest="n")
        p.add_argument("--M", type=int, dest="m")
        p.add_argument("--G", type=int, dest="grid")
        p.add_argument("--dt", type=float, dest="dt")
        p.add_argument("--t", type=float, dest="t")
        p.add_argument("--p", type=int, dest="p")
        p.add_argument("--R", type=float, dest="radius")
        p.add_argument("--sigma", type=float, dest="sigma")
        p.add_argument("--epsilon", type=float, dest="epsilon")
        p.add_argument("--samples", type=int, dest="samples")
        p.add_argument("--iters", type=int, dest="iters")
        p.add_argument("--seed", type=int, dest="seed")
        p.add_argument("--out", dest="out_path")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        file_values = (
            parse_config_text(Path(args.config).read_text(encoding="utf-8"))
            if args.config
            else {}
        )
        overrides = {
            attr: value
            for attr, value in vars(args).items()
            if attr not in ("experiment", "config") and value is not None
        }
        config = ExperimentConfig.from_sources(args.experiment, file_values, overrides)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
