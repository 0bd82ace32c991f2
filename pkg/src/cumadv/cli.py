"""Command-line entry point: ``cumadv <command> [options]``.

Every randomized command takes ``--seed`` (a default is used and printed when
absent) and embeds the effective config and seed in its output files.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import equivalence as eq
from . import gaussian, musiclab
from . import point_processes as pp
from .config import ConfigError, RunConfig, load_config, make_config
from .generators import POINT_PROCESS_MODELS, GeneratorSpec, parse_params
from .rng import make_rng


def _model_arg(values: list[str] | None) -> dict | None:
    if not values:
        return None
    raw = {"model": values[0]}
    raw.update(parse_params(",".join(values[1:])))
    return raw


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override its values")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cumadv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate any model")
    _add_common(p)
    p.add_argument("--model", nargs="+", metavar="NAME [k=v,...]")
    p.add_argument("--horizon", type=float)

    p = sub.add_parser("twin", help="map Q-model parameters to the path-dependent twin, or back")
    _add_common(p)
    p.add_argument("--q-model", dest="q_model", metavar="mu=..,sigmaT=..,sigmaX=..")
    p.add_argument("--twin", dest="twin", metavar="a=..,b=..,c=..")

    p = sub.add_parser("compare", help="path-law comparison of two generators")
    _add_common(p)
    p.add_argument("--a", nargs="+", metavar="NAME [k=v,...]")
    p.add_argument("--b", nargs="+", metavar="NAME [k=v,...]")
    p.add_argument("--horizon", type=float)
    p.add_argument("--buckets", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--expect", choices=("consistent", "rejected"))

    p = sub.add_parser("exchangeability", help="test a generator's path law for exchangeability")
    _add_common(p)
    p.add_argument("--model", nargs="+", metavar="NAME [k=v,...]")
    p.add_argument("--horizon", type=float)
    p.add_argument("--permutations", help="'transpositions', 'reversal' or e.g. '2,1,3;3,2,1'")
    p.add_argument("--buckets", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--expect", choices=("consistent", "rejected"))

    p = sub.add_parser("fit-musiclab", help="fit the urn reinforcement f to a download log")
    _add_common(p)
    p.add_argument("--log", help="download log CSV")
    p.add_argument("--grid", help="'lo:hi:step' or comma list (default 0.1:0.6:0.05)")
    p.add_argument("--refine-step", dest="refine_step", type=float, help="0 disables refinement")

    p = sub.add_parser("report-musiclab", help="rank-proportion intervals for a fitted f")
    _add_common(p)
    p.add_argument("--log", help="download log CSV")
    p.add_argument("--f", type=float)
    p.add_argument("--level", type=float)
    return parser


_TOP_FLAGS = ("seed", "reps", "length", "output", "format", "horizon", "buckets", "rounds", "threshold",
              "permutations", "log", "f", "grid", "refine_step", "level", "expect")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in _TOP_FLAGS}
    sections = {}
    if args.command in ("simulate", "exchangeability") and args.model:
        sections["generator"] = _model_arg(args.model)
    if args.command == "compare":
        for name in ("a", "b"):
            raw = _model_arg(getattr(args, name))
            if raw:
                sections[name] = raw
    if args.command == "twin":
        if args.q_model:
            sections["q-model"] = {"model": "q-model", **parse_params(args.q_model)}
        if args.twin:
            sections["twin"] = {"model": "twin", **parse_params(args.twin)}
    if args.config:
        cfg = load_config(args.config, overrides, sections)
        if cfg.command != args.command:
            raise ConfigError(f"config file is for {cfg.command!r}, not {args.command!r}")
        return cfg
    top = {k: v for k, v in overrides.items() if v is not None}
    top["command"] = args.command
    return make_config(top, sections)


def _need(cfg: RunConfig, *names: str) -> list[GeneratorSpec]:
    missing = [n for n in names if n not in cfg.generators]
    if missing:
        raise ConfigError(f"{cfg.command} needs generator(s): {', '.join(missing)}")
    return [cfg.generators[n] for n in names]


def _header(cfg: RunConfig) -> dict:
    return {"seed": cfg.seed, "config": cfg.echo_json()}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_simulate(cfg: RunConfig) -> tuple[str, list[Path]]:
    (gen,) = _need(cfg, "generator")
    reps = cfg.reps or 1
    out = Path(cfg.output or ".")
    rng = make_rng(cfg.seed)
    written = []
    if gen.model in POINT_PROCESS_MODELS:
        params = pp.PointProcessParams(gen.params["alpha"], gen.params["beta"], gen.params["horizon"])
        fn = {"contagious-poisson": pp.contagious_poisson, "mixed-poisson-twin": pp.mixed_poisson_twin,
              "homogeneous-mixed-poisson": pp.homogeneous_mixed_poisson}[gen.model]
        for i in range(reps):
            tl = fn(params, rng.split(i))
            extra = _header(cfg) | {"rep": i}
            if cfg.format == "json":
                path = out / f"{gen.model}_rep{i}.json"
                body = {"model": tl.model_id, "horizon": tl.horizon, "times": tl.times.tolist(),
                        "meta": {k: v for k, v in tl.meta.items()}, **extra}
                _write(path, json.dumps(body, sort_keys=True, default=float, indent=1) + "\n")
            else:
                path = out / f"{gen.model}_rep{i}.csv"
                _write(path, pp.timeline_to_csv(tl, extra))
            written.append(path)
        return f"simulate {gen.describe()}: {reps} timeline(s)", written
    length = cfg.length or 10
    rows = [gen.sample(length, rng.split(i)) for i in range(reps)]
    if cfg.format == "json":
        path = out / f"{gen.model}_paths.json"
        body = {"model": gen.describe(), "paths": [r.values.tolist() for r in rows], **_header(cfg)}
        _write(path, json.dumps(body, sort_keys=True, indent=1) + "\n")
    else:
        path = out / f"{gen.model}_paths.csv"
        lines = [f"#{k}={v}" for k, v in _header(cfg).items()]
        if gen.model == "multicolor-urn":
            lines.append("rep," + ",".join(f"y{k + 1}" for k in range(length)))
            for i, r in enumerate(rows):
                lines.append(f"{i}," + ",".join(str(int(np.argmax(v))) for v in r.values))
        else:
            lines.append("rep," + ",".join(f"y{k + 1}" for k in range(length)))
            for i, r in enumerate(rows):
                lines.append(f"{i}," + ",".join(repr(x.item()) for x in r.values))
        _write(path, "\n".join(lines) + "\n")
    return f"simulate {gen.describe()}: {reps} path(s) of length {length}", [path]


def cmd_twin(cfg: RunConfig) -> tuple[str, list[Path]]:
    if "q-model" in cfg.generators:
        q = cfg.generators["q-model"].params
        tw = gaussian.twin_from_q(gaussian.QModelParams(q["mu_T"], q["sigma_T"], q["sigma_X"]))
        body = {"twin": {"a": tw.a, "b": tw.b, "c": tw.c}}
        msg = f"TwinParams a={tw.a:g}, b={tw.b:g}, c={tw.c:g}"
    elif "twin" in cfg.generators:
        t = cfg.generators["twin"].params
        q = gaussian.q_from_twin(gaussian.TwinParams(t["a"], t["b"], t["c"]))
        body = {"q-model": {"mu_T": q.mu_T, "sigma_T": q.sigma_T, "sigma_X": q.sigma_X}}
        msg = f"QModelParams mu_T={q.mu_T:g}, sigma_T={q.sigma_T:g}, sigma_X={q.sigma_X:g}"
    else:
        raise ConfigError("twin needs --q-model or --twin parameters")
    written = []
    if cfg.output:
        path = Path(cfg.output)
        _write(path, json.dumps(body | {"config": cfg.echo()}, sort_keys=True, indent=1) + "\n")
        written.append(path)
    return msg, written


def _report_out(cfg: RunConfig, report: eq.ComparisonReport, default_name: str) -> list[Path]:
    if not cfg.output:
        return []
    path = Path(cfg.output)
    if path.suffix == "":
        path = path / default_name
    body = report.to_dict() | {"seed": cfg.seed, "config": cfg.echo()}
    _write(path, json.dumps(body, sort_keys=True, indent=1, default=eq._jsonable) + "\n")
    return [path]


def cmd_compare(cfg: RunConfig) -> tuple[str, list[Path], eq.ComparisonReport]:
    a, b = _need(cfg, "a", "b")
    rng = make_rng(cfg.seed)
    grid = None
    buckets = cfg.options.get("buckets")
    length = cfg.length or 5
    reps = cfg.reps or 100_000
    if buckets and "real" in (a.kind, b.kind):
        pa = a.sample_paths(length, reps, rng.split(0))
        pb = b.sample_paths(length, reps, rng.split(1))
        grid = eq.quantile_grid(np.concatenate([pa.ravel(), pb.ravel()]), buckets)
    report = eq.compare_generators(a, b, length, reps, rng, grid=grid,
                                   rounds=cfg.options.get("rounds", eq.DEFAULT_ROUNDS),
                                   threshold=cfg.options.get("threshold", eq.DEFAULT_THRESHOLD))
    return f"compare: {report.summary()}", _report_out(cfg, report, "compare.json"), report


def _parse_perms(text: str | None, m: int) -> list[tuple[int, ...]]:
    if not text or text == "transpositions":
        return eq.transpositions(m)
    if text == "reversal":
        return [eq.reversal(m)]
    return [tuple(int(x) for x in chunk.split(",")) for chunk in text.split(";") if chunk.strip()]


def cmd_exchangeability(cfg: RunConfig) -> tuple[str, list[Path], eq.ComparisonReport]:
    (gen,) = _need(cfg, "generator")
    length = cfg.length or 3
    reps = cfg.reps or 100_000
    perms = _parse_perms(cfg.options.get("permutations"), length)
    rng = make_rng(cfg.seed)
    grid = None
    buckets = cfg.options.get("buckets")
    if buckets and gen.kind == "real":
        grid = eq.quantile_grid(gen.sample_paths(length, reps, rng.split(99)), buckets)
    report = eq.exchangeability_test(gen, length, reps, perms, rng, grid=grid,
                                     rounds=cfg.options.get("rounds", eq.DEFAULT_ROUNDS),
                                     threshold=cfg.options.get("threshold", eq.DEFAULT_THRESHOLD))
    return report.summary(), _report_out(cfg, report, "exchangeability.json"), report


def _parse_grid(text: str | None) -> list[float]:
    if not text:
        return list(musiclab.COARSE_GRID)
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        if step <= 0 or hi < lo:
            raise ConfigError("grid must be lo:hi:step with step > 0 and hi >= lo")
        n = int(round((hi - lo) / step))
        return [round(lo + i * step, 10) for i in range(n + 1)]
    return [float(x) for x in text.split(",") if x.strip()]


def _read_log(cfg: RunConfig) -> musiclab.DownloadLog:
    path = cfg.options.get("log")
    if not path:
        raise ConfigError(f"{cfg.command} needs --log")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"log file not found: {p}")
    with p.open() as fh:
        return musiclab.ingest_log(fh)


def cmd_fit(cfg: RunConfig) -> tuple[str, list[Path]]:
    log = _read_log(cfg)
    grid = _parse_grid(cfg.options.get("grid"))
    refine = cfg.options.get("refine_step", musiclab.REFINE_STEP)
    fit = musiclab.fit_f(log, grid, cfg.reps or 300, make_rng(cfg.seed), refine_step=refine or None)
    written = []
    if cfg.output:
        path = Path(cfg.output)
        body = json.loads(fit.to_json()) | {"config": cfg.echo()}
        _write(path, json.dumps(body, sort_keys=True, indent=2) + "\n")
        written.append(path)
    return f"fit-musiclab: f_star={fit.f_star:g} loss={fit.losses[fit.f_star]:.6g} over {len(fit.grid)} grid points", written


def cmd_report(cfg: RunConfig) -> tuple[str, list[Path]]:
    log = _read_log(cfg)
    f = cfg.options.get("f")
    if f is None:
        raise ConfigError("report-musiclab needs --f")
    level = cfg.options.get("level", 0.95)
    rep = musiclab.interval_report(log, f, cfg.reps or 2000, level, make_rng(cfg.seed))
    cov = musiclab.coverage(log, rep)
    prefix = cfg.output or "musiclab"
    written = []
    for q in range(1, musiclab.QUARTILES + 1):
        path = Path(f"{prefix}_q{q}.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as fh:
            musiclab.write_quartile_csv(log, rep, q, fh, _header(cfg))
        written.append(path)
    return f"report-musiclab: f={f:g} reps={rep['reps']} coverage={cov:.3f}", written


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if cfg.seed_defaulted:
        print(f"# no --seed given; using seed {cfg.seed}", file=out)
    status = 0
    if cfg.command == "simulate":
        msg, files = cmd_simulate(cfg)
    elif cfg.command == "twin":
        msg, files = cmd_twin(cfg)
    elif cfg.command in ("compare", "exchangeability"):
        fn = cmd_compare if cfg.command == "compare" else cmd_exchangeability
        msg, files, report = fn(cfg)
        rounds = report.details.get("rounds")
        if rounds and 1 / (rounds + 1) > report.threshold:
            print(f"# warning: {rounds} permutation rounds cannot reach p <= {report.threshold:g}", file=out)
        expect = cfg.options.get("expect")
        if expect and report.verdict != expect:
            status = 2
            msg += f" (expected {expect})"
    elif cfg.command == "fit-musiclab":
        msg, files = cmd_fit(cfg)
    elif cfg.command == "report-musiclab":
        msg, files = cmd_report(cfg)
    else:  # pragma: no cover - guarded by make_config
        raise ConfigError(f"unknown command {cfg.command!r}")
    print(f"{msg} [seed={cfg.seed}]", file=out)
    for f in files:
        print(f"wrote {f}", file=out)
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except (ConfigError, ValueError, musiclab.LogFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
