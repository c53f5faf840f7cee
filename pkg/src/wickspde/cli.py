"""Command line front end: ``wickspde run <config>``, ``report <manifest>``, ``selftest``.

Configs are INI files with the sections ``[run]`` (kind, seed, workers, block_size),
``[params]`` (kind-specific numbers), ``[drift]`` (A0 .. An as polynomial-in-t
coefficient lists, stable runs only) and ``[output]`` (directory, snapshots).
Float lists accept either comma-separated values or ``start:stop:num`` (linspace).

Exit status: 0 success, 2 statistical gate failure, 1 runtime or input error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__, experiments as ex, io
from .errors import ConfigurationError, IntegrityError, WickSPDEError
from .field import min_grid_size

EXIT_OK, EXIT_ERROR, EXIT_GATE = 0, 1, 2
KINDS = ("tails", "stable", "pitchfork", "selftest", "schauder", "probe")
REQUIRED = object()


# --------------------------------------------------------------------------
# value parsers
# --------------------------------------------------------------------------


def _float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    return float(t)


def _floats(text: str) -> list:
    t = text.strip()
    if ":" in t:
        a, b, n = t.split(":")
        return [float(x) for x in np.linspace(_float(a), _float(b), int(n))]
    return [_float(x) for x in t.split(",") if x.strip()]


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text: str) -> str:
    return text.strip()


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt_value(x) for x in v)
    return str(v)


RUN_KEYS = {"kind": (_str, REQUIRED), "seed": (int, 0), "workers": (int, 1),
            "block_size": (int, 250)}
OUTPUT_KEYS = {"directory": (_str, ""), "snapshots": (_bool, False)}

_H_DEFAULT = [float(x) for x in np.round(np.linspace(0.25, 16.0, 64), 6)]

PARAM_KEYS = {
    "tails": {
        "eps": (_float, REQUIRED), "sigma": (_float, REQUIRED), "T": (_float, REQUIRED),
        "N": (int, REQUIRED), "m_max": (int, REQUIRED), "alpha": (_floats, [-0.5]),
        "h_over_sigma_sq": (_floats, _H_DEFAULT), "paths": (int, 10_000),
        "stride": (_float, 0.0), "a_family": (_str, "constant"),
        "a_coefficients": (_floats, [-1.0]), "init": (_str, "stationary"),
    },
    "stable": {
        "eps": (_floats, REQUIRED), "sigma": (_floats, REQUIRED), "N": (int, 8), "T": (_float, 1.0),
        "M": (int, 0), "gamma": (_float, 1.5), "nu": (_float, 0.2), "paths": (int, 1000),
        "steps_per_eps": (int, 20), "seed_root": (_float, 1.0),
    },
    "pitchfork": {
        "mode": (_str, "exit"), "eps": (_float, REQUIRED), "sigma": (_floats, REQUIRED),
        "t_star": (_float, 0.5), "slope": (_float, 1.0), "T": (_float, 1.0), "N": (int, 4),
        "paths": (int, 1000), "steps_per_eps": (int, 20), "h_minus_factor": (_float, 3.0),
        "tube": (_str, "sqrt"), "o1_level": (_float, 0.5), "h_factor": (_float, 1.0),
        "H0_factor": (_float, 10.0), "gamma": (_float, 1.5), "nu": (_float, 0.2),
        "M_const": (_float, 1.0),
    },
    "selftest": {"quick": (_bool, False)},
    "schauder": {
        "N": (int, 32), "alpha": (_float, -0.5), "beta": (_float, 1.0), "n_grid": (int, 200),
        "t_min": (_float, 1e-7), "single_mode": (_ints, [5, 0]),
    },
    "probe": {
        "N": (int, 16), "sigma": (_float, REQUIRED), "m": (int, 1), "q0": (_ints, [0, 1, 2, 3, 4]),
        "p": (_float, math.inf), "alpha": (_float, -0.5), "samples": (int, 10_000),
        "h_over_sigma_sq": (_floats, list(ex.ProbeConfig().h_over_sigma_sq)),
    },
}


# --------------------------------------------------------------------------
# RunConfig
# --------------------------------------------------------------------------


@dataclass
class RunConfig:
    kind: str
    seed: int = 0
    workers: int = 1
    block_size: int = 250
    params: dict = field(default_factory=dict)
    drift: list | None = None
    output: dict = field(default_factory=lambda: {"directory": "", "snapshots": False})

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "block_size": self.block_size,
                "params": self.params, "drift": self.drift,
                "output": {"snapshots": self.output["snapshots"]}}

    def config_hash(self) -> str:
        """Hash of everything that affects results (not the directory or worker count)."""
        return io.sha256_text(io.dumps_json(self.to_dict()))

    def to_ini(self, canonical: bool = False) -> str:
        """INI text that parses back to an equal config.

        ``canonical`` drops the worker count and output directory, which do not affect results.
        """
        lines = ["[run]", f"kind = {self.kind}", f"seed = {self.seed}"]
        if not canonical:
            lines.append(f"workers = {self.workers}")
        lines += [f"block_size = {self.block_size}", "", "[params]"]
        lines += [f"{k} = {_fmt_value(v)}" for k, v in self.params.items()]
        if self.drift is not None:
            lines += ["", "[drift]"]
            lines += [f"A{j} = {_fmt_value(c)}" for j, c in enumerate(self.drift)]
        lines += ["", "[output]"]
        if not canonical:
            lines.append(f"directory = {self.output['directory']}")
        lines += [f"snapshots = {_fmt_value(self.output['snapshots'])}", ""]
        return "\n".join(lines)


def _read_section(parser, section, schema, problems, *, required=True) -> dict:
    out = {}
    raw = dict(parser[section]) if parser.has_section(section) else {}
    for key in raw:
        if key not in schema:
            problems.append(f"unknown key '{key}' in [{section}]")
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                out[key] = conv(raw[key])
            except ValueError as exc:
                problems.append(f"[{section}] {key}: {exc}")
        elif default is REQUIRED:
            if required:
                problems.append(f"missing required key '{key}' in [{section}]")
        else:
            out[key] = list(default) if isinstance(default, list) else default
    return out


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str  # keys are case-sensitive (T, N, M)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}", [str(exc)]) from exc
    problems = []
    for sec in parser.sections():
        if sec not in ("run", "params", "drift", "output"):
            problems.append(f"unknown section [{sec}]")
    run = _read_section(parser, "run", RUN_KEYS, problems)
    kind = run.get("kind")
    if kind is not None and kind not in KINDS:
        problems.append(f"unknown experiment kind {kind!r} (expected one of {', '.join(KINDS)})")
        kind = None
    params = _read_section(parser, "params", PARAM_KEYS[kind], problems) if kind else {}
    output = _read_section(parser, "output", OUTPUT_KEYS, problems)
    drift = None
    if parser.has_section("drift"):
        raw = dict(parser["drift"])
        idx = {}
        for key, val in raw.items():
            if not (key.startswith("A") and key[1:].isdigit()):
                problems.append(f"unknown key '{key}' in [drift] (expected A0, A1, ...)")
                continue
            try:
                idx[int(key[1:])] = _floats(val)
            except ValueError as exc:
                problems.append(f"[drift] {key}: {exc}")
        if idx:
            n = max(idx)
            drift = [idx.get(j, [0.0]) for j in range(n + 1)]
    cfg = RunConfig(kind or "", run.get("seed", 0), run.get("workers", 1),
                    run.get("block_size", 250), params, drift, output)
    if kind:
        problems.extend(_validate(cfg))
    if problems:
        raise ConfigurationError(f"{source}: invalid configuration:\n  " + "\n  ".join(problems),
                                 problems)
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file {p} not found", [f"missing file {p}"])
    return parse_config(p.read_text(), str(p))


def _validate(cfg: RunConfig) -> list:
    """Constraint checks; every violation is collected."""
    problems = []
    p = cfg.params
    if cfg.workers < 1:
        problems.append("workers must be >= 1")
    if cfg.block_size < 1:
        problems.append("block_size must be >= 1")
    for key in ("eps", "sigma", "T"):
        vals = p.get(key)
        if vals is None:
            continue
        vals = vals if isinstance(vals, list) else [vals]
        if not vals:
            problems.append(f"{key} sweep must be non-empty")
        elif key == "sigma":
            if any(v < 0 for v in vals):
                problems.append("sigma must be >= 0")
        elif any(v <= 0 for v in vals):
            problems.append(f"{key} must be positive")
    if "N" in p and p["N"] < 1:
        problems.append("N must be >= 1")
    if any(k not in p for k, (_, d) in PARAM_KEYS[cfg.kind].items() if d is REQUIRED):
        return problems  # already reported as missing; the experiment config cannot be built
    try:
        if cfg.kind == "tails":
            _build(cfg).validate()
        elif cfg.kind == "stable":
            if cfg.drift is None:
                problems.append("stable runs need a [drift] section with A0 .. An")
            else:
                from .solver import DriftPolynomial
                DriftPolynomial(cfg.drift)
                n = len(cfg.drift) - 1
                if p["M"] and p["M"] < min_grid_size(p["N"], n):
                    problems.append(f"M={p['M']} is below the alias-free size {min_grid_size(p['N'], n)}")
            _build(cfg).validate()
        elif cfg.kind == "pitchfork":
            if p["mode"] not in ("exit", "perp"):
                problems.append("pitchfork mode must be 'exit' or 'perp'")
            else:
                _build(cfg).validate()
        elif cfg.kind == "probe":
            if p["p"] < 2:
                problems.append("p must lie in [2, inf]")
            if p["samples"] < 1000:
                problems.append("probe needs at least 10^3 samples")
        elif cfg.kind == "schauder":
            if p["beta"] > p["alpha"] + 2:
                problems.append("need beta <= alpha + 2")
    except ConfigurationError as exc:
        problems.extend(exc.violations or [str(exc)])
    return problems


def _build(cfg: RunConfig):
    p = cfg.params
    bs = cfg.block_size
    if cfg.kind == "tails":
        fam = {"family": p["a_family"], "coefficients": p["a_coefficients"]}
        return ex.TailConfig(
            eps=p["eps"], sigma=p["sigma"], T=p["T"], N=p["N"],
            m_values=tuple(range(1, p["m_max"] + 1)), alphas=tuple(p["alpha"]),
            h_over_sigma_sq=tuple(p["h_over_sigma_sq"]), paths=p["paths"],
            dt=p["stride"] or None, a_family=fam, init=p["init"], block_size=bs)
    if cfg.kind == "stable":
        pts = [[e, s] for e in p["eps"] for s in p["sigma"]]
        return ex.Phi1Config(drift=cfg.drift, seed_root=p["seed_root"], N=p["N"], T=p["T"],
                             points=pts, gamma=p["gamma"], nu=p["nu"], paths=p["paths"],
                             steps_per_eps=p["steps_per_eps"], M=p["M"], block_size=bs)
    if cfg.kind == "pitchfork":
        common = dict(eps=p["eps"], t_star=p["t_star"], slope=p["slope"], T=p["T"], N=p["N"],
                      sigmas=tuple(p["sigma"]), paths=p["paths"],
                      steps_per_eps=p["steps_per_eps"], block_size=bs)
        if p["mode"] == "exit":
            return ex.ExitConfig(h_minus_factor=p["h_minus_factor"], tube=p["tube"],
                                 o1_level=p["o1_level"], **common)
        return ex.PerpConfig(h_factor=p["h_factor"], H0_factor=p["H0_factor"], gamma=p["gamma"],
                             nu=p["nu"], M_const=p["M_const"], **common)
    if cfg.kind == "schauder":
        return ex.SchauderConfig(N=p["N"], alpha=p["alpha"], beta=p["beta"], n_grid=p["n_grid"],
                                 t_min=p["t_min"], single_mode=tuple(p["single_mode"]))
    if cfg.kind == "probe":
        return ex.ProbeConfig(N=p["N"], sigma=p["sigma"], m=p["m"], q0_values=tuple(p["q0"]),
                              p=p["p"], alpha=p["alpha"], samples=p["samples"],
                              h_over_sigma_sq=tuple(p["h_over_sigma_sq"]), block_size=bs)
    return None


# --------------------------------------------------------------------------
# gates
# --------------------------------------------------------------------------


def tail_gates(report: ex.TailReport) -> dict:
    gates = {}
    for e in report.entries:
        fit = e["fit"]
        gates[f"linear_m{e['m']}_alpha{e['alpha']}"] = bool(fit and fit["r_squared"] > 0.9)
    for alpha in report.config["alphas"]:
        gates[f"kappa_monotone_alpha{alpha}"] = report.kappa_monotone(alpha)
    return gates


def stable_gates(report: ex.Phi1Report) -> dict:
    gates = {"no_divergence": all(p["diverged"] == 0 for p in report.points)}
    for eps in sorted({p["eps"] for p in report.points}):
        sig = sorted(p["sigma"] for p in report.points if p["eps"] == eps)
        ratios = report.ratios(eps)
        if len(sig) < 2 or not all(b == 2 * a for a, b in zip(sig, sig[1:])):
            continue
        if sig[-1] <= eps / 10:
            gates[f"ratio_2_eps{eps}"] = all(1.5 <= r <= 2.5 for r in ratios)
        elif sig[0] >= 10 * eps:
            gates[f"ratio_4_eps{eps}"] = all(3.0 <= r <= 5.0 for r in ratios)
    return gates


def perp_gates(report: ex.PerpReport) -> dict:
    if len(report.points) < 3 or report.exponent is None:
        return {}
    return {"cubic_exponent": 2.5 <= report.exponent <= 3.5}


def probe_gates(report: ex.ProbeReport) -> dict:
    rates = report.rates()
    if any(r is None for r in rates):
        return {"all_rates_fitted": False}
    diffs = np.diff(rates)
    return {"all_rates_fitted": True, "rates_monotone_in_q0": bool(np.all(diffs <= 0) or np.all(diffs >= 0)),
            "pairing_constant_finite": bool(np.isfinite(report.pairing_constant))}


# --------------------------------------------------------------------------
# run / report
# --------------------------------------------------------------------------


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _versions() -> dict:
    return {"wickspde": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def output_directory(cfg: RunConfig) -> Path:
    env = os.environ.get("WICKSPDE_OUTPUT_DIR")
    if env:
        return Path(env)
    if cfg.output.get("directory"):
        return Path(cfg.output["directory"])
    return Path("runs") / f"{cfg.kind}-{cfg.config_hash()[:12]}"


def execute(cfg: RunConfig, workers: int | None = None):
    """Run the experiment; returns (report dict, gates, csv table or None, extra artifacts)."""
    obj = _build(cfg)
    kind, seed = cfg.kind, cfg.seed
    extras = []
    if kind == "tails":
        rep = ex.tail_experiment(obj, seed, workers)
        from .wick import renorm_constant
        extras.append(("variances", renorm_constant(obj.N, obj.sigma)))
        if cfg.output.get("snapshots"):
            from .convolution import stationary_sample
            from .field import FourierField
            from .parallel import block_rng
            c = stationary_sample(obj.N, obj.sigma, 4, block_rng(seed, 0, stream=9999))
            extras.append(("fields", [FourierField(ci) for ci in c]))
        return rep.to_dict(), tail_gates(rep), rep.csv_rows(), extras
    if kind == "stable":
        rep = ex.phi1_experiment(obj, seed, workers)
        if cfg.output.get("snapshots"):
            from .field import FourierField
            setup = ex._split_setup(obj, obj.points[0][0])
            extras.append(("fields", [FourierField(setup.phibar[-1], setup.M, check=False)]))
        return rep.to_dict(), stable_gates(rep), rep.csv_rows(), extras
    if kind == "pitchfork":
        if isinstance(obj, ex.ExitConfig):
            rep = ex.pitchfork_exit_experiment(obj, seed, workers)
            gates = {k: v for k, v in rep.gates.items() if isinstance(v, bool)}
            return rep.to_dict(), gates, rep.csv_rows(), extras
        rep = ex.phi1perp_experiment(obj, seed, workers)
        return rep.to_dict(), perp_gates(rep), rep.csv_rows(), extras
    if kind == "selftest":
        rep = ex.selftest(cfg.params["quick"], seed)
        return rep, rep["gates"], None, extras
    if kind == "schauder":
        rep = ex.schauder_probe(obj)
        return rep, rep["gates"], None, extras
    if kind == "probe":
        rep = ex.pairing_probe(obj, seed, workers)
        return rep.to_dict(), probe_gates(rep), rep.csv_rows(), extras
    raise ConfigurationError(f"unknown kind {kind!r}")


def run(cfg: RunConfig, out_dir=None, workers: int | None = None) -> int:
    out = Path(out_dir) if out_dir is not None else output_directory(cfg)
    out.mkdir(parents=True, exist_ok=True)
    if workers is None:
        env = os.environ.get("WICKSPDE_WORKERS")
        workers = int(env) if env else cfg.workers
    manifest = {
        "schema_version": io.REPORT_SCHEMA_VERSION,
        "kind": cfg.kind,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "code_version": __version__,
        "module_versions": _versions(),
        "started": _now(),
        "finished": None,
        "complete": False,
        "status": "running",
        "files": [],
    }
    mpath = out / "manifest.json"
    io.write_json(mpath, manifest)
    written = []

    def record(path: Path):
        written.append({"path": path.name, "sha256": io.sha256_file(path)})

    status = EXIT_ERROR
    try:
        (out / "config.ini").write_text(cfg.to_ini(canonical=True))
        record(out / "config.ini")
        report, gates, table, extras = execute(cfg, workers)
        report = dict(report, schema_version=io.REPORT_SCHEMA_VERSION, gates=gates)
        io.write_json(out / "report.json", report)
        record(out / "report.json")
        if table is not None:
            header, rows = table
            io.write_csv(out / "report.csv", header, rows)
            record(out / "report.csv")
        for name, payload in extras:
            if name == "variances":
                for p in io.write_variance_tables(out, payload):
                    record(Path(p))
            elif name == "fields":
                io.write_fields(out / "fields.wspf", payload)
                record(out / "fields.wspf")
        status = EXIT_OK if all(gates.values()) else EXIT_GATE
        manifest.update(complete=True, gates=gates,
                        status="ok" if status == EXIT_OK else "gate_failure")
    except Exception as exc:  # recorded in the manifest, then re-raised
        manifest.update(complete=False, status="error", error=f"{type(exc).__name__}: {exc}")
        raise
    finally:
        manifest["files"] = sorted(written, key=lambda e: e["path"])
        manifest["finished"] = _now()
        io.write_json(mpath, manifest)
    return status


def summarize(manifest_path) -> str:
    """Human-readable summary of a finished run; raises IntegrityError on tampering."""
    manifest = io.verify_manifest(manifest_path)
    lines = [f"kind: {manifest.get('kind')}  config hash: {manifest.get('config_hash', '')[:16]}  "
             f"code: {manifest.get('code_version')}  status: {manifest.get('status')}"]
    if not manifest.get("complete", False):
        lines.append("run is INCOMPLETE")
    files = manifest.get("files", [])
    if not files:
        lines.append("no artifacts")
        return "\n".join(lines)
    rpath = Path(manifest_path).parent / "report.json"
    if not rpath.exists():
        lines.append("no report artifact")
        return "\n".join(lines)
    import json
    rep = json.loads(rpath.read_text())
    kind = rep.get("kind")
    if kind == "tails":
        lines.append(f"{'m':>3} {'alpha':>7} {'kappa':>10} {'R^2':>8} {'points':>7}  flag")
        for e in rep["entries"]:
            fit = e["fit"] or {}
            lines.append(f"{e['m']:>3} {e['alpha']:>7.3g} {fit.get('slope', float('nan')):>10.4g} "
                         f"{fit.get('r_squared', float('nan')):>8.4f} {fit.get('n_points', 0):>7}  "
                         f"{e['fit_flag']}")
    elif kind == "stable":
        lines.append(f"{'eps':>8} {'sigma':>10} {'median':>12} {'diverged':>9}")
        for p in rep["points"]:
            lines.append(f"{p['eps']:>8.3g} {p['sigma']:>10.3g} {p['median_holder'] or float('nan'):>12.4g} "
                         f"{p['diverged']:>9}")
        if rep.get("nu_fit"):
            lines.append(f"nu fit: {rep['nu_fit']['nu_hat']:.3f}")
    elif kind == "pitchfork":
        lines.append(f"{'sigma':>8} {'sd ratio':>9} {'delay ratio':>12} {'exits':>6} {'censored':>9}")
        for p in rep["points"]:
            sd = p.get("sd_ratio")
            dr = p.get("delay_ratio")
            lines.append(f"{p['sigma']:>8.3g} {'-' if sd is None else f'{sd:.3f}':>9} "
                         f"{'-' if dr is None else f'{dr:.3f}':>12} {p['exits_plus']:>6} "
                         f"{p['censored_plus']:>9}")
    elif kind == "pitchfork_perp":
        lines.append(f"{'h+H0':>10} {'median sup':>12} {'censored':>9}")
        for p in rep["points"]:
            lines.append(f"{p['h_plus_H0']:>10.3g} {p['median_sup']:>12.4g} {p['censored']:>9}")
        lines.append(f"fitted exponent: {rep.get('exponent')}")
    elif kind == "probe":
        for r in rep["rows"]:
            fit = r["fit"] or {}
            lines.append(f"q0={r['q0']}  rate={fit.get('slope')}  R^2={fit.get('r_squared')}")
        lines.append(f"pairing constant: {rep['pairing_constant']:.4g}")
    elif kind == "schauder":
        lines.append(f"M_hat={rep['M_hat']:.6g}  refined={rep['M_hat_refined']:.6g}  "
                     f"single-mode error={rep['single_mode']['abs_error']:.3g}")
    elif kind == "selftest":
        for k, v in rep["details"].items():
            lines.append(f"{k}: {v}")
    for name, ok in sorted((rep.get("gates") or {}).items()):
        lines.append(f"gate {name}: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wickspde", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"wickspde {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment from an INI config")
    r.add_argument("config")
    r.add_argument("--output", help="output directory (overrides the config)")
    r.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    p = sub.add_parser("report", help="summarise a finished run from its manifest")
    p.add_argument("manifest")
    s = sub.add_parser("selftest", help="run the oracle suite")
    s.add_argument("--quick", action="store_true", help="fewer Monte Carlo samples")
    s.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            status = run(cfg, args.output, args.workers)
            print(f"wrote {output_directory(cfg) if args.output is None else args.output}")
            return status
        if args.command == "report":
            print(summarize(args.manifest))
            return EXIT_OK
        rep = ex.selftest(args.quick, args.seed)
        for name, ok in rep["gates"].items():
            print(f"{name}: {'PASS' if ok else 'FAIL'}")
        return EXIT_OK if all(rep["gates"].values()) else EXIT_GATE
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (WickSPDEError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
