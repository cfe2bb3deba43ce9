"""Command-line entry point.

Configuration is resolved as: built-in defaults, then JSON config files (in
order), then explicit command-line flags.  Unknown keys are rejected.  Every
output embeds the resolved configuration and the assumed model constants.

Exit codes: 0 success, 1 runtime error, 2 configuration error, 3 infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import secrets
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .circuit import ANSATZ_KINDS, AnsatzSpec, CircuitError, build_ansatz, build_heisenberg, build_ising
from .estimator import (
    ConfigurationError,
    ConventionalStrategy,
    CultivationStrategy,
    NisqStrategy,
    PqecStrategy,
    comparison_dict,
    compare_strategies,
    crossover_depth_scan,
    default_strategies,
    estimate,
    predicted_crossover,
    win_matrix,
)
from .injection import ShufflePolicy, simulate_rus, stats_csv
from .layout import LayoutError, NoFitError
from .noise import (
    CodeParams,
    CultivationSpec,
    NisqNoiseModel,
    NoiseModelError,
    PqecNoiseModel,
    SynthesisSpec,
    factory_by_name,
    noise_tables,
)
from .scheduler import metrics_csv, schedule
from .vqe import GaConfig, VqeError, compare_regimes, optimize

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3
MODEL_VERSION = "1"
THREADS_ENV = "EFTVQA_THREADS"

COMMON = {"seed": None, "output": None, "format": "json", "d": 11, "p": 1e-3}

EXPERIMENTS = {
    "estimate": {
        "strategy": "pqec", "ansatz": "fche", "n": 16, "depth": 1, "budget": 10_000,
        "factory": "15-to-1_11_5_5", "eps": 1e-6, "overcommit": False,
        "cult_cycles": None, "cult_error": None,
    },
    "compare": {"ansatz": "fche", "ns": [12, 16, 20, 24], "depth": 1, "budget": 10_000},
    "schedule": {"ansatz": "blocked_all_to_all", "n": 20, "depth": 1, "rus": "deterministic",
                 "gantt": False},
    "shuffle-sim": {"policy": "patch_shuffling", "trials": 100_000, "theta": 0.1},
    "vqe": {
        "hamiltonian": "ising", "j": 1.0, "ansatz": "fche", "n": 4, "depth": 1,
        "regime": "compare", "population": 64, "generations": 200, "mutation": 0.05,
        "elite": 0.1, "restarts": 3, "fitness_shots": 256, "final_shots": 4096,
    },
    "win-matrix": {"programs": [4, 8, 12, 16, 20, 24],
                   "devices": [5_000, 10_000, 20_000, 50_000, 100_000], "depths": [1, 2, 3]},
    "crossover": {"ansatz": "blocked_all_to_all", "ns": list(range(8, 17)),
                  "depths": list(range(1, 11))},
}
RANDOMIZED = {"shuffle-sim", "vqe", "schedule"}
CHOICES = {
    "strategy": ("nisq", "pqec", "conventional", "cultivation"),
    "ansatz": ANSATZ_KINDS,
    "format": ("json", "csv"),
    "rus": ("deterministic", "expected", "sample"),
    "hamiltonian": ("ising", "heisenberg"),
    "regime": ("noiseless", "nisq", "pqec", "compare"),
}


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------- config


def _load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return doc


def _coerce(key: str, value, default):
    """Type-check one value against its default's type."""
    if value is None:
        return None
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        raise ConfigError(f"field '{key}': expected true/false, got {value!r}")
    if isinstance(default, list):
        if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                                  for v in value):
            raise ConfigError(f"field '{key}': expected a list of integers")
        if not value:
            raise ConfigError(f"field '{key}': must not be empty")
        return list(value)
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"field '{key}': expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field '{key}': expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"field '{key}': expected a string, got {value!r}")
        if key in CHOICES and value not in CHOICES[key]:
            raise ConfigError(f"field '{key}': {value!r} not in {list(CHOICES[key])}")
        return value
    return value


def resolve_config(kind: str, files=(), overrides: dict | None = None) -> dict:
    """Merge defaults, config files and overrides; validate every field."""
    if kind not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {kind!r}")
    defaults = {**COMMON, **EXPERIMENTS[kind]}
    cfg = dict(defaults)
    layers = [_load_file(f) for f in files] + [overrides or {}]
    for layer in layers:
        layer = dict(layer)
        if "experiment" in layer:
            if layer.pop("experiment") != kind:
                raise ConfigError(f"field 'experiment': config is not for {kind!r}")
        unknown = sorted(set(layer) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown field(s) {unknown} for {kind!r}")
        for k, v in layer.items():
            if v is None:
                continue
            typed_default = defaults[k]
            if typed_default is None:
                typed_default = {"seed": 0, "output": "", "cult_cycles": 0.0,
                                 "cult_error": 0.0}.get(k, v)
            cfg[k] = _coerce(k, v, typed_default)
    _validate(kind, cfg)
    return cfg


def _validate(kind: str, cfg: dict):
    def positive(*keys):
        for k in keys:
            if k in cfg and cfg[k] is not None and cfg[k] <= 0:
                raise ConfigError(f"field '{k}': must be positive")

    positive("n", "depth", "budget", "trials", "population", "generations", "restarts",
             "fitness_shots", "final_shots", "eps")
    for k in ("ns", "programs", "devices", "depths"):
        if k in cfg and any(v <= 0 for v in cfg[k]):
            raise ConfigError(f"field '{k}': entries must be positive")
    if not 0 <= cfg["p"] < 1:
        raise ConfigError("field 'p': must be in [0, 1)")
    if cfg.get("seed") is not None and cfg["seed"] < 0:
        raise ConfigError("field 'seed': must be nonnegative")
    for k in ("mutation", "elite"):
        if k in cfg and not 0 <= cfg[k] <= 1:
            raise ConfigError(f"field '{k}': must be in [0, 1]")
    if kind == "shuffle-sim":
        try:
            ShufflePolicy.parse(cfg["policy"])
        except (ValueError, IndexError):
            raise ConfigError(f"field 'policy': cannot parse {cfg['policy']!r}") from None
    if kind == "estimate" and cfg["strategy"] == "cultivation":
        if cfg["cult_cycles"] is None or cfg["cult_error"] is None:
            raise ConfigError("cultivation needs 'cult_cycles' and 'cult_error' (no defaults)")
    if kind == "estimate" and cfg["strategy"] == "conventional":
        try:
            factory_by_name(cfg["factory"])
        except NoiseModelError as exc:
            raise ConfigError(f"field 'factory': {exc}") from None
    if kind == "vqe":
        if cfg["population"] < 2:
            raise ConfigError("field 'population': must be >= 2")
        if cfg["fitness_shots"] < 2 or cfg["final_shots"] < 2:
            raise ConfigError("shot counts must be >= 2")


def _code(cfg) -> CodeParams:
    try:
        return CodeParams(d=cfg["d"], p_phys=cfg["p"])
    except NoiseModelError as exc:
        raise ConfigError(f"code parameters: {exc}") from None


def _ansatz(cfg, n=None) -> AnsatzSpec:
    try:
        return AnsatzSpec(cfg["ansatz"], n or cfg["n"], cfg["depth"])
    except CircuitError as exc:
        raise ConfigError(f"ansatz: {exc}") from None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------- runners


def _run_estimate(cfg):
    code = _code(cfg)
    circ = build_ansatz(_ansatz(cfg))
    synth = SynthesisSpec(eps=cfg["eps"])
    s = cfg["strategy"]
    if s == "nisq":
        st = NisqStrategy(NisqNoiseModel.from_physical(code.p_phys))
    elif s == "pqec":
        st = PqecStrategy(PqecNoiseModel.from_code(code), cfg["budget"])
    elif s == "conventional":
        st = ConventionalStrategy(factory_by_name(cfg["factory"]), code, cfg["budget"],
                                  synth, cfg["overcommit"])
    else:
        spec = CultivationSpec(code.d, cfg["cult_cycles"], cfg["cult_error"])
        st = CultivationStrategy(spec, code, cfg["budget"], synth, cfg["overcommit"])
    rep = estimate(circ, st, strict=True).to_dict()
    row = {k: v for k, v in rep.items() if k != "breakdown"}
    row.update({f"log_error_{k}": v for k, v in rep["breakdown"].items()})
    return rep, [row]


def _run_compare(cfg):
    code = _code(cfg)
    strategies = default_strategies(code, cfg["budget"])
    circs = {f"{cfg['ansatz']}-n{n}-p{cfg['depth']}": build_ansatz(_ansatz(cfg, n))
             for n in cfg["ns"]}
    with ThreadPoolExecutor(_threads()) as pool:
        parts = list(pool.map(lambda kv: compare_strategies(dict([kv]), strategies),
                              circs.items()))
    rows = comparison_dict([r for p in parts for r in p])
    flat = []
    for r in rows:
        for rep in r["reports"]:
            flat.append({"circuit": r["circuit"], "n": r["n"], "strategy": rep["strategy"],
                         "fidelity": rep["fidelity"], "fits": rep["fits"],
                         "ratio_pqec_over": r["ratios"].get(rep["strategy"], 1.0)})
    return {"rows": rows}, flat


def _run_schedule(cfg):
    circ = build_ansatz(_ansatz(cfg))
    sch = schedule(circ, rus=cfg["rus"], seed=cfg["seed"])
    out = sch.to_dict()
    if cfg["gantt"]:
        out["gantt"] = sch.gantt()
    row = sch.csv_row(N=cfg["n"], kind=cfg["ansatz"], layout="proposed")
    return out, [row]


def _run_shuffle(cfg):
    code = _code(cfg)
    pol = ShufflePolicy.parse(cfg["policy"])
    st = simulate_rus(cfg["theta"], pol, code, cfg["trials"], cfg["seed"], p_phys=cfg["p"])
    return st.to_dict(), st


def _run_vqe(cfg):
    code = _code(cfg)
    spec = _ansatz(cfg)
    build = build_ising if cfg["hamiltonian"] == "ising" else build_heisenberg
    ham = build(cfg["n"], cfg["j"])
    ga = GaConfig(cfg["population"], cfg["generations"], cfg["mutation"], cfg["elite"],
                  cfg["seed"], cfg["restarts"], fitness_shots=cfg["fitness_shots"],
                  final_shots=cfg["final_shots"])
    if cfg["regime"] == "compare":
        res = compare_regimes(ham, spec, ga, code)
        out = {"pqec": res["pqec"].to_dict(), "nisq": res["nisq"].to_dict(),
               "gamma": res["gamma"].to_dict()}
        rows = [{"regime": k, "generation": g, "best": b}
                for k in ("pqec", "nisq") for g, b in enumerate(res[k].trace)]
        return out, rows
    rec = optimize(ham, spec, cfg["regime"], ga, code)
    rows = [{"regime": rec.regime, "generation": g, "best": b, "mean": m}
            for g, (b, m) in enumerate(zip(rec.trace, rec.mean_trace))]
    return rec.to_dict(), rows


def _run_win(cfg):
    wm = win_matrix(cfg["programs"], cfg["devices"], cfg["depths"], _code(cfg))
    vals = [[None if v != v else float(v) for v in row] for row in wm.values]
    return {"programs": wm.programs, "devices": wm.devices, "win_fraction": vals}, wm


def _run_crossover(cfg):
    code = _code(cfg)
    scan = crossover_depth_scan(cfg["ansatz"], cfg["ns"], cfg["depths"], code)
    out = scan.to_dict()
    out["predicted_crossover_n"] = predicted_crossover(cfg["ansatz"], code)
    rows = [{"n": n, "nisq_slope": a, "pqec_slope": b}
            for n, a, b in zip(scan.ns, scan.nisq_slope, scan.pqec_slope)]
    return out, rows


RUNNERS = {
    "estimate": _run_estimate, "compare": _run_compare, "schedule": _run_schedule,
    "shuffle-sim": _run_shuffle, "vqe": _run_vqe, "win-matrix": _run_win,
    "crossover": _run_crossover,
}


# --------------------------------------------------------------------------- output


def _assumptions(cfg) -> dict:
    try:
        tables = noise_tables(CodeParams(d=cfg["d"], p_phys=cfg["p"]))
    except NoiseModelError:
        tables = {}
    return tables


def _csv(kind, rows) -> str:
    if kind == "shuffle-sim":
        return stats_csv([rows])
    if kind == "win-matrix":
        return rows.csv()
    if kind == "schedule":
        return metrics_csv(rows)
    buf = io.StringIO()
    fields = list(rows[0]) if rows else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def render(kind: str, cfg: dict, result, rows) -> str:
    meta = {"version": __version__, "model_version": MODEL_VERSION, "experiment": kind,
            "config": cfg, "assumptions": _assumptions(cfg)}
    if cfg["format"] == "json":
        return json.dumps({"meta": meta, "result": result}, sort_keys=True, indent=2,
                          default=_json_default) + "\n"
    head = f"# {json.dumps(meta, sort_keys=True, default=_json_default)}\n"
    return head + _csv(kind, rows)


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".eftvqa-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------- argparse


_FLAG_TYPES = {bool: None, int: int, float: float, str: str}


def _add_flags(p: argparse.ArgumentParser, kind: str):
    p.add_argument("--config", action="append", default=[], metavar="FILE",
                   help="JSON config file (repeatable; later files win)")
    p.add_argument("--print-config", action="store_true",
                   help="print the resolved configuration and exit")
    for key, default in {**COMMON, **EXPERIMENTS[kind]}.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(default, bool):
            p.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None)
        elif isinstance(default, list):
            p.add_argument(flag, dest=key, type=int, nargs="+", default=None)
        elif key in ("seed",):
            p.add_argument(flag, dest=key, type=int, default=None)
        elif key in ("output",):
            p.add_argument("-o", flag, dest=key, default=None)
        elif key in ("cult_cycles", "cult_error", "p", "eps", "j", "theta", "mutation", "elite"):
            p.add_argument(flag, dest=key, type=float, default=None)
        else:
            p.add_argument(flag, dest=key, type=_FLAG_TYPES[type(default)], default=None)


HELP = {
    "estimate": "fidelity and resource estimate for one strategy",
    "compare": "fidelity ratios between strategies over ansatz sizes",
    "schedule": "cycle-level schedule of an ansatz on the tiled layout",
    "shuffle-sim": "repeat-until-success injection statistics for one policy",
    "vqe": "genetic-algorithm VQE over Clifford parameters",
    "win-matrix": "pQEC vs best distillation setup over programs and devices",
    "crossover": "depth scan locating the pQEC/NISQ crossover size",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eftvqa", description="Early fault-tolerant VQA estimates.")
    ap.add_argument("--version", action="version", version=f"eftvqa {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENTS:
        _add_flags(sub.add_parser(kind, help=HELP[kind]), kind)
    pc = sub.add_parser("print-config", help="print the resolved config of an experiment")
    pc.add_argument("experiment", choices=sorted(EXPERIMENTS))
    pc.add_argument("--config", action="append", default=[], metavar="FILE")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    try:
        if args.command == "print-config":
            cfg = resolve_config(args.experiment, args.config)
            sys.stdout.write(json.dumps(cfg, sort_keys=True, indent=2) + "\n")
            return EXIT_OK
        kind = args.command
        keys = {**COMMON, **EXPERIMENTS[kind]}
        overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
        cfg = resolve_config(kind, args.config, overrides)
        if args.print_config:
            sys.stdout.write(json.dumps(cfg, sort_keys=True, indent=2) + "\n")
            return EXIT_OK
        if kind in RANDOMIZED and cfg["seed"] is None:
            cfg["seed"] = secrets.randbelow(2 ** 31)
        result, rows = RUNNERS[kind](cfg)
        text = render(kind, cfg, result, rows)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoFitError, ConfigurationError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NoiseModelError, LayoutError, CircuitError, VqeError, ValueError) as exc:
        if isinstance(exc, (NoiseModelError, CircuitError)):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if cfg["output"]:
        write_atomic(cfg["output"], text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
