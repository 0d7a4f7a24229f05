"""Configuration parsing, command dispatch, and result emission.

One config runs one command.  Matrices and class vectors are written as
exact strings ("3/2", "1+2i", "0.25"); plain JSON floats are kept as their
literal text and parsed exactly, so decimal input never picks up binary
rounding.  Outputs are deterministic: keys sorted, high-precision values
emitted as decimal strings tagged with the precision, timestamps only in a
sidecar log.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath as mp
import sympy as sp

from . import __version__
from .errors import KahlerDynError, ParseError, ValidationError
from .exact import ExactMatrix, format_exact, parse_exact

COMMANDS = ("degrees", "jordan", "relative", "cesaro", "green", "iterate", "mixing", "chain")

_MODEL_FIELDS = {
    "torus": {"type", "k", "matrix"},
    "mazur": {"type", "k", "word"},
    "raw": {"type", "blocks", "kahler", "cup", "pushforward"},
    "matrix": {"type", "matrix"},
}

_TOP_FIELDS = {
    "model",
    "command",
    "precision_bits",
    "n_max",
    "N_max",
    "grid",
    "output",
    "tolerances",
    "params",
}

_DEFAULT_TOLERANCES = {"eigen": 1e-9, "cone": 1e-9}


@dataclass
class RunConfig:
    model_type: str
    model: dict
    command: str
    precision_bits: int = 128
    n_max: int = 200
    N_max: int = 200
    grid: dict = field(default_factory=lambda: {"resolution": 2**14, "dim": 1})
    output: dict = field(default_factory=lambda: {"path": None, "format": "json"})
    tolerances: dict = field(default_factory=lambda: dict(_DEFAULT_TOLERANCES))
    params: dict = field(default_factory=dict)

    def resolved(self):
        """Canonical dict form; re-parsing it yields an equal RunConfig."""
        model = {"type": self.model_type}
        for key, value in self.model.items():
            model[key] = _emit_value(value)
        return {
            "model": model,
            "command": self.command,
            "precision_bits": self.precision_bits,
            "n_max": self.n_max,
            "N_max": self.N_max,
            "grid": dict(self.grid),
            "output": {"path": self.output.get("path"), "format": self.output.get("format", "json")},
            "tolerances": dict(self.tolerances),
            "params": _emit_value(self.params),
        }


def _emit_value(value):
    if isinstance(value, sp.Expr):
        return format_exact(value)
    if isinstance(value, dict):
        return {k: _emit_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_emit_value(v) for v in value]
    return value


class _KeepFloat(str):
    """Literal float text from the config source, parsed exactly later."""


def parse_config(text) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Unknown fields are rejected; exact-number strings are parsed without
    rounding (a literal 1.5 becomes the rational 3/2).
    """
    try:
        data = json.loads(text, parse_float=_KeepFloat)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(data, dict):
        raise ValidationError("top level must be an object")
    unknown = set(data) - _TOP_FIELDS
    if unknown:
        raise ValidationError(f"unknown top-level fields: {sorted(unknown)}")
    if "model" not in data or "command" not in data:
        raise ValidationError("config needs 'model' and 'command'")
    command = data["command"]
    if command not in COMMANDS:
        raise ValidationError(f"unknown command {command!r}; pick one of {COMMANDS}")

    model_in = data["model"]
    if not isinstance(model_in, dict) or "type" not in model_in:
        raise ValidationError("'model' must be an object with 'type'")
    mtype = model_in["type"]
    if mtype not in _MODEL_FIELDS:
        raise ValidationError(f"unknown model type {mtype!r}")
    unknown = set(model_in) - _MODEL_FIELDS[mtype]
    if unknown:
        raise ValidationError(f"unknown fields for model {mtype!r}: {sorted(unknown)}")
    model = _parse_model(mtype, model_in)

    precision = int(data.get("precision_bits", 128))
    if precision < 64:
        raise ValidationError("precision_bits must be at least 64")

    grid = data.get("grid", {"resolution": 2**14, "dim": 1})
    if not isinstance(grid, dict) or set(grid) - {"resolution", "dim"}:
        raise ValidationError("grid takes only 'resolution' and 'dim'")
    grid = {"resolution": int(grid.get("resolution", 2**14)), "dim": int(grid.get("dim", 1))}

    output = data.get("output", {})
    if not isinstance(output, dict) or set(output) - {"path", "format"}:
        raise ValidationError("output takes only 'path' and 'format'")
    fmt = output.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ValidationError("output format must be 'json' or 'csv'")
    output = {"path": output.get("path"), "format": fmt}

    tolerances = dict(_DEFAULT_TOLERANCES)
    for k, v in data.get("tolerances", {}).items():
        if k not in _DEFAULT_TOLERANCES:
            raise ValidationError(f"unknown tolerance {k!r}")
        tolerances[k] = float(v)

    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ValidationError("'params' must be an object")
    params = _parse_params(command, params)

    return RunConfig(
        model_type=mtype,
        model=model,
        command=command,
        precision_bits=precision,
        n_max=int(data.get("n_max", 200)),
        N_max=int(data.get("N_max", 200)),
        grid=grid,
        output=output,
        tolerances=tolerances,
        params=params,
    )


def _parse_matrix(rows):
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValidationError("matrix must be a list of rows")
    return tuple(tuple(parse_exact(e) for e in row) for row in rows)


def _parse_model(mtype, model_in):
    if mtype == "torus":
        if "matrix" not in model_in:
            raise ValidationError("torus model needs 'matrix'")
        matrix = _parse_matrix(model_in["matrix"])
        k = int(model_in.get("k", len(matrix)))
        return {"k": k, "matrix": matrix}
    if mtype == "mazur":
        if "k" not in model_in or "word" not in model_in:
            raise ValidationError("mazur model needs 'k' and 'word'")
        word = tuple(int(i) for i in model_in["word"])
        return {"k": int(model_in["k"]), "word": word}
    if mtype == "matrix":
        if "matrix" not in model_in:
            raise ValidationError("matrix model needs 'matrix'")
        return {"matrix": _parse_matrix(model_in["matrix"])}
    # raw
    if "blocks" not in model_in:
        raise ValidationError("raw model needs 'blocks'")
    out = {"blocks": tuple(_parse_matrix(b) for b in model_in["blocks"])}
    if model_in.get("kahler") is not None:
        out["kahler"] = tuple(
            None if v is None else tuple(parse_exact(e) for e in v) for v in model_in["kahler"]
        )
    if model_in.get("pushforward") is not None:
        out["pushforward"] = tuple(_parse_matrix(b) for b in model_in["pushforward"])
    if model_in.get("cup") is not None:
        cup = {}
        for key, entries in model_in["cup"].items():
            cup[key] = tuple(
                (int(i), int(j), int(t), parse_exact(c)) for i, j, t, c in entries
            )
        out["cup"] = cup
    return out


def _parse_params(command, params):
    allowed = {
        "degrees": {"p"},
        "jordan": set(),
        "relative": {"s", "T_class", "lambda_T"},
        "cesaro": {"s", "S_class"},
        "green": {"samples", "sample_tolerance"},
        "iterate": {"g", "u", "nu", "lambda"},
        "mixing": {"pairs", "mode", "resolution"},
        "chain": set(),
    }[command]
    unknown = set(params) - allowed
    if unknown:
        raise ValidationError(f"unknown params for {command!r}: {sorted(unknown)}")
    out = dict(params)
    if command == "relative":
        if "s" not in out:
            raise ValidationError("relative needs params.s")
        out["s"] = int(out["s"])
        if "T_class" in out and out["T_class"] != "dominant":
            out["T_class"] = tuple(parse_exact(v) for v in out["T_class"])
        if "lambda_T" in out and out["lambda_T"] != "auto":
            out["lambda_T"] = parse_exact(out["lambda_T"])
    if command == "cesaro":
        out["s"] = int(out.get("s", 1))
        if "S_class" in out and out["S_class"] != "kahler":
            out["S_class"] = tuple(parse_exact(v) for v in out["S_class"])
    if command == "iterate":
        if "g" not in out or "lambda" not in out:
            raise ValidationError("iterate needs params.g and params.lambda")
        out["g"] = tuple(tuple(int(e) for e in row) for row in out["g"])
        out["lambda"] = _parse_matrix(out["lambda"])
        out["nu"] = float(out.get("nu", 1.0))
        u = out.get("u", {"type": "cos", "frequency": [1]})
        if not isinstance(u, dict) or u.get("type") != "cos":
            raise ValidationError("iterate supports u of type 'cos' with a frequency vector")
        out["u"] = {"type": "cos", "frequency": tuple(int(f) for f in u.get("frequency", [1]))}
    if command == "mixing":
        if "pairs" not in out or not out["pairs"]:
            raise ValidationError("mixing needs params.pairs")
        out["pairs"] = tuple(
            (tuple(int(x) for x in a), tuple(int(x) for x in b)) for a, b in out["pairs"]
        )
        out["mode"] = out.get("mode", "character")
        if out["mode"] not in ("character", "grid"):
            raise ValidationError("mixing mode must be 'character' or 'grid'")
        if "resolution" in out:
            out["resolution"] = int(out["resolution"])
    if command == "degrees" and "p" in out:
        out["p"] = int(out["p"])
    if command == "green":
        out["samples"] = int(out.get("samples", 8))
        out["sample_tolerance"] = float(out.get("sample_tolerance", 1e-3))
    return out


# ---------------------------------------------------------------------------
# dispatch


def _build_action(config):
    from .models import TorusAutomorphism, mazur_action, mazur_involutions, raw_action, torus_action

    if config.model_type == "torus":
        torus = TorusAutomorphism(config.model["k"], [list(r) for r in config.model["matrix"]])
        return torus_action(torus), torus
    if config.model_type == "mazur":
        model = mazur_involutions(config.model["k"]).with_word(config.model["word"])
        return mazur_action(model), model
    if config.model_type == "raw":
        raw = {
            "blocks": [[list(r) for r in b] for b in config.model["blocks"]],
        }
        if "kahler" in config.model:
            raw["kahler"] = [None if v is None else list(v) for v in config.model["kahler"]]
        if "pushforward" in config.model:
            raw["pushforward"] = [[list(r) for r in b] for b in config.model["pushforward"]]
        if "cup" in config.model:
            raw["cup"] = {k: list(v) for k, v in config.model["cup"].items()}
        return raw_action(raw), None
    raise ValidationError(f"model type {config.model_type!r} does not define a graded action")


def _thread_count():
    """Worker count for the embarrassingly parallel loops, from the
    environment; results are order-preserving and deterministic either way."""
    try:
        return max(1, int(os.environ.get("KAHLERDYN_THREADS", "1")))
    except ValueError:
        return 1


def run(config: RunConfig):
    """Execute one command; returns (payload dict, csv rows, grid dumps)."""
    from . import degrees as degrees_mod
    from . import green as green_mod
    from . import jordan as jordan_mod
    from . import mixing as mixing_mod

    prec = config.precision_bits
    results = {}
    table = []
    grids = {}
    with mp.workprec(prec):
        if config.command == "jordan":
            if config.model_type != "matrix":
                raise ValidationError("the jordan command runs on a plain matrix model")
            matrix = ExactMatrix([list(r) for r in config.model["matrix"]])
            info = jordan_mod.eigen_structure(matrix, prec)
            ops = jordan_mod.lambda_infinity(matrix, info, n_range=(20, config.n_max))
            results = {"jordan": info.to_dict(), "limits": ops.to_dict()}
            table = [["block", "eigenvalue", "size"]] + [
                [i, mp.nstr(ev, 20), size] for i, (ev, size) in enumerate(info.blocks)
            ]
        elif config.command == "degrees":
            action, _ = _build_action(config)
            profile = degrees_mod.dynamical_degrees(action, prec)
            conc = degrees_mod.check_concavity(profile)
            results = {"profile": profile.to_dict(), "concavity": conc.to_dict()}
            if "p" in config.params:
                seq = degrees_mod.degree_sequence(action, config.params["p"], (1, config.n_max), prec)
                results["sequence"] = seq.to_dict()
            table = [["p", "degree", "multiplicity", "sublattice"]] + [
                [p, mp.nstr(d, 30), m, flag]
                for p, (d, m, flag) in enumerate(
                    zip(profile.degrees, profile.multiplicities, profile.sublattice_flags)
                )
            ]
        elif config.command == "relative":
            action, _ = _build_action(config)
            s = config.params["s"]
            t_class = config.params.get("T_class", "dominant")
            lam_t = config.params.get("lambda_T", "auto")
            if t_class == "dominant" or lam_t == "auto":
                info = jordan_mod.eigen_structure(action.blocks[s], prec)
                _, averaged, _, _ = jordan_mod.limit_matrices(action.blocks[s], info)
                if t_class == "dominant":
                    ref = mp.matrix(degrees_mod._to_mp_vector(action.kahler_class[s]))
                    t_class = list(averaged * ref)
                if lam_t == "auto":
                    lam_t = info.spectral_radius
            rel = degrees_mod.relative_degrees(action, list(t_class), s, lam_t, prec,
                                               config.tolerances["eigen"])
            results = {"relative": rel.to_dict()}
            table = [["p", "relative_degree", "multiplicity"]] + [
                [p + 1, mp.nstr(v, 30), m]
                for p, (v, m) in enumerate(zip(rel.relative_degrees, rel.relative_multiplicities))
            ]
        elif config.command == "cesaro":
            action, _ = _build_action(config)
            s = config.params.get("s", 1)
            s_class = config.params.get("S_class", "kahler")
            if s_class == "kahler":
                if action.kahler_class[s] is None:
                    raise ValidationError(f"no reference class at degree {s}")
                s_class = action.kahler_class[s]
            ces = degrees_mod.cesaro_class_limit(action, list(s_class), s, config.N_max, prec)
            results = {"cesaro": ces.to_dict()}
            dev = ces.rate_report
            table = [["N", "deviation"]] + [
                [n, mp.nstr(d, 20)] for n, d in zip(dev.n_values, dev.deviations)
            ]
        elif config.command == "green":
            if config.model_type != "torus":
                raise ValidationError("the green command runs on torus models")
            from .models import TorusAutomorphism

            torus = TorusAutomorphism(config.model["k"], [list(r) for r in config.model["matrix"]])
            res = green_mod.green_limit_torus(
                torus,
                N_max=config.N_max,
                prec=prec,
                n_samples=config.params.get("samples", 8),
                sample_tolerance=config.params.get("sample_tolerance", 1e-3),
            )
            results = {"green": res.to_dict()}
            dev = res.rate_report
            table = [["n", "deviation"]] + [
                [n, mp.nstr(d, 20)] for n, d in zip(dev.n_values, dev.deviations)
            ]
        elif config.command == "iterate":
            p = config.params
            freq = p["u"]["frequency"]
            dim = config.grid["dim"]
            if len(freq) != dim:
                raise ValidationError(
                    f"frequency vector has length {len(freq)}, grid dimension is {dim}"
                )
            lam = ExactMatrix([list(r) for r in p["lambda"]])

            def u_fn(pts):
                import numpy as np

                phase = np.cos(2 * np.pi * (pts @ np.array(freq, dtype=float)))
                if lam.dim == 1:
                    return phase
                out = np.zeros((len(pts), lam.dim))
                out[:, -1] = phase
                return out

            setup = green_mod.IterationSetup(
                resolution=config.grid["resolution"],
                dim=dim,
                g=[list(r) for r in p["g"]],
                u=u_fn,
                nu=p["nu"],
                lam=lam,
                prec=prec,
            )
            res = green_mod.holder_iteration(setup, n_max=config.n_max, N_max=config.N_max,
                                             keep_sequences=False)
            lags = green_mod.dynamics_adapted_lags(config.grid["resolution"], setup.lipschitz)
            est = green_mod.holder_exponent_estimate(
                res.v[:, 0] if lam.dim > 1 else res.v[:, 0],
                resolution=config.grid["resolution"],
                dim=dim,
                lags=lags,
                admissible_bound=setup.admissible_exponent,
            )
            results = {"iterate": res.to_dict(), "holder": est.to_dict()}
            grids = {"v": res.v, "w": res.w}
            dev = res.twisted_report
            table = [["n", "twisted_deviation"]] + [
                [n, mp.nstr(d, 20)] for n, d in zip(dev.n_values, dev.deviations)
            ]
        elif config.command == "mixing":
            if config.model_type != "torus":
                raise ValidationError("the mixing command runs on torus models")
            from .models import TorusAutomorphism

            torus = TorusAutomorphism(config.model["k"], [list(r) for r in config.model["matrix"]])

            def _one_pair(pair):
                m1, m2 = pair
                if config.params.get("mode", "character") == "character":
                    return mixing_mod.haar_character_correlation(torus, m1, m2, (1, config.n_max))
                return mixing_mod.grid_correlation(
                    torus,
                    mixing_mod.TrigPolynomial.character(m1),
                    mixing_mod.TrigPolynomial.character(m2),
                    (1, config.n_max),
                    resolution=config.params.get("resolution", mixing_mod.DEFAULT_GRID),
                )

            workers = _thread_count()
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    reports = list(pool.map(_one_pair, config.params["pairs"]))
            else:
                reports = [_one_pair(p) for p in config.params["pairs"]]
            results = {"mixing": [r.to_dict() for r in reports]}
            table = [["pair", "n", "C_n"]]
            for idx, rep in enumerate(reports):
                for n, v in zip(rep.n_values, rep.values):
                    table.append([idx, n, str(v)])
        elif config.command == "chain":
            action, _ = _build_action(config)
            report = degrees_mod.degree_chain_check(action, prec)
            results = {"chain": report.to_dict()}
            table = [["s", "ratio"]] + [[s, mp.nstr(v, 25)] for s, v in report.ratios.items()]
        else:  # pragma: no cover
            raise ValidationError(f"unhandled command {config.command!r}")

    payload = {"config": config.resolved(), "results": results, "version": __version__}
    return payload, table, grids


def _write_output(payload, table, grids, config, override_path=None, override_format=None):
    fmt = override_format or config.output.get("format", "json")
    path = override_path or config.output.get("path")
    if fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(table)
        text = buf.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
        for name, arr in grids.items():
            import numpy as np

            stem = str(path).rsplit(".", 1)[0]
            if fmt == "json":  # binary dump next to the JSON report
                np.save(f"{stem}_{name}.npy", arr)
            else:
                np.savetxt(f"{stem}_{name}.csv", np.column_stack([arr.real, arr.imag]),
                           delimiter=",")
        with open(str(path) + ".log", "a") as fh:
            fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} wrote {path} ({fmt})\n")
    else:
        sys.stdout.write(text)
    return path


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kahlerdyn",
        description="Cohomological dynamics of Kähler automorphisms: degrees, "
        "Jordan structure, invariant-class limits, mixing checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--output", default=None, help="write results here instead of stdout")
        p.add_argument("--format", default=None, choices=("json", "csv"))
        p.add_argument("--precision", default=None, type=int, help="override precision_bits")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
        config = parse_config(text)
        if config.command != args.command:
            raise ValidationError(
                f"config requests command {config.command!r} but {args.command!r} was invoked"
            )
        if args.precision is not None:
            config.precision_bits = int(args.precision)
        payload, table, grids = run(config)
    except KahlerDynError as exc:
        record = {"error": {"code": exc.code, "message": str(exc)}}
        sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
        return 2 if isinstance(exc, (ParseError, ValidationError)) else 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": {"code": "IO", "message": str(exc)}}) + "\n")
        return 2

    _write_output(payload, table, grids, config, args.output, args.format)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
