"""Command-line interface and experiment orchestration.

Configurations are JSON documents validated against :data:`CONFIG_SCHEMA`.
Every run produces a :class:`ResultBundle` that can be emitted as json,
csv or plot data.  Exit codes::

    0  all consistency checks passed
    2  indices computed but inconsistent (or truncation not converged)
    3  regularity refusal (energy not in a gap, degenerate crossing, ...)
    4  configuration error

The environment variable ``BULKEDGE_THREADS`` (default 1) sets the number
of BLAS threads and of worker threads used for energy scans.  One BLAS
thread keeps reductions in a fixed order, which makes emitted files
byte-identical across runs.
"""
from __future__ import annotations

import os

_THREADS = os.environ.get("BULKEDGE_THREADS", "1")
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, _THREADS)

import argparse  # noqa: E402
import csv  # noqa: E402
import io  # noqa: E402
import json  # noqa: E402
import math  # noqa: E402
import sys  # noqa: E402
from concurrent.futures import ThreadPoolExecutor  # noqa: E402
from dataclasses import dataclass, field, fields  # noqa: E402

import jsonschema  # noqa: E402
import numpy as np  # noqa: E402
import scipy  # noqa: E402
import scipy.linalg as la  # noqa: E402

from . import __version__  # noqa: E402
from . import potentials as pots  # noqa: E402
from .edgeop import (default_length, default_points, edge_family,  # noqa: E402
                     junction_family, smooth_switch, spectral_flow, step_switch,
                     track_branches)
from .errors import (BulkEdgeError, ConfigError, DiscretizationError,  # noqa: E402
                     IndexInconsistencyError, TruncationError)
from .indices import (FlowSettings, IndexValue, PlaneLoop, index_I,  # noqa: E402
                      maslov_index, unitary_spectral_flow, verify_junction_theorem,
                      verify_main_theorem)
from .propagate import classify_energy, ell_plus  # noqa: E402
from .symplectic import (check_unitary, dirichlet_plane, neumann_plane,  # noqa: E402
                         robin_plane)
from .tolerances import DEFAULT_TOLERANCES, Tolerances  # noqa: E402
from .tube import (TubePotentialFamily, fourier_truncate, tube_cosine,  # noqa: E402
                   tube_edge_flows, tube_flat, tube_junction_flow)

__all__ = ["CONFIG_SCHEMA", "ResultBundle", "load_config", "validate_config",
           "run", "emit", "parse_bundle", "main", "EXIT_OK", "EXIT_INCONSISTENT",
           "EXIT_NONREGULAR", "EXIT_CONFIG"]

EXIT_OK, EXIT_INCONSISTENT, EXIT_NONREGULAR, EXIT_CONFIG = 0, 2, 3, 4

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_chan = {"type": "integer", "minimum": 1, "maximum": 64}


def _obj(kind, props, required=()):
    return {"type": "object", "additionalProperties": False,
            "required": ["type", *required],
            "properties": {"type": {"const": kind}, **props}}


_POTENTIAL = {"oneOf": [
    _obj("flat", {"value": _num, "n": _chan, "period": _pos}),
    _obj("mathieu", {"amplitude": _num, "period": _pos, "phase": _num}),
    _obj("dislocation", {"base": {"$ref": "#/$defs/potential"},
                         "rate": {"type": "integer"}}, ["base"]),
    _obj("square_well", {"depth": _num, "half_width": _pos, "n": _chan,
                         "outside": _num}, ["depth", "half_width"]),
    _obj("tabulated", {"values": {"type": "array", "minItems": 2,
                                  "items": {"anyOf": [_num, {"type": "array", "items": _num}]}},
                       "period": _pos}, ["values"]),
    _obj("block_diagonal", {"blocks": {"type": "array", "minItems": 1,
                                       "items": {"$ref": "#/$defs/potential"}}},
         ["blocks"]),
    _obj("tube_cosine", {"amplitude_x": _num, "amplitude_y": _num,
                         "rate": {"type": "integer"}}),
    _obj("tube_flat", {"value": _num}),
]}

_MATRIX = {"type": "array", "items": {"type": "array", "items": _num}}

_BOUNDARY = {"oneOf": [
    _obj("dirichlet", {}),
    _obj("neumann", {}),
    _obj("robin_loop", {"reverse": {"type": "boolean"}}),
    _obj("winding_loop", {"windings": {"type": "array", "minItems": 1,
                                       "items": {"type": "integer"}}}, ["windings"]),
    _obj("unitary_loop", {"samples": {"type": "array", "minItems": 2, "items": {
        "type": "object", "additionalProperties": False, "required": ["re"],
        "properties": {"re": _MATRIX, "im": _MATRIX}}}}, ["samples"]),
]}

_SWITCH = {"oneOf": [
    _obj("step", {"name": {"type": "string"}}),
    _obj("smooth", {"width": _pos, "name": {"type": "string"}}),
]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "bulkedge experiment",
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "$defs": {"potential": _POTENTIAL},
    "properties": {
        "experiment": {"enum": ["probe", "indices", "edge", "junction",
                                "tube_edge", "tube_junction"]},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "potential": {"$ref": "#/$defs/potential"},
        "left_potential": {"$ref": "#/$defs/potential"},
        "right_potential": {"$ref": "#/$defs/potential"},
        "boundary": _BOUNDARY,
        "boundaries": {"type": "array", "minItems": 1, "uniqueItems": True,
                       "items": {"enum": ["dirichlet", "neumann"]}},
        "energy": _num,
        "energies": {"type": "array", "minItems": 1, "items": _num},
        "t_grid": {"type": "integer", "minimum": 4, "maximum": 4096},
        "probe_grid": {"type": "integer", "minimum": 1, "maximum": 1024},
        "L": _pos,
        "N": {"type": "integer", "minimum": 10, "maximum": 10_000_000},
        "K": {"type": "integer", "minimum": 0, "maximum": 8},
        "window": _pos,
        "switches": {"type": "array", "minItems": 1, "items": _SWITCH},
        "control": {"type": "boolean"},
        "tolerances": {"type": "object", "additionalProperties": False,
                       "properties": {f.name: _pos for f in fields(Tolerances)}},
        "seed": {"type": "integer", "minimum": 0},
    },
}

_NEEDS = {
    "probe": [("energy", "energies")],
    "indices": [("boundary",)],
    "edge": [("potential",), ("boundary",), ("energy",)],
    "junction": [("left_potential",), ("right_potential",), ("energy",)],
    "tube_edge": [("potential",), ("energy",), ("K",)],
    "tube_junction": [("left_potential",), ("right_potential",), ("energy",), ("K",)],
}


def validate_config(config):
    """Schema check plus per-experiment required keys; raises ConfigError."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {path}: {exc.message}") from None
    exp = config["experiment"]
    for alternatives in _NEEDS[exp]:
        if not any(k in config for k in alternatives):
            raise ConfigError(f"experiment '{exp}' needs '{' or '.join(alternatives)}'")
    if exp == "probe" and not any(k in config for k in
                                  ("potential", "left_potential", "right_potential")):
        raise ConfigError("experiment 'probe' needs a potential")
    return config


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return validate_config(config)


def build_potential(spec):
    kind = spec["type"]
    if kind == "flat":
        return pots.flat(spec.get("value", 0.0), spec.get("n", 1), spec.get("period", 1.0))
    if kind == "mathieu":
        return pots.mathieu(spec.get("amplitude", 2.0), spec.get("period", 1.0),
                            spec.get("phase", 0.0))
    if kind == "dislocation":
        return pots.dislocation(build_potential(spec["base"]), spec.get("rate", 1))
    if kind == "square_well":
        return pots.square_well(spec["depth"], spec["half_width"], spec.get("n", 1),
                                spec.get("outside", 0.0))
    if kind == "tabulated":
        return pots.tabulated(spec["values"], spec.get("period", 1.0))
    if kind == "block_diagonal":
        return pots.block_diagonal(*[build_potential(b) for b in spec["blocks"]])
    if kind == "tube_cosine":
        return tube_cosine(spec.get("amplitude_x", 2.0), spec.get("amplitude_y", 1.0),
                           spec.get("rate", 1))
    if kind == "tube_flat":
        return tube_flat(spec.get("value", 0.0))
    raise ConfigError(f"unknown potential type {kind!r}")


def _unitary_interpolator(samples):
    """Piecewise geodesic interpolation of unitary samples at t = k / M."""
    Us = [check_unitary(np.asarray(s["re"], float) + 1j * np.asarray(s.get("im", 0.0)))
          for s in samples]
    M = len(Us)
    steps = []
    for k in range(M):
        T, Z = la.schur(Us[k].conj().T @ Us[(k + 1) % M], output="complex")
        steps.append((Z, np.angle(np.diag(T))))

    def U(t):
        s = (t % 1.0) * M
        k = int(math.floor(s)) % M
        Z, th = steps[k]
        return Us[k] @ (Z * np.exp(1j * (s - math.floor(s)) * th)) @ Z.conj().T

    return U


def build_boundary(spec, n):
    kind = spec["type"]
    if kind == "dirichlet":
        return PlaneLoop.constant_loop(dirichlet_plane(n), "dirichlet")
    if kind == "neumann":
        return PlaneLoop.constant_loop(neumann_plane(n), "neumann")
    if kind == "robin_loop":
        sgn = -1.0 if spec.get("reverse") else 1.0
        eye = np.eye(n)
        return PlaneLoop(lambda t: robin_plane(np.sin(sgn * np.pi * t) * eye,
                                               np.cos(sgn * np.pi * t) * eye),
                         name="robin_loop")
    if kind == "winding_loop":
        k = np.asarray(spec["windings"])
        if k.size != n:
            raise ConfigError(f"winding_loop needs {n} windings, got {k.size}")
        return PlaneLoop.from_unitaries(lambda t: np.diag(np.exp(2j * np.pi * k * t)),
                                        name="winding_loop")
    if kind == "unitary_loop":
        U = _unitary_interpolator(spec["samples"])
        if U(0.0).shape != (n, n):
            raise ConfigError(f"unitary samples must be {n} x {n}")
        return PlaneLoop.from_unitaries(U, name="unitary_loop")
    raise ConfigError(f"unknown boundary type {kind!r}")


def build_switches(specs):
    out = {}
    for i, s in enumerate(specs or [{"type": "step"}, {"type": "smooth"}]):
        name = s.get("name", s["type"] if s["type"] == "step" else
                     f"smooth({s.get('width', 2.0):g})")
        if name in out:
            name = f"{name}#{i}"
        out[name] = step_switch if s["type"] == "step" else smooth_switch(s.get("width", 2.0))
    return out


def _settings(config):
    return FlowSettings(L=config.get("L"), N=config.get("N"),
                        window=config.get("window", 0.5),
                        t_grid=config.get("t_grid", 64),
                        probe_grid=config.get("probe_grid", 16))


def _tolerances(config):
    try:
        return DEFAULT_TOLERANCES.updated(**config.get("tolerances", {}))
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return obj


@dataclass
class ResultBundle:
    """Everything a run produced, in plain serializable form."""

    command: str
    experiment: str
    passed: bool
    values: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    branches: dict = field(default_factory=dict)
    phase_traces: dict = field(default_factory=dict)
    probes: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable({f.name: getattr(self, f.name) for f in fields(self)})

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown bundle fields {sorted(unknown)}")
        return cls(**data)

    def add_value(self, name, value, residual=0.0, raw=None):
        self.values[name] = {"value": int(value), "residual": float(residual),
                             "raw": float(value if raw is None else raw)}

    def add_index(self, name, iv: IndexValue):
        self.add_value(name, iv.value, iv.residual, iv.raw)
        trace = iv.phase_trace()
        if trace is not None:
            self.phase_traces[name] = {"t": trace[0], "phase": trace[1]}

    def add_flow(self, name, flow):
        self.add_value(name, flow.flow, flow.residual)
        self.branches[name] = [{"t": t, "lambda": lam} for t, lam in flow.curves]


def _metadata(config, tol):
    return {"config": config, "tolerances": tol.to_dict(),
            "seed": config.get("seed", 0),
            "versions": {"bulkedge": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__},
            "threads": int(_THREADS)}


def _family_for(config, key, K):
    V = build_potential(config[key])
    if isinstance(V, TubePotentialFamily):
        if K is None:
            raise ConfigError("tube potentials need a truncation K")
        return fourier_truncate(V, K).family
    return V


def _probe(config, tol, bundle):
    energies = config.get("energies", [config.get("energy")])
    fams = {k: _family_for(config, k, config.get("K"))
            for k in ("potential", "left_potential", "right_potential") if k in config}
    items = [(name, V, E) for name, V in fams.items() for E in energies]
    grid = config.get("probe_grid", 16)
    with ThreadPoolExecutor(max_workers=max(1, int(_THREADS))) as pool:
        res = list(pool.map(lambda it: classify_energy(it[1], it[2], grid, tol), items))
    for (name, _, _), probe in zip(items, res):
        bundle.probes.append({"family": name, **probe.to_dict()})
    bundle.passed = True


def _indices(config, tol, bundle):
    n = _family_for(config, "potential", config.get("K")).n if "potential" in config else 1
    loop = build_boundary(config["boundary"], n)
    iv = index_I(loop, tol, return_details=True)
    bundle.add_index("I_boundary", iv)
    bundle.add_value("unitary_flow_through_1",
                     unitary_spectral_flow(loop, 1.0))
    if "potential" in config and "energy" in config:
        V = _family_for(config, "potential", config.get("K"))
        E = config["energy"]
        lp = PlaneLoop(lambda t: ell_plus(V, t, E, tol=tol), tol=tol, name="ell_plus")
        ip = index_I(lp, tol, return_details=True)
        mas = maslov_index(lp, loop, tol, return_details=True)
        bundle.add_index("I_plus", ip)
        bundle.add_value("maslov", mas.value)
        bundle.add_value("index_difference", ip.value - iv.value)
        bundle.reports["maslov"] = mas.to_dict()
        if mas.value != ip.value - iv.value:
            raise IndexInconsistencyError(
                f"Mas = {mas.value} but I(l+) - I(l#) = {ip.value - iv.value}")
    bundle.reports["I_boundary"] = iv.to_dict()
    bundle.passed = True


def _flow(config, tol, bundle):
    exp = config["experiment"]
    s = _settings(config)
    E = config["energy"]
    K = config.get("K")
    if exp in ("edge", "tube_edge"):
        V = _family_for(config, "potential", K)
        L = s.L or default_length(V, E)
        N = s.N or default_points(V, E, L)
        names = ([config["boundary"]["type"]] if "boundary" in config
                 else config.get("boundaries", ["dirichlet"]))
        for b in names:
            spec = config["boundary"] if "boundary" in config else {"type": b}
            loop = build_boundary(spec, V.n)
            br = track_branches(edge_family(V, loop, L, N, tol), E, s.window, s.t_grid, tol)
            fl = spectral_flow(br, E, tol)
            fl.provenance.update({"L": L, "N": N})
            bundle.add_flow(f"spectral_flow[{b}]", fl)
            bundle.reports[f"flow[{b}]"] = fl.to_dict()
    else:
        V_L = _family_for(config, "left_potential", K)
        V_R = _family_for(config, "right_potential", K)
        L = s.L or max(default_length(V_R, E), default_length(V_L, E))
        N = s.N or max(default_points(V_R, E, L), default_points(V_L, E, L))
        for name, chi in build_switches(config.get("switches")).items():
            br = track_branches(junction_family(V_L, V_R, chi, L, N, tol), E,
                                s.window, s.t_grid, tol)
            fl = spectral_flow(br, E, tol)
            fl.provenance.update({"L": L, "N": N, "switch": name})
            bundle.add_flow(f"spectral_flow[{name}]", fl)
            bundle.reports[f"flow[{name}]"] = fl.to_dict()
    bundle.passed = True


def _collect_report(bundle, prefix, rep):
    for k, v in rep.values.items():
        bundle.add_value(f"{prefix}{k}", v)
    for name, fl in rep.flows.items():
        bundle.branches[f"{prefix}{name}"] = [{"t": t, "lambda": lam}
                                              for t, lam in fl.curves]
    for name, iv in rep.indices.items():
        trace = iv.phase_trace()
        if trace is not None:
            bundle.phase_traces[f"{prefix}{name}"] = {"t": trace[0], "phase": trace[1]}
    bundle.reports[prefix.rstrip(":") or rep.kind] = rep.to_dict()


def _verify(config, tol, bundle):
    exp = config["experiment"]
    s = _settings(config)
    E = config["energy"]
    if exp == "edge":
        V = build_potential(config["potential"])
        rep = verify_main_theorem(V, build_boundary(config["boundary"], V.n), E, s, tol)
        _collect_report(bundle, "", rep)
        bundle.passed = rep.passed
    elif exp == "junction":
        V_L = build_potential(config["left_potential"])
        V_R = build_potential(config["right_potential"])
        rep = verify_junction_theorem(V_L, V_R, build_switches(config.get("switches")),
                                      E, s, tol, control=config.get("control", True))
        _collect_report(bundle, "", rep)
        bundle.passed = rep.passed
    elif exp == "tube_edge":
        V = build_potential(config["potential"])
        trep = tube_edge_flows(V, E, config["K"],
                               tuple(config.get("boundaries", ["dirichlet", "neumann"])),
                               s, tol)
        for k, reps in trep.reports.items():
            for b, rep in reps.items():
                _collect_report(bundle, f"K={k}:{b}:", rep)
        bundle.reports["tube"] = {"stable": trep.stable, "message": trep.message,
                                  "values": trep.values}
        bundle.passed = trep.passed
        if not trep.stable:
            raise TruncationError(trep.message)
    elif exp == "tube_junction":
        V_L = build_potential(config["left_potential"])
        V_R = build_potential(config["right_potential"])
        trep = tube_junction_flow(V_L, V_R, build_switches(config.get("switches")),
                                  E, config["K"], s, tol)
        for k, reps in trep.reports.items():
            _collect_report(bundle, f"K={k}:", reps["junction"])
        bundle.reports["tube"] = {"stable": trep.stable, "message": trep.message,
                                  "values": trep.values}
        bundle.passed = trep.passed
        if not trep.stable:
            raise TruncationError(trep.message)
    else:
        raise ConfigError(f"'verify' does not apply to experiment '{exp}'")


_COMMANDS = {"probe": _probe, "indices": _indices, "flow": _flow, "verify": _verify}
_DEFAULT_COMMAND = {"probe": "probe", "indices": "indices"}


def run(config, command=None):
    """Validate ``config`` and run it; returns a ResultBundle.

    ``command`` is one of probe, indices, flow, verify; by default probe
    and indices experiments run their namesake and the rest run verify.
    Module errors propagate unchanged.
    """
    config = validate_config(config)
    tol = _tolerances(config)
    command = command or _DEFAULT_COMMAND.get(config["experiment"], "verify")
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    if command == "flow" and config["experiment"] in ("probe", "indices"):
        raise ConfigError(f"'flow' does not apply to experiment '{config['experiment']}'")
    bundle = ResultBundle(command, config["experiment"], False,
                          metadata=_metadata(config, tol))
    np.random.seed(config.get("seed", 0))
    _COMMANDS[command](config, tol, bundle)
    return bundle


def _fmt(x):
    return repr(float(x))


def emit(bundle, fmt="json", out=None):
    """Serialize a bundle; writes to ``out`` (path or file) or returns text."""
    if fmt == "json":
        text = json.dumps(bundle.to_dict(), indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "t", "branch", "lambda"])
        for series in sorted(bundle.branches):
            for j, curve in enumerate(bundle.branches[series]):
                for t, lam in zip(curve["t"], curve["lambda"]):
                    w.writerow([series, _fmt(t), j, _fmt(lam)])
        if bundle.values:
            buf.write("\n# index summary\n")
            w.writerow(["index", "value", "residual"])
            for name in sorted(bundle.values):
                v = bundle.values[name]
                w.writerow([name, v["value"], _fmt(v["residual"])])
        text = buf.getvalue()
    elif fmt == "plotdata":
        lines = []
        for series in sorted(bundle.branches):
            for j, curve in enumerate(bundle.branches[series]):
                lines += [f"# branch {series} {j}", "# t lambda"]
                lines += [f"{_fmt(t)} {_fmt(lam)}" for t, lam in zip(curve["t"], curve["lambda"])]
                lines += ["", ""]
        for series in sorted(bundle.phase_traces):
            tr = bundle.phase_traces[series]
            lines += [f"# phase {series}", "# t arg_det_U"]
            lines += [f"{_fmt(t)} {_fmt(p)}" for t, p in zip(tr["t"], tr["phase"])]
            lines += ["", ""]
        text = "\n".join(lines) + ("\n" if lines else "")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is None:
        return text
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def parse_bundle(text):
    """Inverse of emit(..., 'json')."""
    return ResultBundle.from_dict(json.loads(text))


def _parser():
    p = argparse.ArgumentParser(
        prog="bulkedge",
        description="Edge spectral flow, Maslov indices and winding numbers for "
                    "periodic families of Hill and tube operators.",
        epilog="Environment: BULKEDGE_THREADS sets BLAS and worker threads (default 1).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"probe": "classify energies (gap / essential spectrum / undecided)",
             "indices": "I, Maslov and winding indices of boundary loops",
             "flow": "edge or junction spectral flow",
             "verify": "bulk-edge consistency suites"}
    for name, h in helps.items():
        sp = sub.add_parser(name, help=h, description=h)
        sp.add_argument("config", help="JSON experiment configuration")
        sp.add_argument("--format", choices=["json", "csv", "plotdata"], default="json",
                        help="output format (default json)")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config)
        bundle = run(config, args.command)
    except (ConfigError, DiscretizationError) as exc:
        _report_error(exc)
        return EXIT_CONFIG
    except (IndexInconsistencyError, TruncationError) as exc:
        _report_error(exc)
        return EXIT_INCONSISTENT
    except BulkEdgeError as exc:
        _report_error(exc)
        return EXIT_NONREGULAR
    try:
        emit(bundle, args.format, args.out if args.out else sys.stdout)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if bundle.passed else EXIT_INCONSISTENT


def _report_error(exc):
    print(f"error: {exc}", file=sys.stderr)
    hint = getattr(exc, "hint", None)
    if hint:
        print(f"hint: {hint}", file=sys.stderr)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
