"""Command-line front end.

One executable with subcommands: classify, sweep, energy, residual, flow,
perturb, mildness, certify, mesh-info, icosphere.  Every floating-point
value is printed with 17 significant digits so identical runs produce
byte-identical CSV/JSON outputs; each written output file gets a sibling
``<name>.manifest.json`` echoing the full invocation (the manifest carries
the wall-clock duration and is therefore the one file excluded from
byte-for-byte reproducibility).

Exit codes: 0 success, 2 validation failure, 3 missing input file,
4 numerical failure (diagnostic JSON on stdout).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import product

from . import __version__
from .curvature import SphereFitError, curvature_field, sphere_fit
from .energy import el_residual_field, energy_gradient, gradient_norm, helfrich_energy
from .flow import FlowConfig, TRACE_COLUMNS, convergence_diagnostics, face_quality, run_flow
from .mesh import MeshError, TriMesh, make_icosphere, measures
from .meshio import FileFormatError, read_mesh, write_mesh
from .params import ParameterSet, Tolerances, validate
from .spheres import boundedness_verdict, classify_spheres, sphere_energy_closed_form
from .stability import (
    CertificateGateError,
    MildnessVerdict,
    PerturbationSpec,
    mean_convexity_certificate,
    mildness_class,
    perturb_sphere,
)

_SWEEP_AXES = ("c0", "lambda", "p")


class MissingInputError(FileNotFoundError):
    pass


def _fmt_float(x: float) -> str:
    return "%.17g" % x


def _to_json(obj, indent: int = 0) -> str:
    """Serialize with %.17g floats; dict order is preserved as built."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(k))}: {_to_json(v, indent + 1)}" for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{inner}{_to_json(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def _emit(report: dict) -> None:
    sys.stdout.write(_to_json(report) + "\n")


def _params_from_args(args) -> ParameterSet:
    p = ParameterSet(kc=args.kc, kbar=args.kbar, c0=args.c0, lam=args.lam, p=args.p)
    msg = validate(p)
    if msg is not None:
        raise ValueError(msg)
    return p


def _tol_from_args(args) -> Tolerances:
    return Tolerances(
        geom_eps=args.geom_eps, root_eps=args.root_eps, grad_tol=args.grad_tol
    )


def _require_file(path: str) -> str:
    if not os.path.exists(path):
        raise MissingInputError(path)
    return path


def _worker_count(n_jobs: int) -> int:
    cap = os.environ.get("HELFRICH_LAB_THREADS")
    limit = os.cpu_count() or 1
    if cap is not None:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ValueError(f"HELFRICH_LAB_THREADS must be an integer, got {cap!r}")
    return max(1, min(limit, n_jobs))


def _add_param_flags(sp) -> None:
    sp.add_argument("--kc", type=float, default=1.0, help="bending rigidity (> 0)")
    sp.add_argument("--kbar", type=float, default=0.0, help="Gaussian rigidity")
    sp.add_argument("--c0", type=float, default=0.0, help="spontaneous curvature")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0, help="tension")
    sp.add_argument("--p", type=float, default=0.0, help="pressure")


def _add_tol_flags(sp) -> None:
    sp.add_argument("--geom-eps", type=float, default=1e-6)
    sp.add_argument("--root-eps", type=float, default=1e-9)
    sp.add_argument("--grad-tol", type=float, default=1e-4)


def _classification_report(params: ParameterSet, tol: Tolerances) -> dict:
    sol = classify_spheres(params, tol)
    return {
        "verdict": sol.verdict,
        "radii": list(sol.radii),
        "boundedness": boundedness_verdict(params),
        "xValue": sol.x_value,
        "literalTheoremAgrees": sol.literal_theorem_agrees,
        "energies": [sphere_energy_closed_form(r, params) for r in sol.radii],
    }


def cmd_classify(args) -> list[str]:
    params = _params_from_args(args)
    _emit(_classification_report(params, _tol_from_args(args)))
    return []


def _sweep_row(base: ParameterSet, point: dict, tol: Tolerances, a0) -> list[str]:
    params = ParameterSet(
        kc=base.kc,
        kbar=base.kbar,
        c0=point.get("c0", base.c0),
        lam=point.get("lambda", base.lam),
        p=point.get("p", base.p),
    )
    sol = classify_spheres(params, tol)
    radii = list(sol.radii) + [None, None]
    cells = [
        _fmt_float(params.c0),
        _fmt_float(params.lam),
        _fmt_float(params.p),
        sol.verdict,
        boundedness_verdict(params),
    ]
    for r in radii[:2]:
        cells.append("" if r is None else _fmt_float(r))
    for r in radii[:2]:
        cells.append("" if r is None else _fmt_float(sphere_energy_closed_form(r, params)))
    if a0 is not None:
        try:
            cert = mean_convexity_certificate(params, a0, tol)
            cells.append(cert.kind)
            cells.append("" if cert.h1_min is None else _fmt_float(cert.h1_min))
        except CertificateGateError:
            cells.extend(["Rejected", ""])
    return cells


def cmd_sweep(args) -> list[str]:
    with open(_require_file(args.grid)) as fh:
        try:
            grid = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed grid file {args.grid}: {exc}")
    if not isinstance(grid, dict) or not grid:
        raise ValueError("grid file must be a non-empty JSON object {axis: values}")
    for axis, values in grid.items():
        if axis not in _SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {axis!r}; valid: {_SWEEP_AXES}")
        if not isinstance(values, list) or not values:
            raise ValueError(f"axis {axis!r} must map to a non-empty list")
    base = _params_from_args(args)
    tol = _tol_from_args(args)
    axes = [a for a in _SWEEP_AXES if a in grid]
    points = [dict(zip(axes, combo)) for combo in product(*(grid[a] for a in axes))]

    header = ["c0", "lambda", "p", "verdict", "boundedness", "r1", "r2", "E1", "E2"]
    if args.a0 is not None:
        header += ["certificate", "h1Min"]
    with ThreadPoolExecutor(max_workers=_worker_count(len(points))) as pool:
        rows = list(pool.map(lambda pt: _sweep_row(base, pt, tol, args.a0), points))

    lines = [",".join(header)] + [",".join(row) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        return [args.out]
    sys.stdout.write(text)
    return []


def _load_mesh(path: str) -> TriMesh:
    return read_mesh(_require_file(path))


def cmd_energy(args) -> list[str]:
    params = _params_from_args(args)
    mesh = _load_mesh(args.mesh)
    br = helfrich_energy(mesh, params)
    grad = energy_gradient(mesh, params)
    report = {
        "breakdown": {
            "bending": br.bending,
            "area": br.area_term,
            "volume": br.volume_term,
            "topological": br.topological,
            "total": br.total,
        },
        "gradNorm": gradient_norm(mesh, grad),
    }
    _emit(report)
    return []


def cmd_residual(args) -> list[str]:
    params = _params_from_args(args)
    mesh = _load_mesh(args.mesh)
    resid = el_residual_field(mesh, params)
    grad = energy_gradient(mesh, params)
    _emit(
        {
            "residual": {"sup": resid.sup, "l2": resid.l2},
            "gradNorm": gradient_norm(mesh, grad),
        }
    )
    return []


def cmd_flow(args) -> list[str]:
    params = _params_from_args(args)
    mesh = _load_mesh(args.mesh)
    config = FlowConfig(
        max_steps=args.max_steps,
        initial_step=args.initial_step,
        grad_tol=args.grad_tol,
        remesh_every=args.remesh_every,
        seed=args.seed,
    )
    result = run_flow(mesh, params, config)
    written = []
    if args.out:
        write_mesh(result.mesh, args.out)
        written.append(args.out)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            tr = result.trace
            for i in range(len(tr["step"])):
                fh.write(
                    ",".join(
                        (str(int(tr["step"][i])) if c == "step" else _fmt_float(tr[c][i]))
                        for c in TRACE_COLUMNS
                    )
                    + "\n"
                )
        written.append(args.trace)
    report = {"termination": result.termination, "steps": result.steps}
    report.update(convergence_diagnostics(result, params, _tol_from_args(args)))
    _emit(report)
    return written


def _parse_mode(text: str) -> tuple[int, int, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--mode expects l,m,amplitude; got {text!r}")
    return int(parts[0]), int(parts[1]), float(parts[2])


def cmd_perturb(args) -> list[str]:
    modes = tuple(_parse_mode(m) for m in args.mode or ())
    spec = PerturbationSpec(modes=modes, radius=args.r, subdiv=args.subdiv)
    mesh = perturb_sphere(spec)
    write_mesh(mesh, args.out)
    spec_path = args.out + ".spec.json"
    with open(spec_path, "w") as fh:
        fh.write(
            _to_json(
                {
                    "radius": spec.radius,
                    "subdiv": spec.subdiv,
                    "modes": [
                        {"l": l, "m": m, "amplitude": a} for l, m, a in spec.modes
                    ],
                }
            )
            + "\n"
        )
    return [args.out, spec_path]


def cmd_mildness(args) -> list[str]:
    params = _params_from_args(args)
    mesh = _load_mesh(args.mesh)
    verdict: MildnessVerdict = mildness_class(mesh, params, args.a0, _tol_from_args(args))
    _emit(
        {
            "matchedClass": verdict.matched_class,
            "details": dict(verdict.details),
            "note": verdict.note,
        }
    )
    return []


def cmd_certify(args) -> list[str]:
    params = _params_from_args(args)
    if args.a0 is None:
        raise ValueError("certify requires --a0")
    cert = mean_convexity_certificate(params, args.a0, _tol_from_args(args))
    _emit(
        {
            "kind": cert.kind,
            "h1Min": cert.h1_min,
            "sAtMin": cert.s_at_min,
            "coefficients": [list(row) for row in cert.coefficients],
        }
    )
    return []


def cmd_mesh_info(args) -> list[str]:
    mesh = _load_mesh(args.mesh)
    m = measures(mesh)
    fv = curvature_field(mesh)
    try:
        fit = sphere_fit(mesh)
        fit_part = {"radius": fit.radius, "rms": fit.rms}
    except SphereFitError:
        fit_part = None
    _emit(
        {
            "vertices": mesh.n_vertices,
            "faces": mesh.n_faces,
            "edges": mesh.n_edges,
            "chi": m.chi,
            "area": m.area,
            "volume": m.volume,
            "minFaceQuality": float(face_quality(mesh.vertices, mesh.faces).min()),
            "maxAo2": fv.max_ao2,
            "sphereFit": fit_part,
        }
    )
    return []


def cmd_icosphere(args) -> list[str]:
    mesh = make_icosphere(args.subdiv, radius=args.r)
    write_mesh(mesh, args.out)
    return [args.out]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helfrich-lab",
        description="Spherical-solution classification, discrete bending energy, "
        "gradient flow and stability certificates for the Helfrich model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")

    def add(name, handler, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(handler=handler)
        return sp

    sp = add("classify", cmd_classify, help="classify spherical solutions for one parameter set")
    _add_param_flags(sp)
    _add_tol_flags(sp)

    sp = add("sweep", cmd_sweep, help="classification sweep over a parameter grid")
    _add_param_flags(sp)
    _add_tol_flags(sp)
    sp.add_argument("--grid", required=True, help="JSON file {axis: values} over c0/lambda/p")
    sp.add_argument("--a0", type=float, default=None, help="add certificate columns")
    sp.add_argument("--out", default=None, help="CSV path (default: stdout)")

    sp = add("energy", cmd_energy, help="energy breakdown of a mesh")
    _add_param_flags(sp)
    _add_tol_flags(sp)
    sp.add_argument("--mesh", required=True)

    sp = add("residual", cmd_residual, help="Euler-Lagrange residual norms of a mesh")
    _add_param_flags(sp)
    _add_tol_flags(sp)
    sp.add_argument("--mesh", required=True)

    sp = add("flow", cmd_flow, help="gradient-descent flow from a mesh")
    _add_param_flags(sp)
    _add_tol_flags(sp)
    sp.add_argument("--mesh", required=True)
    sp.add_argument("--out", default=None, help="final mesh path (OBJ/PLY)")
    sp.add_argument("--trace", default=None, help="per-step CSV trace path")
    sp.add_argument("--max-steps", type=int, default=2000)
    sp.add_argument("--initial-step", type=float, default=1e-3)
    sp.add_argument("--remesh-every", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("perturb", cmd_perturb, help="spherical-harmonic perturbed sphere mesh")
    sp.add_argument("--r", type=float, default=1.0, help="base radius")
    sp.add_argument("--subdiv", type=int, default=4)
    sp.add_argument(
        "--mode", action="append", default=None, metavar="L,M,AMP", help="repeatable"
    )
    sp.add_argument("--out", required=True)

    sp = add("mildness", cmd_mildness, help="mildness class of a mesh/parameter pair")
    _add_param_flags(sp)
    _add_tol_flags(sp)
    sp.add_argument("--mesh", required=True)
    sp.add_argument("--a0", type=float, default=None)

    sp = add("certify", cmd_certify, help="mean-convexity certificate")
    _add_param_flags(sp)
    _add_tol_flags(sp)
    sp.add_argument("--a0", type=float, default=None)

    sp = add("mesh-info", cmd_mesh_info, help="validation summary of a mesh file")
    sp.add_argument("--mesh", required=True)

    sp = add("icosphere", cmd_icosphere, help="write a subdivided icosphere")
    sp.add_argument("--subdiv", type=int, default=4)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--out", required=True)

    return parser


def _write_manifest(path: str, args, written: list[str], duration: float) -> None:
    skip = {"handler", "subcommand"}
    echo = {}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        name = "lambda" if key == "lam" else key
        echo[name] = getattr(args, key)
    manifest = {
        "subcommand": args.subcommand,
        "version": __version__,
        "seed": getattr(args, "seed", 0),
        "parameters": echo,
        "inputs": [
            getattr(args, k) for k in ("mesh", "grid") if getattr(args, k, None)
        ],
        "outputs": list(written),
        "durationSeconds": duration,
    }
    with open(path + ".manifest.json", "w") as fh:
        fh.write(_to_json(manifest) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "handler", None):
        parser.print_help()
        return 2
    start = time.monotonic()
    try:
        written = args.handler(args)
    except MissingInputError as exc:
        sys.stderr.write(f"error: input file not found: {exc}\n")
        return 3
    except (ValueError, MeshError, FileFormatError) as exc:
        # Includes parameter validation, gate rejections and malformed inputs.
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (SphereFitError, ArithmeticError, RuntimeError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return 4
    duration = time.monotonic() - start
    for path in written:
        _write_manifest(path, args, written, duration)
    return 0


if __name__ == "__main__":
    sys.exit(main())
