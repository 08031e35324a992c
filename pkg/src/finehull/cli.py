"""Command-line front door: configuration, artifacts, reproduction.

Every subcommand resolves its settings from built-in defaults, then the
--config JSON file, then FINEHULL_* environment variables, then explicit
flags, and writes its artifacts plus a manifest with content hashes.
All algorithms are deterministic; reruns with the same effective config
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import blaschke as bl
from . import hull as hl
from . import potential as pt
from . import product as pr
from .cantor import (CRule, build_cantor_spec, cantor_length, condition_sum,
                     spec_from_json, spec_to_json, sum_gap_lengths)
from .errors import PreconditionFailure, UnsupportedShape

__all__ = ["main"]

ENV_PREFIX = "FINEHULL_"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, obj) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(outdir: str, command: str, cfg: dict,
                    names: list[str]) -> None:
    # output location and thread count must never change artifact bytes;
    # file-valued inputs are recorded by content, not by location
    cfg = {k: v for k, v in cfg.items() if k not in ("out", "threads")}
    for k in ("spec", "set"):
        if isinstance(cfg.get(k), str) and os.path.exists(cfg[k]):
            cfg[k] = {"sha256": _sha256(cfg[k])}
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    manifest = {
        "command": command,
        "config": cfg,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "outputs": {n: _sha256(os.path.join(outdir, n)) for n in names},
    }
    _write_json(os.path.join(outdir, "manifest.json"), manifest)


def _parse_point(v) -> complex:
    if isinstance(v, complex):
        return v
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)):
        parts = [float(x) for x in v]
    else:
        try:
            parts = [float(x) for x in str(v).split(",")]
        except ValueError as e:
            raise PreconditionFailure(f"cannot parse point {v!r}",
                                      field="at") from e
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) != 2:
        raise PreconditionFailure(f"point needs re,im, got {v!r}", field="at")
    return complex(parts[0], parts[1])


def _parse_floats(v, count: int, field: str) -> tuple:
    if isinstance(v, (list, tuple)):
        parts = [float(x) for x in v]
    else:
        try:
            parts = [float(x) for x in str(v).split(",")]
        except ValueError as e:
            raise PreconditionFailure(f"cannot parse {field} {v!r}",
                                      field=field) from e
    if len(parts) != count:
        raise PreconditionFailure(f"{field} needs {count} numbers",
                                  field=field)
    return tuple(parts)


def _coerce(value, kind):
    if kind is bool:
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    if value is None:
        return None
    return kind(value)


# (name, type, default, help); type None keeps raw strings/objects
_COMMON = [
    ("out", str, "out", "output directory"),
    ("threads", int, 1, "worker budget, never affects output"),
]

_PARAMS = {
    "spec-build": [
        ("a0", float, 0.0, "left endpoint of the root interval"),
        ("b0", float, 1.0, "right endpoint of the root interval"),
        ("rule", str, "affine", "gap exponent rule: affine|factorial|explicit"),
        ("slope", float, 5.0, "affine rule slope"),
        ("offset", float, 0.0, "affine rule offset"),
        ("shift", int, 2, "factorial rule shift"),
        ("values", None, None, "explicit rule values v1,v2,..."),
        ("depth", int, 8, "number of gaps to materialize"),
        ("placement", str, "bisect", "gap placement strategy"),
    ],
    "eval": [
        ("spec", None, None, "path to a gap spec JSON"),
        ("at", None, None, "evaluation point re,im"),
        ("depth", int, None, "partial-product depth (default: adaptive)"),
        ("tol", float, 1e-12, "target truncation error for adaptive depth"),
        ("branch", str, "product",
         "what to evaluate: product|d-plus|h-plus|fine"),
    ],
    "capacity": [
        ("set", None, None, "path to a set JSON (shapes or fine-set query)"),
    ],
    "green": [
        ("set", None, None, "path to a set JSON with shapes"),
        ("at", None, None, "evaluation point re,im"),
        ("n", int, 64, "number of greedy points"),
        ("mesh", int, None, "boundary mesh size per shape"),
    ],
    "sample-e": [
        ("spec", None, None, "path to a gap spec JSON"),
        ("depth", int, None, "condition depth N"),
        ("samples", int, 32, "number of candidates"),
        ("leja_n", int, 64, "points per capacity model"),
    ],
    "hull-scan": [
        ("spec", None, None, "path to a gap spec JSON"),
        ("z", None, None, "base point re,im"),
        ("wrect", None, None, "fiber window x0,x1,y0,y1"),
        ("res", int, 128, "grid resolution per axis"),
        ("sq", bool, False, "scan the square-root graph"),
        ("depth", int, 8, "number of potential terms M"),
        ("scheme", str, "flat_head", "weight scheme: flat_head|quadratic"),
        ("delta", float, 20.0, "certified dip depth threshold"),
    ],
    "blaschke": [
        ("spec", None, None, "path to a disk spec JSON"),
        ("at", None, None, "evaluation point re,im"),
        ("depth", int, None, "partial-product depth (default: all)"),
        ("sheets", None, None, "sheet range k0,k1 (needs --at)"),
        ("sample_depth", int, None, "arc sample condition depth N"),
        ("samples", int, 16, "number of arc candidates"),
        ("leja_n", int, 64, "points per capacity model"),
    ],
    "reproduce-all": [],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finehull",
        description="Gap products, capacity chains, and fiber scans.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, params in _PARAMS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None,
                       help="JSON file with defaults for any flag")
        for name, kind, _default, help_text in params + _COMMON:
            flag = "--" + name.replace("_", "-")
            if kind is bool:
                p.add_argument(flag, dest=name, action="store_const",
                               const=True, default=None, help=help_text)
            else:
                p.add_argument(flag, dest=name, default=None, help=help_text)
    return parser


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """Defaults < config file < environment < explicit flags."""
    params = _PARAMS[command] + _COMMON
    cfg = {name: default for name, _, default, _ in params}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except OSError as e:
            raise PreconditionFailure(f"cannot read config: {e}",
                                      field="config") from e
        except json.JSONDecodeError as e:
            raise PreconditionFailure(f"invalid config JSON: {e}",
                                      field="config") from e
        for key, value in file_cfg.items():
            if key not in cfg:
                raise PreconditionFailure(f"unknown config key {key!r}",
                                          field=key)
            cfg[key] = value
    for name, _, _, _ in params:
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is not None:
            cfg[name] = env
    for name, _, _, _ in params:
        given = getattr(args, name)
        if given is not None:
            cfg[name] = given
    for name, kind, _, _ in params:
        if kind is not None:
            cfg[name] = _coerce(cfg[name], kind)
    return cfg


def _require(cfg: dict, key: str):
    if cfg.get(key) is None:
        raise PreconditionFailure(f"missing required setting {key!r}",
                                  field=key)
    return cfg[key]


def _load_cantor(cfg: dict):
    path = _require(cfg, "spec")
    try:
        with open(path) as fh:
            return spec_from_json(fh.read())
    except OSError as e:
        raise PreconditionFailure(f"cannot read spec: {e}",
                                  field="spec") from e


def _rule_from_cfg(cfg: dict) -> CRule:
    rule = cfg["rule"]
    if rule == "affine":
        return CRule("affine", slope=cfg["slope"], offset=cfg["offset"])
    if rule == "factorial":
        return CRule("factorial", shift=cfg["shift"])
    if rule == "explicit":
        raw = _require(cfg, "values")
        vals = raw if isinstance(raw, (list, tuple)) else str(raw).split(",")
        return CRule("explicit", values=tuple(float(v) for v in vals))
    raise PreconditionFailure(f"unknown rule {rule!r}", field="rule")


def _shapes_from_obj(obj, field: str = "shapes") -> tuple:
    shapes = []
    for i, s in enumerate(obj):
        kind = s.get("kind")
        where = f"{field}[{i}]"
        if kind == "interval":
            shapes.append(pt.interval(float(s["a"]), float(s["b"])))
        elif kind == "disk":
            c = s["center"]
            center = complex(float(c[0]), float(c[1])) \
                if isinstance(c, (list, tuple)) else complex(float(c), 0.0)
            if "log_radius" in s:
                shapes.append(pt.disk(center,
                                      log_radius=float(s["log_radius"])))
            else:
                shapes.append(pt.disk(center, float(s["radius"])))
        elif kind == "arc":
            shapes.append(pt.arc(float(s["theta1"]), float(s["theta2"])))
        else:
            raise UnsupportedShape(f"unknown shape kind {kind!r}",
                                   field=where + ".kind")
    return tuple(shapes)


def _load_set(cfg: dict) -> dict:
    path = _require(cfg, "set")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise PreconditionFailure(f"cannot read set: {e}",
                                  field="set") from e
    except json.JSONDecodeError as e:
        raise PreconditionFailure(f"invalid set JSON: {e}",
                                  field="set") from e


def _cond_sum_obj(cs) -> dict:
    return {
        "partial": cs.partial,
        "tail_bound": cs.tail_bound,
        "total": cs.total,
        "satisfied": cs.satisfied,
    }


def cmd_spec_build(cfg: dict, outdir: str) -> list[str]:
    spec = build_cantor_spec(cfg["a0"], cfg["b0"], _rule_from_cfg(cfg),
                             cfg["placement"], cfg["depth"])
    _write_text(os.path.join(outdir, "spec.json"), spec_to_json(spec))
    cs = condition_sum(spec)
    build = {
        "root_length": spec.root_length,
        "gap_log_lengths": [g.log_length for g in spec.gaps],
        "sum_gap_lengths": sum_gap_lengths(spec),
        "set_length": cantor_length(spec),
        "condition_sum": _cond_sum_obj(cs),
    }
    _write_json(os.path.join(outdir, "build.json"), build)
    return ["spec.json", "build.json"]


def cmd_eval(cfg: dict, outdir: str) -> list[str]:
    spec = _load_cantor(cfg)
    z = _parse_point(_require(cfg, "at"))
    branch = cfg["branch"]
    if branch == "product":
        if cfg["depth"] is None:
            val, err, n_used = pr.eval_f(spec, z, tol=cfg["tol"])
        else:
            n_used = cfg["depth"]
            val = pr.eval_partial_product(spec, n_used, z)
            err = pr.tail_bound(spec, n_used, z).bound
    elif branch in ("d-plus", "h-plus"):
        n_used = cfg["depth"] if cfg["depth"] is not None else spec.max_index
        tag = pr.BranchTag.D_PLUS if branch == "d-plus" else \
            pr.BranchTag.H_PLUS
        val = pr.sqrt_branch(spec, n_used, z, tag)
        err = pr.tail_bound(spec, n_used, z).bound
    elif branch == "fine":
        if z.imag != 0.0:
            raise PreconditionFailure("fine boundary values live on the "
                                      "real axis", field="at")
        val, err, n_used = pr.fine_boundary_value(spec, z.real,
                                                  pr.BranchTag.H_PLUS,
                                                  tol=cfg["tol"])
    else:
        raise PreconditionFailure(f"unknown branch {branch!r}",
                                  field="branch")
    _write_csv(os.path.join(outdir, "eval.csv"),
               ["z_re", "z_im", "log_mag", "arg", "err", "n_used"],
               [(z.real, z.imag, val.log_mag, val.arg, err, n_used)])
    return ["eval.csv"]


def cmd_capacity(cfg: dict, outdir: str) -> list[str]:
    obj = _load_set(cfg)
    if "shapes" in obj:
        tail = tuple(float(v) for v in obj.get("tail_inv_log_caps", ()))
        union = pt.CompactUnion(_shapes_from_obj(obj["shapes"]), tail)
        ub = pt.union_capacity_bound(union)
        out = {
            "members": ub.members,
            "log_bound": ub.log_bound,
            "bound": ub.bound,
            "inv_sum": ub.inv_sum,
            "rescale": ub.rescale,
        }
        if len(union.shapes) == 1 and not tail:
            out["exact_log_capacity"] = pt.exact_log_capacity(
                union.shapes[0])
    elif "spec" in obj:
        spec = spec_from_json(json.dumps(obj["spec"]))
        N = int(obj.get("N", 1))
        fs = pt.cantor_fine_sets(spec, N)
        out = {
            "N": fs.N,
            "fn_log_bound": fs.fn_bound.log_bound,
            "fn_bound": fs.fn_bound.bound,
            "members": fs.fn_bound.members,
            "sum_segments": fs.sum_segments,
            "sum_disks": fs.sum_disks,
            "cap_ambient_floor": fs.cap_ambient_floor,
            "chain_closes": fs.chain_closes,
            "meshable_fn_shapes": len(fs.FN.shapes),
        }
    elif "blaschke" in obj:
        spec = bl.blaschke_spec_from_json(json.dumps(obj["blaschke"]))
        N = int(obj.get("N", 1))
        fs = bl.disk_fine_sets(spec, N)
        out = {
            "N": fs.N,
            "fn_log_bound": fs.fn_bound.log_bound,
            "fn_bound": fs.fn_bound.bound,
            "members": fs.fn_bound.members,
            "sum_disks": fs.sum_disks,
            "cap_arc": fs.cap_S,
            "chain_closes": fs.chain_closes,
            "meshable_fn_shapes": len(fs.FN.shapes),
        }
    else:
        raise PreconditionFailure(
            "set JSON needs 'shapes', 'spec', or 'blaschke'", field="set")
    _write_json(os.path.join(outdir, "capacity.json"), out)
    return ["capacity.json"]


def cmd_green(cfg: dict, outdir: str) -> list[str]:
    obj = _load_set(cfg)
    if "shapes" not in obj:
        raise PreconditionFailure("set JSON needs 'shapes'", field="set")
    union = pt.CompactUnion(_shapes_from_obj(obj["shapes"]))
    z = _parse_point(_require(cfg, "at"))
    model = pt.leja_points(union, n=cfg["n"], mesh_per_shape=cfg["mesh"])
    value = pt.green_eval(model, z)
    _write_json(os.path.join(outdir, "green.json"), {
        "n": len(model.points),
        "cap_estimate": model.cap_estimate,
        "log_cap_estimate": model.log_cap_estimate,
        "node_tol": model.node_tol,
        "at": [z.real, z.imag],
        "value": value,
    })
    rows = []
    for k, p in enumerate(model.points):
        d_k = model.d_seq[k - 1] if 1 <= k <= len(model.d_seq) else \
            float("nan")
        rows.append((k, p.real, p.imag, d_k))
    _write_csv(os.path.join(outdir, "leja.csv"),
               ["k", "re", "im", "d_k"], rows)
    return ["green.json", "leja.csv"]


def cmd_sample_e(cfg: dict, outdir: str) -> list[str]:
    spec = _load_cantor(cfg)
    depth = _require(cfg, "depth")
    rows = pt.sample_E(spec, depth, samples=cfg["samples"],
                       leja_n=cfg["leja_n"])
    _write_csv(os.path.join(outdir, "esample.csv"), ["x", "u", "in_EN"],
               [(r.x, r.u, r.in_EN) for r in rows])
    return ["esample.csv"]


def cmd_hull_scan(cfg: dict, outdir: str) -> list[str]:
    spec = _load_cantor(cfg)
    z = _parse_point(_require(cfg, "z"))
    wrect = _parse_floats(_require(cfg, "wrect"), 4, "wrect")
    hps = hl.make_hull_spec(spec, cfg["depth"], scheme=cfg["scheme"])
    grid = hl.fiber_scan(hps, z, wrect, cfg["res"], sq=cfg["sq"],
                         delta=cfg["delta"])
    _write_csv(os.path.join(outdir, "grid.csv"), ["w_re", "w_im", "v"],
               hl.grid_rows(grid))
    _write_json(os.path.join(outdir, "dips.json"), hl.grid_report(grid))
    return ["grid.csv", "dips.json"]


def _load_blaschke(cfg: dict):
    path = _require(cfg, "spec")
    try:
        with open(path) as fh:
            return bl.blaschke_spec_from_json(fh.read())
    except OSError as e:
        raise PreconditionFailure(f"cannot read spec: {e}",
                                  field="spec") from e


def cmd_blaschke(cfg: dict, outdir: str) -> list[str]:
    spec = _load_blaschke(cfg)
    names: list[str] = []
    depth = cfg["depth"] if cfg["depth"] is not None else spec.max_index
    if cfg["at"] is not None:
        z = _parse_point(cfg["at"])
        val = bl.eval_blaschke(spec, depth, z)
        try:
            tail = bl.blaschke_tail_bound(spec, depth, z)
        except PreconditionFailure:
            tail = float("nan")
        _write_csv(os.path.join(outdir, "blaschke.csv"),
                   ["z_re", "z_im", "log_mag", "arg", "tail"],
                   [(z.real, z.imag, val.log_mag, val.arg, tail)])
        names.append("blaschke.csv")
        if cfg["sheets"] is not None:
            k0, k1 = (int(v) for v in _parse_floats(cfg["sheets"], 2,
                                                    "sheets"))
            spacing = bl.fb_sheet_spacing(spec, z, depth).to_complex()
            sheets = []
            for k in range(k0, k1 + 1):
                w = bl.fb_sheet(spec, k, z, depth).to_complex()
                sheets.append({"k": k, "re": w.real, "im": w.imag})
            _write_json(os.path.join(outdir, "sheets.json"), {
                "at": [z.real, z.imag],
                "depth": depth,
                "spacing": [spacing.real, spacing.imag],
                "sheets": sheets,
            })
            names.append("sheets.json")
    elif cfg["sheets"] is not None:
        raise PreconditionFailure("--sheets needs --at", field="at")
    if cfg["sample_depth"] is not None:
        rows = bl.blaschke_sample_E(spec, cfg["sample_depth"],
                                    samples=cfg["samples"],
                                    leja_n=cfg["leja_n"])
        _write_csv(os.path.join(outdir, "bsample.csv"),
                   ["theta", "u", "in_EN"],
                   [(r.theta, r.u, r.in_EN) for r in rows])
        names.append("bsample.csv")
    if not names:
        raise PreconditionFailure(
            "nothing to do: give --at, --sheets, or --sample-depth",
            field="at")
    return names


def cmd_reproduce_all(cfg: dict, outdir: str) -> list[str]:
    from .acceptance import run_all, write_summary
    results = run_all(outdir)
    names = write_summary(results, outdir)
    for r in results:
        print(f"ACCEPTANCE {r.index:2d} {r.name}: "
              f"{'PASS' if r.passed else 'FAIL'}")
    return names


_DISPATCH = {
    "spec-build": cmd_spec_build,
    "eval": cmd_eval,
    "capacity": cmd_capacity,
    "green": cmd_green,
    "sample-e": cmd_sample_e,
    "hull-scan": cmd_hull_scan,
    "blaschke": cmd_blaschke,
    "reproduce-all": cmd_reproduce_all,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    command = args.command
    try:
        cfg = _resolve(args, command)
        outdir = cfg["out"]
        os.makedirs(outdir, exist_ok=True)
        names = _DISPATCH[command](cfg, outdir)
        manifest_cfg = {k: (v if not isinstance(v, complex) else
                            [v.real, v.imag]) for k, v in cfg.items()}
        _write_manifest(outdir, command, manifest_cfg, names)
        for n in names:
            print(os.path.join(outdir, n))
    except PreconditionFailure as e:
        print(json.dumps(e.payload(), sort_keys=True))
        return 1
    except Exception as e:  # noqa: BLE001 - contract: assertion exit code
        print(json.dumps({"error": "internal",
                          "kind": type(e).__name__,
                          "message": str(e)}, sort_keys=True))
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
