"""Parameter sweeps: configs, per-cell computation, JSON-lines/CSV/plot output.

Config (JSON)::

    {
      "group": {"kind": "su2", "resolution": 24}
               | {"kind": "finite", "builtin": "S3" | "Z2" | "Q8" | "2I"}
               | {"kind": "finite", "table": [[...]], "generators": [...],
                  "matrices": [...], "projection": [...]},
      "experiment": "first" | "second" | "trek",
      "spins": [0.5, 1, ...],          # first class, quaternion groups
      "pairs": [[0.5, 1], ...],        # second class and trek
      "q": [1, 2, 3],
      "optimizer": {"restarts": 64, "steps": 500, "step_size": 0.1},
      "seed": 0,
      "oracle": false,
      "richardson": true,
      "out": "results"
    }

Matrix entries may be numbers or [re, im] pairs.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .berezin import first_class, second_class
from .bounds import (
    OptimizerSettings,
    assemble_first_class,
    assemble_second_class,
    first_class_values,
    gamma_direct,
    trek_bounds,
)
from .catalog import builtin_group, builtin_rep, highest_weight_projection
from .groups import (
    GroupError,
    build_finite_group,
    build_su2_grid,
    coset_space,
    matrix_representation,
    spin_representation,
    stability_subgroup,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "run_sweep",
    "compare_trek",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "class", "m", "n", "q", "gamma_breve_A", "gamma_B_low", "gamma_B_cap", "delta_B_low",
    "delta_tilde_B_low", "delta_tilde_A", "reach_bound", "height_bound", "length_bound",
]
TREK_COLUMNS = ["m", "n", "trek_reach", "trek_height", "trek_length", "alt_trek_length",
                "direct_length", "smallest"]


class ConfigError(ValueError):
    """Unusable run configuration."""


@dataclass(frozen=True)
class RunConfig:
    group: dict
    seed: int
    experiment: str = "first"
    spins: tuple = ()
    pairs: tuple = ()
    q: tuple = (1,)
    optimizer: OptimizerSettings | None = None
    oracle: bool = False
    richardson: bool = True
    out: str = "results"
    extra: dict = field(default_factory=dict)

    @property
    def settings(self) -> OptimizerSettings:
        return self.optimizer or OptimizerSettings(seed=self.seed)


def _half_integer(x, where):
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"field {where}: {x!r} is not a number") from None
    if v < 0 or abs(2 * v - round(2 * v)) > 1e-12:
        raise ConfigError(f"field {where}: spins must be nonnegative half-integers, got {x!r}")
    return round(2 * v) / 2


def parse_config(data: dict, seed: int | None = None, out: str | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    group = data.get("group")
    if not isinstance(group, dict) or group.get("kind") not in ("finite", "su2"):
        raise ConfigError("field group: need an object with kind 'finite' or 'su2'")
    if group["kind"] == "su2":
        res = group.get("resolution")
        if not isinstance(res, int) or res < 2:
            raise ConfigError("field group.resolution: integer >= 2 required")
    elif "builtin" not in group and ("table" not in group or "generators" not in group):
        raise ConfigError("field group: finite groups need 'builtin' or 'table' and 'generators'")
    seed = data.get("seed") if seed is None else seed
    if seed is None:
        seed = (data.get("optimizer") or {}).get("seed")
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("field seed: a nonnegative integer seed is mandatory")
    exp = data.get("experiment", "first")
    if exp not in ("first", "second", "trek"):
        raise ConfigError(f"field experiment: unknown value {exp!r}")
    spins = tuple(_half_integer(s, f"spins[{i}]") for i, s in enumerate(data.get("spins", [])))
    pairs = []
    for i, p in enumerate(data.get("pairs", [])):
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise ConfigError(f"field pairs[{i}]: need [m, n]")
        pairs.append((_half_integer(p[0], f"pairs[{i}][0]"), _half_integer(p[1], f"pairs[{i}][1]")))
    qs = data.get("q", [1])
    if not isinstance(qs, list) or not all(isinstance(q, int) and q >= 1 for q in qs):
        raise ConfigError("field q: list of integers >= 1 required")
    opt = data.get("optimizer") or {}
    try:
        settings = OptimizerSettings(
            seed=seed,
            restarts=int(opt.get("restarts", 64)),
            steps=int(opt.get("steps", 500)),
            step_size=float(opt.get("step_size", 0.1)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"field optimizer: {e}") from None
    if settings.restarts < 1 or settings.steps < 0 or settings.step_size <= 0:
        raise ConfigError("field optimizer: restarts >= 1, steps >= 0, step_size > 0 required")
    return RunConfig(
        group=group,
        seed=seed,
        experiment=exp,
        spins=spins,
        pairs=tuple(pairs),
        q=tuple(qs),
        optimizer=settings,
        oracle=bool(data.get("oracle", False)),
        richardson=bool(data.get("richardson", True)),
        out=out or data.get("out", "results"),
    )


def load_config(path: str, seed: int | None = None, out: str | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_config(data, seed=seed, out=out)


# ---------------------------------------------------------------------------
# model construction (cached per worker process)


def _matrix(entry):
    arr = np.asarray(entry, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


@lru_cache(maxsize=4)
def _group(key: str):
    spec = json.loads(key)
    if spec["kind"] == "su2":
        return build_su2_grid(spec["resolution"])
    if "builtin" in spec:
        return builtin_group(spec["builtin"])
    return build_finite_group(spec["table"], spec["generators"], name=spec.get("name", "custom"))


def _side(cfg_group: dict, spin):
    """ProjectionData for one representation of the configured group."""
    g = _group(json.dumps(cfg_group, sort_keys=True))
    if g.quats is not None:
        if spin is None:
            raise ConfigError("field spins: quaternion groups need spins")
        rep = spin_representation(g, spin)
        P = highest_weight_projection(rep.dim)
    elif "matrices" in cfg_group:
        rep = matrix_representation(g, [_matrix(m) for m in cfg_group["matrices"]], label="custom")
        v = np.asarray(_matrix(cfg_group["projection"]) if "projection" in cfg_group else np.eye(rep.dim)[0])
        v = v.reshape(-1) / np.linalg.norm(v)
        P = np.outer(v, v.conj())
    else:
        rep = builtin_rep(g)
        P = np.diag([0.0, 1.0]).astype(complex) if g.name == "S3" else highest_weight_projection(rep.dim)
    return stability_subgroup(rep, P)


def _first_values(cfg: RunConfig, spin):
    pd = _side(cfg.group, spin)
    spec = first_class(coset_space(pd.group, pd))
    return spec, first_class_values(spec, cfg.settings, richardson=cfg.richardson)


def _oracle_fields(spec, report):
    from .oracle import hausdorff_reach_oracle, height_oracle, mean_zero_basis, sample_ball, sample_pure_states
    from .seminorms import function_seminorm, operator_seminorm

    c = spec.coset
    rep = spec.proj.rep
    k = c.npts - 1
    ballA = sample_ball(function_seminorm(c), mean_zero_basis(c.npts), step=0.05 if k <= 3 else None,
                        count=None if k <= 3 else 2000)
    kb = rep.dim**2 - 1
    ballB = sample_ball(operator_seminorm(rep), rep.dim, step=0.2 if kb <= 3 else None,
                        count=None if kb <= 3 else 2000)
    states = sample_pure_states(rep.dim, step=0.4 if rep.dim == 2 else None, count=60)
    reach = hausdorff_reach_oracle(spec, ballA, ballB)
    height = height_oracle(spec, states)
    return {
        "reach_oracle": reach,
        "height_oracle": height["height"],
        "height_oracle_B": height["B_side"],
        "pushforward_B": height["pushforward_B"],
        "reach_ok": bool(reach <= report.reach_bound + 1e-9),
        "height_ok": bool(height["height"] <= report.height_bound + 1e-9),
    }


def _first_unit(cfg: RunConfig, spin):
    t0 = time.perf_counter()
    spec, vals = _first_values(cfg, spin)
    recs = []
    for q in cfg.q:
        rep = assemble_first_class(vals, q, m=spin)
        rec = rep.as_dict()
        if cfg.oracle and q == 1 and spec.coset.group.kind == "finite":
            rec["oracle"] = _oracle_fields(spec, rep)
        recs.append(rec)
    wall = time.perf_counter() - t0
    for r in recs:
        r["wall_time"] = wall
    return recs


def _second_unit(cfg: RunConfig, pair):
    t0 = time.perf_counter()
    m, n = pair
    spec_m, vm = _first_values(cfg, m)
    spec_n, vn = _first_values(cfg, n)
    spec = second_class(spec_m.coset, spec_m.proj, spec_n.proj)
    direct = {
        "gamma_direct[m->n]": gamma_direct(spec, cfg.settings, "m"),
        "gamma_direct[n->m]": gamma_direct(spec, cfg.settings, "n"),
    }
    recs = [assemble_second_class(vm, vn, q, m=m, n=n, direct=direct).as_dict() for q in cfg.q]
    wall = time.perf_counter() - t0
    for r in recs:
        r["wall_time"] = wall
    return recs


def _trek_unit(cfg: RunConfig, pair):
    t0 = time.perf_counter()
    m, n = pair
    spec_m, vm = _first_values(cfg, m)
    spec_n, vn = _first_values(cfg, n)
    rm, rn = assemble_first_class(vm, 1, m=m), assemble_first_class(vn, 1, m=n)
    direct = assemble_second_class(vm, vn, 1, m=m, n=n)
    trek = trek_bounds(rm, rn, direct)
    rec = {
        "class": "trek",
        "m": m,
        "n": n,
        "q": 1,
        "values": {**{f"{k}[m]": v for k, v in rm.as_dict()["values"].items()},
                   **{f"{k}[n]": v for k, v in rn.as_dict()["values"].items()}},
        "reach_bound": trek.reach,
        "height_bound": trek.height,
        "length_bound": trek.length,
        "alt_length": trek.alt_length,
        "direct_length": trek.direct_length,
        "smallest": trek.smallest,
        "wall_time": time.perf_counter() - t0,
    }
    return [rec]


def _units(cfg: RunConfig):
    g = _group(json.dumps(cfg.group, sort_keys=True))
    if cfg.experiment == "first":
        if g.quats is None:
            return [(_first_unit, None)]
        return [(_first_unit, j) for j in cfg.spins]
    fn = _second_unit if cfg.experiment == "second" else _trek_unit
    return [(fn, p) for p in cfg.pairs]


def _call(args):
    fn, cfg, arg = args
    return fn(cfg, arg)


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def _val(values, key, field_="value"):
    v = values.get(key)
    return None if v is None else v.get(field_)


def _side_max(values, key, field_="value"):
    found = [v.get(field_) for k, v in values.items()
             if (k == key or k.startswith(key + "[")) and v.get(field_) is not None]
    return max(found) if found else None


def csv_row(rec: dict) -> list:
    """One summary row; second-class and trek rows report the max over sides."""
    vals = rec.get("values", {})
    pick = _val if rec["class"] == "first" else _side_max
    return [
        rec["class"], rec.get("m"), rec.get("n"), rec["q"],
        pick(vals, "gamma_breve_A"), pick(vals, "gamma_B"), pick(vals, "gamma_B", "cap"),
        pick(vals, "delta_B"), pick(vals, "delta_tilde_B"), pick(vals, "delta_tilde_A"),
        rec["reach_bound"], rec["height_bound"], rec["length_bound"],
    ]


def _write_outputs(cfg: RunConfig, records: list, jsonl_handle=None):
    os.makedirs(cfg.out, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow([_fmt(x) for x in csv_row(rec)])
    with open(os.path.join(cfg.out, "summary.csv"), "w", newline="") as fh:
        fh.write(buf.getvalue())
    series = {}
    xs = sorted({r.get("m") for r in records if r.get("m") is not None})
    for q in cfg.q:
        by_m = {r.get("m"): r["length_bound"] for r in records if r["q"] == q}
        series[f"q={q}"] = [by_m.get(x) for x in xs]
    with open(os.path.join(cfg.out, "plot.json"), "w") as fh:
        json.dump({"x": xs, "x_label": "m", "y_label": "length_bound", "series": series}, fh, indent=1)
    if cfg.experiment == "trek":
        tb = io.StringIO()
        tw = csv.writer(tb, lineterminator="\n")
        tw.writerow(TREK_COLUMNS)
        for r in records:
            tw.writerow([_fmt(x) for x in (r["m"], r["n"], r["reach_bound"], r["height_bound"],
                                            r["length_bound"], r["alt_length"], r["direct_length"],
                                            r["smallest"])])
        with open(os.path.join(cfg.out, "trek.csv"), "w", newline="") as fh:
            fh.write(tb.getvalue())


def run_sweep(cfg: RunConfig, jobs: int = 1, log=None) -> int:
    """Run every cell of ``cfg``; returns the exit status (0 ok, 3 partial failure).

    Cells are computed on a bounded process pool and written by this
    process in cell order, so outputs do not depend on ``jobs``.
    """
    os.makedirs(cfg.out, exist_ok=True)
    units = _units(cfg)
    records, status = [], 0
    jsonl = open(os.path.join(cfg.out, "records.jsonl"), "w")
    try:
        tasks = [(fn, cfg, arg) for fn, arg in units]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_call, t) for t in tasks]
                results = []
                for f in futures:
                    try:
                        results.append(f.result())
                    except Exception as e:  # keep finished cells
                        results.append(e)
        else:
            results = []
            for t in tasks:
                try:
                    results.append(_call(t))
                except Exception as e:
                    results.append(e)
        for (fn, arg), res in zip(units, results):
            if isinstance(res, Exception):
                status = 3
                if log:
                    log(f"cell {arg!r} failed: {type(res).__name__}: {res}")
                jsonl.write(json.dumps({"cell": arg, "error": f"{type(res).__name__}: {res}"}) + "\n")
                continue
            for rec in res:
                jsonl.write(json.dumps(rec, sort_keys=True) + "\n")
                records.append(rec)
            jsonl.flush()
    finally:
        jsonl.close()
        _write_outputs(cfg, records)
    return status


def compare_trek(cfg: RunConfig) -> list[dict]:
    """Per (m, n) pair: direct bridge bound, trek length, alternative trek length."""
    if not cfg.pairs:
        return []
    rows = []
    for pair in cfg.pairs:
        rec = _trek_unit(cfg, pair)[0]
        rows.append({k: rec[k] for k in ("m", "n", "direct_length", "length_bound", "alt_length", "smallest")})
    return rows
