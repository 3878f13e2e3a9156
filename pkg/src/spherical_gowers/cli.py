"""Command-line entry point: ``sphgowers <operation> key=value ... [--config FILE]``."""
from __future__ import annotations

import argparse
import configparser
import json
import re
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import BudgetError, MalformedDataError, SphericalGowersError
from .gowers import (FullGrid, GridFunction, box_count, gowers_norm, pla_bound)
from .fourier import dft
from .grid import grid_points, index_of
from .harness import ReportRow, SUITES, perturbed_alf, planted_phase, results_to_json, rows_of, rows_to_csv, stream, verify
from .ideals import (AlmostLinearFunction, HString, MIdeal, ideal_member, induced_form, is_freiman,
                     is_reducible_direct, is_reducible_ideal, strings_independent)
from .inverse import PolyPhase, converse_check, sgi1_invert
from .mset import MFamily, MSet, ProductTestFunction, box_codimension, box_family, fubini_box1_product, fubini_check
from .polynomials import Poly
from .quadform import AffineSubspace, QuadraticForm, SphereSet, isotropy_census, rank_restriction

OPERATIONS = ("count-sphere", "count-box", "gowers-norm", "dft", "pla", "invert-u2", "converse", "mset",
              "ideal-member", "reduce-check", "string-indep", "freiman", "iso-census", "verify")


@dataclass
class ExperimentConfig:
    operation: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None

    def get(self, key, default=None, kind=None):
        if key not in self.params:
            return default
        raw = self.params[key]
        try:
            return kind(raw) if kind else raw
        except (TypeError, ValueError):
            raise MalformedDataError(f"field {key!r}: cannot read {raw!r} as {kind.__name__}") from None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


# -- config files --------------------------------------------------------------

def read_config(text: str, operation: str | None = None, source="<config>") -> dict:
    """Flat key=value text; keys before any section apply to all operations,
    keys under [operation] only to that operation."""
    parser = configparser.ConfigParser(default_section="__common__", interpolation=None,
                                       delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[__common__]\n" + text, source=source)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] - 1
        line = text.splitlines()[lineno - 1] if 0 < lineno <= len(text.splitlines()) else ""
        raise MalformedDataError(f"{source}: line {lineno}: expected key = value, got {line.strip()!r}") from None
    except configparser.DuplicateOptionError as exc:
        raise MalformedDataError(f"{source}: line {exc.lineno - 1}: duplicate key {exc.option!r}") from None
    except configparser.Error as exc:
        raise MalformedDataError(f"{source}: {exc}") from None
    out = dict(parser.defaults())
    if operation and parser.has_section(operation):
        out.update({k: v for k, v in parser.items(operation)})
    return out


def parse_assignments(items) -> dict:
    out = {}
    for it in items:
        if "=" not in it:
            raise MalformedDataError(f"expected key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


# -- value specs -----------------------------------------------------------------

def _call(spec):
    m = re.fullmatch(r"\s*([\w-]+)\s*(?:\((.*)\))?\s*", str(spec))
    if not m:
        raise MalformedDataError(f"cannot parse spec {spec!r}")
    args = m.group(2)
    return m.group(1), ([] if args is None or not args.strip() else json.loads(f"[{args}]"))


def _json(cfg, key, default=None):
    raw = cfg.get(key)
    if raw is None:
        return default
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        raise MalformedDataError(f"field {key!r}: not valid JSON: {raw!r}") from None


def make_form(cfg) -> QuadraticForm:
    if cfg.get("form_file"):
        return QuadraticForm.from_text(Path(cfg.get("form_file")).read_text())
    spec = cfg.get("form", "random")
    if "A=" in spec:
        return QuadraticForm.from_text(spec if "p=" in spec else f"p={cfg.get('p')} {spec}")
    p, d = cfg.get("p", 5, int), cfg.get("d", 3, int)
    name, args = _call(spec)
    if name == "identity":
        return QuadraticForm.identity(p, d)
    if name == "diag":
        if len(args) != d:
            raise MalformedDataError(f"field 'form': diag needs {d} entries")
        return QuadraticForm(np.diag(args), np.zeros(d, dtype=np.int64), 0, p)
    if name == "random":
        seed = args[0] if args else cfg.seed
        return QuadraticForm.random(p, d, stream(seed, "form"))
    raise MalformedDataError(f"field 'form': unknown form {spec!r}")


def make_omega(cfg, M):
    name = cfg.get("omega", "sphere")
    shifts = tuple(np.asarray(h) for h in _json(cfg, "shifts", []))
    codim = cfg.get("codim", 0, int)
    S = AffineSubspace.random(M.p, M.d, codim, stream(cfg.seed, "subspace")) if codim else None
    if name == "full":
        return FullGrid(M.p, M.d)
    if name == "sphere":
        return SphereSet(M, shifts, S)
    raise MalformedDataError(f"field 'omega': expected full or sphere, got {name!r}")


def make_function(cfg, p, d, key="f"):
    """Returns (GridFunction, info dict)."""
    spec = cfg.get(key, "one")
    if spec.startswith("file:"):
        return GridFunction.load(spec[5:]), {"kind": "file"}
    name, args = _call(spec)
    rng = stream(cfg.seed, f"function-{key}")
    if name == "one":
        return GridFunction.constant(1.0, p, d), {"kind": "phase", "degree": 0}
    if name == "const":
        return GridFunction.constant(complex(args[0]), p, d), {"kind": "phase", "degree": 0}
    if name == "character":
        return GridFunction.character(args[0], p, d), {"kind": "phase", "degree": 1}
    if name == "phase":
        phi = PolyPhase.random(int(args[0]) if args else 1, d, p, rng)
        return phi.grid_function(), {"kind": "phase", "degree": phi.degree, "phase": phi}
    if name == "corrupted":
        s = int(args[0]) if args else 1
        frac = float(args[1]) if len(args) > 1 else 0.05
        phi = PolyPhase.random(s, d, p, rng)
        v = phi(grid_points(p, d))
        flip = rng.random(v.size) < frac
        v = np.where(flip, -v, v)
        return GridFunction(v, p, d, bounded=True), {"kind": "corrupted", "phase": phi}
    if name == "planted":
        noise = float(args[0]) if args else 0.3
        f, xi = planted_phase(QuadraticForm.identity(p, d), rng, noise)
        return f, {"kind": "planted", "xi": xi}
    if name == "random":
        return GridFunction(np.exp(2j * np.pi * rng.random(p ** d)), p, d, bounded=True), {"kind": "random"}
    raise MalformedDataError(f"field {key!r}: unknown function {spec!r}")


def make_string(cfg, key="xi"):
    raw = cfg.get(key)
    if raw is None:
        raise MalformedDataError(f"field {key!r} is required")
    doc = json.loads(raw) if raw.strip().startswith("{") else None
    if doc is not None:
        return HString.from_json(doc)
    p, d, j = cfg.get("p", 5, int), cfg.get("d", 3, int), cfg.get("j", 1, int)
    return HString(tuple(_json(cfg, key)), j, d, p)


def _tol(cfg, default):
    return cfg.get("tol", default, float)


# -- operations ------------------------------------------------------------------

def op_count_sphere(cfg, rows, art):
    M = make_form(cfg)
    omega = make_omega(cfg, M)
    if isinstance(omega, FullGrid):
        raise MalformedDataError("count-sphere needs omega=sphere")
    count = int(omega.indicator().sum())
    S = omega.subspace or AffineSubspace.full(M.p, M.d)
    r = rank_restriction(M, S)
    pred = M.p ** (S.dim - 1) if r >= 3 and not omega.shifts else None
    row = ReportRow.make(0, "count-sphere", {"p": M.p, "d": M.d, "codim": S.codim, "rank": r}, count, pred, True)
    if pred is not None:
        row.passed = row.margin <= _tol(cfg, 2 * M.p ** -0.5)
    rows.append(row)


def op_count_box(cfg, rows, art):
    M = make_form(cfg)
    omega = make_omega(cfg, M)
    s = cfg.get("s", 2, int)
    mode = cfg.get("mode", "exhaustive")
    est = box_count(omega, s, mode, samples=cfg.get("samples", 20000, int), rng=stream(cfg.seed, "count-box"))
    val = est.estimate if mode == "sampled" else est
    if isinstance(omega, FullGrid):
        pred = M.p ** ((s + 1) * M.d)
    elif not omega.shifts:
        dim = omega.subspace.dim if omega.subspace is not None else M.d
        pred = M.p ** ((s + 1) * dim - box_codimension(s))
    else:
        pred = None
    row = ReportRow.make(0, "count-box", {"p": M.p, "d": M.d, "s": s, "mode": mode}, val, pred, True)
    if pred is not None:
        row.passed = row.margin <= _tol(cfg, 3 * M.p ** -0.5)
    rows.append(row)


def op_gowers_norm(cfg, rows, art):
    M = make_form(cfg)
    omega = make_omega(cfg, M)
    f, info = make_function(cfg, M.p, M.d)
    s = cfg.get("s", 2, int)
    mode = cfg.get("mode", "exhaustive")
    val = gowers_norm(f, omega, s, mode=mode, samples=cfg.get("samples", 20000, int), seed=cfg.seed)
    val = val.value if mode == "sampled" else val
    pred = 1.0 if info.get("kind") == "phase" and info["degree"] < s else None
    ok = pred is None or abs(val - pred) <= _tol(cfg, 1e-9)
    rows.append(ReportRow.make(0, "gowers-norm", {"p": M.p, "d": M.d, "s": s, "f": cfg.get("f", "one")},
                               val, pred, ok))


def op_dft(cfg, rows, art):
    p, d = cfg.get("p", 5, int), cfg.get("d", 3, int)
    f, _ = make_function(cfg, p, d)
    fh = dft(f.scalar, p, d)
    energy = float(np.sum(np.abs(fh) ** 2))
    mean_sq = float(np.mean(np.abs(f.scalar) ** 2))
    rows.append(ReportRow.make(0, "dft-parseval", {"p": p, "d": d}, energy, mean_sq,
                               abs(energy - mean_sq) <= _tol(cfg, 1e-9)))
    top = np.argsort(-np.abs(fh), kind="stable")[: cfg.get("top", 5, int)]
    pts = grid_points(p, d)
    art["largest_coefficients"] = [{"xi": pts[k].tolist(), "re": float(fh[k].real), "im": float(fh[k].imag)}
                                   for k in top]
    if cfg.get("save"):
        GridFunction(fh, p, d).save(cfg.get("save"))


def op_pla(cfg, rows, art):
    M = make_form(cfg)
    f, _ = make_function(cfg, M.p, M.d)
    b = pla_bound(f, M, force=cfg.get("force", "false").lower() == "true")
    rows.append(ReportRow.make(0, "pla", {"p": M.p, "d": M.d, "f": cfg.get("f", "one")}, b.lhs, b.rhs, b.holds))


def op_invert_u2(cfg, rows, art):
    M = make_form(cfg)
    if "f" not in cfg.params:
        cfg.params["f"] = "planted"
    f, info = make_function(cfg, M.p, M.d)
    eps = cfg.get("eps", None, float)
    cert = sgi1_invert(f, M, eps=eps)
    if cert is None:
        rows.append(ReportRow.make(0, "invert-u2", {"p": M.p, "d": M.d}, 0.0, None, False, "no certificate"))
        return
    rows.append(ReportRow.make(0, "invert-u2", {"p": M.p, "d": M.d, "xi": list(cert.xi)},
                               cert.correlation, cert.threshold, cert.correlation >= cert.threshold))
    art["certificate"] = json.loads(cert.to_json())
    if "xi" in info:
        hit = tuple(cert.xi) == tuple(info["xi"])
        rows.append(ReportRow.make(0, "invert-u2-recovery", {"planted": list(info["xi"])}, int(hit), 1, hit))


def op_converse(cfg, rows, art):
    M = make_form(cfg)
    omega = make_omega(cfg, M)
    if "f" not in cfg.params:
        cfg.params["f"] = "corrupted(1,0.05)"
    f, info = make_function(cfg, M.p, M.d)
    phi = info.get("phase")
    if cfg.get("phase"):
        name, args = _call(cfg.get("phase"))
        if name == "linear":
            phi = PolyPhase.linear(args[0], M.p)
        elif name == "random":
            phi = PolyPhase.random(int(args[0]) if args else 1, M.d, M.p, stream(cfg.seed, "phase"))
        else:
            raise MalformedDataError(f"field 'phase': unknown phase {cfg.get('phase')!r}")
    if phi is None:
        phi = PolyPhase.random(1, M.d, M.p, stream(cfg.seed, "phase"))
    rep = converse_check(f, phi, omega, s=cfg.get("s", None, int), mode=cfg.get("mode", "exhaustive"),
                         samples=cfg.get("samples", 20000, int), seed=cfg.seed)
    eps, delta = cfg.get("eps", 0.5, float), cfg.get("delta", 0.25, float)
    ok = rep.correlation <= eps or rep.u_norm >= delta
    rows.append(ReportRow.make(0, "converse", {"p": M.p, "d": M.d, "s": rep.s, "rank": rep.rank_restriction,
                                               "guarantee": rep.guarantee, "correlation": rep.correlation},
                               rep.u_norm, None, ok, f"correlation > {eps} must give u_norm >= {delta}"))


def _family(cfg, M):
    if cfg.get("family_file"):
        return MFamily.from_json(Path(cfg.get("family_file")).read_text()), None
    name, args = _call(cfg.get("family", "box(1)"))
    if name != "box":
        raise MalformedDataError(f"field 'family': expected box(s), got {cfg.get('family')!r}")
    s = int(args[0]) if args else 1
    return box_family(M, s), s


class BlockProduct:
    """x -> prod_i a_i(x_i) with +-1 tables, one per block."""

    def __init__(self, tables, p):
        self.tables, self.p = tables, p

    @classmethod
    def random(cls, k, p, d, rng):
        return cls([rng.choice(np.array([-1, 1]), size=p ** d) for _ in range(k)], p)

    def __call__(self, x):
        out = np.ones(x.shape[0], dtype=np.int64)
        for i, t in enumerate(self.tables):
            out = out * t[index_of(x[:, i], self.p)]
        return out


def op_mset(cfg, rows, art):
    M = make_form(cfg)
    J, s = _family(cfg, M)
    fl = J.flags()
    art["flags"] = asdict(fl)
    rows.append(ReportRow.make(0, "mset-flags", {"k": J.k, "functions": len(J.functions)},
                               fl.dimension, None, fl.consistent, "" if fl.consistent else "inconsistent family"))
    if cfg.get("standardize"):
        R, dims = J.standard_representation()
        art["standard_representation"] = json.loads(R.to_json())
        art["dimension_vector"] = [int(x) for x in dims]
        rows.append(ReportRow.make(0, "mset-standardize", {"dims": [int(x) for x in dims]},
                                   sum(dims), fl.dimension, sum(dims) == fl.dimension))
    if cfg.get("codim"):
        c = J.total_codimension()
        pred = box_codimension(s) if s is not None else None
        rows.append(ReportRow.make(0, "mset-codim", {"k": J.k}, c, pred, pred is None or c == pred))
    if cfg.get("decompose") is not None:
        I = [int(x) for x in str(cfg.get("decompose")).split(",") if x.strip()]
        Jp, Jpp = J.i_decomposition(I)
        art["decomposition"] = {"I": I, "J1": json.loads(Jp.to_json()), "J2": json.loads(Jpp.to_json())}
        total = len(Jp.functions) + len(Jpp.functions)
        rows.append(ReportRow.make(0, "mset-decompose", {"I": I, "J1": len(Jp.functions), "J2": len(Jpp.functions)},
                                   total, fl.dimension, total == fl.dimension))
    if cfg.get("fubini"):
        I = [int(x) for x in str(cfg.get("fubini_I", "0")).split(",")]
        rng = stream(cfg.seed, "fubini")
        if s == 1 and I == [0]:
            rep = fubini_box1_product(ProductTestFunction.random(M.p, M.d, rng), M)
        else:
            rep = fubini_check(BlockProduct.random(J.k, M.p, M.d, rng), MSet(J), I)
        tol = _tol(cfg, 3 * M.p ** -0.5)
        rows.append(ReportRow.make(0, "mset-fubini", {"I": I, "points": rep.points}, rep.discrepancy, 0,
                                   rep.discrepancy <= tol))


def op_ideal_member(cfg, rows, art):
    M = make_form(cfg)
    xi = make_string(cfg)
    shifts = _json(cfg, "shifts", [])
    J = MIdeal(M, tuple(np.asarray(h) for h in shifts))
    w = ideal_member(induced_form(xi), J)
    expect = cfg.get("expect")
    ok = expect is None or (w is not None) == (expect.lower() == "true")
    rows.append(ReportRow.make(0, "ideal-member", {"j": xi.j, "hypotheses": J.hypotheses(xi.j)},
                               int(w is not None), None if expect is None else int(expect.lower() == "true"), ok))
    if w is not None:
        art["witness"] = {"g0": w.g0.to_text(), "g": [g.to_text() for g in w.gs]}


def op_reduce_check(cfg, rows, art):
    M = make_form(cfg)
    shifts = _json(cfg, "shifts", [])
    omega = SphereSet(M, tuple(np.asarray(h) for h in shifts))
    mode = cfg.get("mode", "exhaustive")
    if cfg.get("poly"):
        f = Poly.from_text(cfg.get("poly"), M.d)
        j = cfg.get("j", 1, int)
        ideal = None
    else:
        f = make_string(cfg)
        j = f.j
        ideal = bool(is_reducible_ideal(f, M, shifts).reducible)
    res = is_reducible_direct(f, omega, j, mode=mode, samples=cfg.get("samples", 100000, int),
                              rng=stream(cfg.seed, "reduce-check"))
    ok = ideal is None or ideal == res.reducible or (mode == "sampled" and not ideal)
    rows.append(ReportRow.make(0, "reduce-check", {"j": j, "mode": mode, "checked": res.checked},
                               int(res.reducible), None if ideal is None else int(ideal), ok))
    if res.counterexample is not None:
        art["counterexample"] = {"n": list(res.counterexample[0]), "h": [list(h) for h in res.counterexample[1]]}


def op_string_indep(cfg, rows, art):
    M = make_form(cfg)
    p, d, j = M.p, M.d, cfg.get("j", 1, int)
    strings = [HString(tuple(x), j, d, p) for x in _json(cfg, "strings", [])]
    shifts = _json(cfg, "shifts", [])
    indep, a = strings_independent(strings, cfg.get("c", 1, int), M, shifts)
    rows.append(ReportRow.make(0, "string-indep", {"l": len(strings), "c": cfg.get("c", 1, int)},
                               int(indep), None, True))
    if a is not None:
        art["combination"] = list(a)


def op_freiman(cfg, rows, art):
    p, d = cfg.get("p", 7, int), cfg.get("d", 1, int)
    name = cfg.get("map", "canonical")
    H = grid_points(p, d)
    if name == "canonical":
        xi = AlmostLinearFunction([tuple(Fraction(int(i == t), p) for i in range(d)) for t in range(d)],
                                  [1] * d, p, domain=H)
    elif name == "perturbed":
        if d != 1:
            raise MalformedDataError("the perturbed map is defined for d=1")
        xi = perturbed_alf(p)
    else:
        doc = json.loads(name)
        xi = AlmostLinearFunction([tuple(Fraction(a) for a in al) for al in doc["alphas"]],
                                  [Fraction(b) for b in doc["betas"]], p, domain=H)
    res = is_freiman(xi, H, mode=cfg.get("mode", "exhaustive"), samples=cfg.get("samples", 100000, int),
                     rng=stream(cfg.seed, "freiman"))
    expect = cfg.get("expect")
    ok = expect is None or res.holds == (expect.lower() == "true")
    rows.append(ReportRow.make(0, "freiman", {"p": p, "d": d, "checked": res.checked}, int(res.holds),
                               None if expect is None else int(expect.lower() == "true"), ok))
    if res.quadruple is not None:
        art["quadruple"] = [list(h) for h in res.quadruple]


def op_iso_census(cfg, rows, art):
    M = make_form(cfg)
    k = cfg.get("k", 2, int)
    mode = cfg.get("mode", "exhaustive")
    dep, iso = isotropy_census(M, k, mode=mode, samples=cfg.get("samples", 10000, int),
                               rng=stream(cfg.seed, "iso-census"))
    p, d = M.p, M.d
    bound = k * p ** ((d + 1) * (k - 1))
    rows.append(ReportRow.make(0, "iso-census-dependent", {"p": p, "d": d, "k": k, "mode": mode}, dep, bound,
                               mode == "sampled" or dep <= bound, "bound k p^{(d+1)(k-1)}"))
    rows.append(ReportRow.make(0, "iso-census-isotropic", {"p": p, "d": d, "k": k, "mode": mode}, iso,
                               p ** (k * d - 1), True, "reported against p^{kd-1}"))


DISPATCH = {
    "count-sphere": op_count_sphere, "count-box": op_count_box, "gowers-norm": op_gowers_norm, "dft": op_dft,
    "pla": op_pla, "invert-u2": op_invert_u2, "converse": op_converse, "mset": op_mset,
    "ideal-member": op_ideal_member, "reduce-check": op_reduce_check, "string-indep": op_string_indep,
    "freiman": op_freiman, "iso-census": op_iso_census,
}


def run(cfg: ExperimentConfig):
    """(rows, json text, csv text) for one configured operation."""
    if cfg.operation == "verify":
        suite = cfg.get("suite", "all")
        only = cfg.get("criteria")
        only = [int(x) for x in only.split(",")] if only else None
        results = verify(suite, cfg.seed, only)
        return rows_of(results), results_to_json(results, cfg.seed), results
    rows, art = [], {}
    DISPATCH[cfg.operation](cfg, rows, art)
    doc = {"config": asdict(cfg), "passed": all(r.passed for r in rows), "rows": [asdict(r) for r in rows],
           "artifacts": art}
    from .harness import _json_default
    return rows, json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n", None


def build_parser():
    ap = argparse.ArgumentParser(prog="sphgowers", description="Local Gowers norms on quadric level sets over F_p.")
    sub = ap.add_subparsers(dest="operation", required=True)
    for name in OPERATIONS:
        sp = sub.add_parser(name)
        sp.add_argument("params", nargs="*", help="key=value settings (override the config file)")
        sp.add_argument("--config", help="key=value config file with optional [operation] sections")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="report prefix; writes PREFIX.csv and PREFIX.json")
        sp.add_argument("--json", action="store_true", help="print the JSON report instead of CSV")
        if name == "mset":
            sp.add_argument("--standardize", action="store_true")
            sp.add_argument("--codim", action="store_true", help="total co-dimension")
            sp.add_argument("--decompose", metavar="I=0,1", help="I-decomposition over 0-based blocks")
            sp.add_argument("--fubini", action="store_true")
        if name == "verify":
            sp.add_argument("--suite", choices=sorted(SUITES))
    return ap


def config_from_args(args) -> ExperimentConfig:
    params = {}
    if args.config:
        path = Path(args.config)
        params.update(read_config(path.read_text(), args.operation, source=str(path)))
    params.update(parse_assignments(args.params))
    if args.operation == "mset":
        for flag in ("standardize", "fubini"):
            if getattr(args, flag):
                params[flag] = "true"
        if args.codim:
            params["codim"] = "true"
        if args.decompose is not None:
            params["decompose"] = args.decompose.split("=", 1)[-1]
    if args.operation == "verify" and args.suite:
        params["suite"] = args.suite
    seed = args.seed if args.seed is not None else int(params.pop("seed", 0))
    params.pop("seed", None)
    out = args.out or params.pop("out", None)
    params.pop("out", None)
    return ExperimentConfig(args.operation, params, seed, out)


def main(argv=None) -> int:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    # key=value settings may follow the flags
    stray = [x for x in extra if "=" not in x or x.startswith("-")]
    if stray:
        ap.error(f"unrecognized arguments: {' '.join(stray)}")
    args.params = list(args.params) + extra
    try:
        cfg = config_from_args(args)
        rows, doc, results = run(cfg)
    except BudgetError as exc:
        print(f"error: {exc} (needs about {exc.required} {exc.unit})", file=sys.stderr)
        return 2
    except (SphericalGowersError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = rows_to_csv(rows)
    if results is not None:
        for r in results:
            print(r.summary(), file=sys.stderr)
    sys.stdout.write(doc if args.json else text)
    if cfg.out:
        Path(cfg.out + ".csv").write_text(text)
        Path(cfg.out + ".json").write_text(doc)
    return 0 if rows and all(r.passed for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
