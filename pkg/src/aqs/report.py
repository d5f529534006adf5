"""Manifold specs, report orchestration and canonical JSON output."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .connections import (canonical_connection, decomposition_check, local_symmetry_probe,
                          nijenhuis_skew_defect, nonnegative_curvature_probe,
                          parallel_torsion_test, reconstruct_h)
from .lie import LieAlgebraData, jacobi_check
from .patch import builtin_disc_bundle, builtin_flat_disco, disc_lambda_sq
from .quaternionic import (SpnTriple, build_weighted_heisenberg, double_aqs_check,
                           hypo_su2_check, lemma_cmd_check, quaternionic_check,
                           structure_equations_check)
from .structures import (AcmStructure, KahlerFactor, RankNotConstant, classify,
                         classify_patch, constant_curvature_check, eta_einstein_fit,
                         identity_suite, merge_checks, over_patch, product_with_kahler,
                         psi_spectrum, sectional_xi)
from .tensor import QType, TensorError, to_rational

KINDS = ("lie_algebra", "patch_builtin", "product")
BUILTINS = ("disc_bundle", "flat_disco", "heisenberg")
COMMANDS = ("classify", "curvature", "spectrum", "connection", "decompose", "report")

# exit codes, in the order categories are checked
EXIT_OK, EXIT_SPEC, EXIT_MODULE, EXIT_IDENTITY, EXIT_INCONSISTENT = 0, 2, 3, 4, 5


class SpecError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# specs -----------------------------------------------------------------------

@dataclass(frozen=True)
class StructureSpec:
    name: str
    phi: list
    xi: list | None
    eta: list | None


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    scalars: str = "rational"
    dim: int | None = None
    brackets: tuple = ()
    metric: list | None = None
    structures: tuple = ()
    builtin: str | None = None
    params: dict = field(default_factory=dict)
    points: int = 32
    seed: int = 0
    children: tuple = ()

    def echo(self) -> dict:
        out = {"kind": self.kind, "scalars": self.scalars}
        if self.kind == "lie_algebra":
            out.update(dim=self.dim, brackets=[list(b) for b in self.brackets],
                       metric=self.metric,
                       structures=[{"name": s.name, "phi": s.phi, "xi": s.xi, "eta": s.eta}
                                   for s in self.structures])
        elif self.kind == "patch_builtin":
            out.update(builtin=self.builtin, params=self.params, points=self.points, seed=self.seed)
        else:
            out["children"] = [c.echo() for c in self.children]
        return out


def _scalar(v, path: str, scalars: str):
    if scalars == "rational":
        if isinstance(v, bool) or isinstance(v, float):
            raise SpecError(path, f"non-fraction value {v!r} in rational mode")
        if isinstance(v, (int, str)):
            try:
                return str(Fraction(str(v).strip()))
            except (ValueError, ZeroDivisionError):
                pass
        raise SpecError(path, f"not a fraction: {v!r}")
    if isinstance(v, bool):
        raise SpecError(path, f"not a number: {v!r}")
    try:
        x = float(Fraction(v)) if isinstance(v, str) and "/" in v else float(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise SpecError(path, f"not a number: {v!r}") from None
    if not math.isfinite(x):
        raise SpecError(path, "non-finite value")
    return x


def _matrix(m, path: str, scalars: str, shape) -> list:
    arr = np.asarray(m, dtype=object) if isinstance(m, list) else None
    if arr is None or arr.shape != shape:
        raise SpecError(path, f"expected shape {shape}")
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        out[idx] = _scalar(arr[idx], f"{path}" + "".join(f"[{i}]" for i in idx), scalars)
    return out.tolist()


def _int(v, path: str, lo: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecError(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise SpecError(path, f"must be >= {lo}")
    return v


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SpecError(f"{path}.{key}", "missing field")
    return obj[key]


def _check_keys(obj: dict, allowed: set, path: str):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise SpecError(f"{path}.{extra[0]}", "unknown field")


def parse_spec(text: str) -> ManifoldSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return spec_from_obj(data, "$")


def spec_from_obj(data, path: str = "$") -> ManifoldSpec:
    if not isinstance(data, dict):
        raise SpecError(path, "expected an object")
    kind = _require(data, "kind", path)
    if kind not in KINDS:
        raise SpecError(f"{path}.kind", f"must be one of {list(KINDS)}")
    scalars = data.get("scalars", "rational")
    if scalars not in ("rational", "float"):
        raise SpecError(f"{path}.scalars", "must be 'rational' or 'float'")
    if kind == "lie_algebra":
        return _lie_spec(data, path, scalars)
    if kind == "patch_builtin":
        return _patch_spec(data, path, scalars)
    _check_keys(data, {"kind", "scalars", "children"}, path)
    kids = _require(data, "children", path)
    if not isinstance(kids, list) or len(kids) != 2:
        raise SpecError(f"{path}.children", "a product has exactly two children")
    a = spec_from_obj(kids[0], f"{path}.children[0]")
    b = spec_from_obj(kids[1], f"{path}.children[1]")
    if a.kind == "patch_builtin" and a.builtin != "heisenberg" or a.kind == "product":
        raise SpecError(f"{path}.children[0]", "first factor must be a Lie algebra")
    if b.kind != "lie_algebra" or b.brackets or len(b.structures) != 1:
        raise SpecError(f"{path}.children[1]", "second factor must be abelian with one structure J")
    if b.dim % 2:
        raise SpecError(f"{path}.children[1].dim", "Kaehler factor needs even dimension")
    return ManifoldSpec(kind, scalars, children=(a, b))


def _lie_spec(data: dict, path: str, scalars: str) -> ManifoldSpec:
    _check_keys(data, {"kind", "scalars", "dim", "brackets", "metric", "structures"}, path)
    dim = _int(_require(data, "dim", path), f"{path}.dim", 1)
    entries = data.get("brackets", [])
    if not isinstance(entries, list):
        raise SpecError(f"{path}.brackets", "expected a list")
    brackets = []
    for n, e in enumerate(entries):
        p = f"{path}.brackets[{n}]"
        if not isinstance(e, list) or len(e) != 4:
            raise SpecError(p, "expected [i, j, k, value]")
        i, j, k = (_int(e[a], f"{p}[{a}]", 0) for a in range(3))
        for a, idx in enumerate((i, j, k)):
            if idx >= dim:
                raise SpecError(f"{p}[{a}]", f"index {idx} out of range for dim {dim}")
        v = _scalar(e[3], f"{p}[3]", scalars)
        if i == j and Fraction(v) != 0:
            raise SpecError(p, "[e_i, e_i] must vanish")
        brackets.append((i, j, k, v))
    metric = data.get("metric")
    if metric is not None:
        metric = _matrix(metric, f"{path}.metric", scalars, (dim, dim))
    structs = data.get("structures", [])
    if not isinstance(structs, list):
        raise SpecError(f"{path}.structures", "expected a list")
    out = []
    names = set()
    for n, st in enumerate(structs):
        p = f"{path}.structures[{n}]"
        if not isinstance(st, dict):
            raise SpecError(p, "expected an object")
        _check_keys(st, {"name", "phi", "xi", "eta"}, p)
        name = str(st.get("name", f"s{n}"))
        if name in names:
            raise SpecError(f"{p}.name", f"duplicate name {name!r}")
        names.add(name)
        phi = _matrix(_require(st, "phi", p), f"{p}.phi", scalars, (dim, dim))
        xi = st.get("xi")
        eta = st.get("eta")
        xi = None if xi is None else _matrix(xi, f"{p}.xi", scalars, (dim,))
        eta = None if eta is None else _matrix(eta, f"{p}.eta", scalars, (dim,))
        out.append(StructureSpec(name, phi, xi, eta))
    return ManifoldSpec("lie_algebra", scalars, dim, tuple(brackets), metric, tuple(out))


def _patch_spec(data: dict, path: str, scalars: str) -> ManifoldSpec:
    _check_keys(data, {"kind", "scalars", "builtin", "params", "points", "seed"}, path)
    name = _require(data, "builtin", path)
    if name not in BUILTINS:
        raise SpecError(f"{path}.builtin", f"must be one of {list(BUILTINS)}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise SpecError(f"{path}.params", "expected an object")
    points = _int(data.get("points", 32), f"{path}.points", 1)
    seed = _int(data.get("seed", 0), f"{path}.seed", 0)
    pp = f"{path}.params"
    if name == "disc_bundle":
        _check_keys(params, {"c"}, pp)
        c = Fraction(_scalar(params.get("c", "-4"), f"{pp}.c", "rational"))
        if not c < 0:
            raise SpecError(f"{pp}.c", "curvature constant must be negative")
        params = {"c": str(c)}
    elif name == "flat_disco":
        _check_keys(params, {"n", "p"}, pp)
        n = _int(params.get("n", 1), f"{pp}.n", 1)
        p = _int(params.get("p", 1), f"{pp}.p", 1)
        if p > n:
            raise SpecError(f"{pp}.p", "need p <= n")
        params = {"n": n, "p": p}
    else:
        _check_keys(params, {"weights"}, pp)
        w = params.get("weights", ["1"])
        if not isinstance(w, list) or not w:
            raise SpecError(f"{pp}.weights", "expected a non-empty list")
        params = {"weights": [_scalar(x, f"{pp}.weights[{i}]", "rational") for i, x in enumerate(w)]}
        if scalars == "float":
            raise SpecError(f"{path}.scalars", "the heisenberg builtin is exact")
    return ManifoldSpec("patch_builtin", scalars, builtin=name, params=params,
                        points=points, seed=seed)


def spec_dim(spec: ManifoldSpec) -> int:
    if spec.kind == "lie_algebra":
        return spec.dim
    if spec.kind == "product":
        return sum(spec_dim(c) for c in spec.children)
    if spec.builtin == "heisenberg":
        return 4 * len(spec.params["weights"]) + 1
    if spec.builtin == "disc_bundle":
        return 5
    return 4 * spec.params["n"] + 1


# building ----------------------------------------------------------------------

@dataclass
class Built:
    """Structures on a Lie algebra, or a patch structure with its sample set."""

    structures: list = field(default_factory=list)
    patch: object = None
    triple: SpnTriple | None = None
    weights: list | None = None
    disc_c: float | None = None


def _conv(x, exact: bool):
    return np.array([to_rational(v) for v in np.ravel(x)], dtype=object).reshape(np.shape(x)) \
        if exact else np.asarray(x, dtype=float)


def build(spec: ManifoldSpec, tol: float = 1e-8) -> Built:
    if spec.kind == "lie_algebra":
        exact = spec.scalars == "rational"
        alg = LieAlgebraData.from_brackets(spec.dim, spec.brackets, spec.metric, exact=exact)
        jac = jacobi_check(alg)
        if not jac.ok:
            raise TensorError(f"brackets violate the Jacobi identity at {jac.worst}")
        structs = []
        for st in spec.structures:
            if st.xi is None or st.eta is None:
                raise TensorError(f"structure {st.name!r} needs xi and eta")
            structs.append(AcmStructure.on_lie(alg, _conv(st.phi, exact), _conv(st.xi, exact),
                                               _conv(st.eta, exact), st.name, tol))
        return Built(structs)
    if spec.kind == "product":
        base = build(spec.children[0], tol)
        k = spec.children[1]
        J = _conv(k.structures[0].phi, k.scalars == "rational")
        metric = (_conv(k.metric, k.scalars == "rational") if k.metric is not None
                  else KahlerFactor.standard(k.dim, k.scalars == "rational").metric)
        kf = KahlerFactor(metric, J)
        return Built([product_with_kahler(s, kf) for s in base.structures])
    name, p = spec.builtin, spec.params
    if name == "heisenberg":
        _, t = build_weighted_heisenberg(p["weights"])
        t = SpnTriple(tuple(s.with_tol(tol) for s in t.structures))
        return Built(list(t.structures), triple=t, weights=[Fraction(w) for w in p["weights"]])
    if name == "disc_bundle":
        _, ps = builtin_disc_bundle(Fraction(p["c"]), spec.points, spec.seed)
        return Built(patch=ps, disc_c=float(Fraction(p["c"])))
    _, ps = builtin_flat_disco(p["n"], p["p"], spec.points, spec.seed)
    return Built(patch=ps)


# serialization -------------------------------------------------------------------

def plain(x):
    """Numbers, arrays and reports to JSON-ready values (rationals as ``"p/q"``)."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [plain(v) for v in x.tolist()] if x.ndim else plain(x.item())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (QType, Fraction)):
        return str(Fraction(int(x.numerator), int(x.denominator)))
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        return "0.0"
    s = format(x, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def dumps(obj, indent: int = 0) -> str:
    """Canonical JSON: sorted keys, floats with 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dumps(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# sections ------------------------------------------------------------------------

def _checks(d: dict) -> dict:
    return {k: {"ok": v.ok, "violation": v.violation} for k, v in d.items()}


def _rank(r) -> dict:
    return {"p": r.p, "q": r.q, "rk": r.rk, "rank_deta": r.rank_deta,
            "rank_deta_D": r.rank_deta_D, "dim_E": r.dim_E}


def _classification(rep) -> dict:
    return {"flags": rep.flags, "witnesses": rep.witnesses, "rank": _rank(rep.rank),
            "inconsistencies": rep.inconsistencies, "points": rep.points}


def _spectrum(s: AcmStructure) -> list:
    return [[float(v), m] for v, m in psi_spectrum(s).clusters]


def _curvature(s: AcmStructure) -> dict:
    geom = s.geom
    fit = eta_einstein_fit(s)
    out = {"ricci": geom.ricci.val, "scalar": geom.scalar_curvature,
           "eta_einstein": {"mu": fit.mu, "nu": fit.nu, "residual": fit.residual,
                            "eta_einstein": fit.eta_einstein},
           "ric_xi_xi": s.xi.val @ geom.ricci.val @ s.xi.val,
           "K_xi": [k for k, _ in sectional_xi(s)]}
    cc = constant_curvature_check(s)
    out["constant_curvature"] = {"constant": cc.constant, "kappa": cc.kappa,
                                 "violation": cc.violation, "theorem_holds": cc.theorem_holds}
    return out


def _connection(s: AcmStructure, lie: bool) -> dict:
    c = canonical_connection(s)
    pt = parallel_torsion_test(c)
    gb = c.gamma_bar
    out = {"checks": _checks(c.checks), "ok": c.ok,
           "nabla_bar_zero": bool(s.compare(gb).ok),
           "parallel_torsion": {"ok": pt.ok, "levi_civita_violation": pt.levi_civita_route.violation,
                                "nabla_bar_violation": pt.nabla_bar_route.violation},
           "nijenhuis_skew_defect": nijenhuis_skew_defect(s)}
    if lie:
        r = reconstruct_h(s)
        out["uniqueness"] = {"unique": r.unique, "nullity": r.nullity,
                             "matches_formula": bool(r.matches_formula and r.matches_formula.ok)}
        sym = local_symmetry_probe(s.host)
        out["local_symmetry"] = {"max_nabla_R": sym.max_entry, "witness": sym.witness,
                                 "locally_symmetric": sym.locally_symmetric}
        if pt.ok and not classify(s)["cokahler"]:
            pr = nonnegative_curvature_probe(s)
            out["negative_plane"] = {"found": pr.found, "witness": pr.witness}
    return out


def _decompose(s: AcmStructure) -> dict:
    d = decomposition_check(s)

    def block(b):
        return {"dim": b.dim, "bracket_closed": b.bracket_closed, "nabla_closed": b.nabla_closed,
                "eigenvalue": b.eigenvalue}

    return {"ok": d.ok, "kahler": block(d.kahler), "aqs": block(d.aqs),
            "eigen_blocks": [block(b) for b in d.eigen_blocks],
            "eigenvalues_constant": d.eigenvalues_constant, "kahler_flat": d.kahler_flat,
            "kahler_phi_invariant": d.kahler_phi_invariant,
            "aqs_maximal_rank": d.aqs_maximal_rank}


def _triple(t: SpnTriple, weights) -> dict:
    d = double_aqs_check(t)
    out = {"quaternionic": quaternionic_check(t).ok, "double_aqs_sasakian": d.ok,
           "double_aqs_checks": _checks(d.checks),
           "structure_equations": _checks(structure_equations_check(t)),
           "lemma_cmd": lemma_cmd_check(t).ok}
    if t.dim == 5:
        h = hypo_su2_check(t)
        out["su2"] = {"compatible": h.su2_compatible.ok, "k_contact_hypo": h.k_contact_hypo,
                      "contact_calabi_yau": h.contact_calabi_yau,
                      "lie_xi_phi1_zero": h.lie_xi_phi1_zero.ok,
                      "lie_xi_phi2_zero": h.lie_xi_phi2_zero.ok}
    if weights is not None:
        s = t[0]
        computed = s.xi.val @ s.geom.ricci.val @ s.xi.val
        total = sum(w * w for w in weights)
        out["ric_xi_xi"] = {"computed": computed, "expected_4_sum_sq": 4 * total,
                            "tabulated_minus_8_sum_sq": -8 * total,
                            "discrepancy_with_tabulated": bool(computed != -8 * total)}
    return out


# orchestration -----------------------------------------------------------------

@dataclass(frozen=True)
class ReportOptions:
    command: str = "report"
    tol: float = 1e-8
    seed: int = 0


def _wants(cmd: str, section: str) -> bool:
    return cmd == "report" or cmd == section


def run_report(spec: ManifoldSpec, options: ReportOptions = ReportOptions()) -> dict:
    if options.command not in COMMANDS:
        raise ValueError(f"unknown command {options.command!r}")
    errors, identity_failures, inconsistencies = [], [], []
    out = {"tool": {"name": "aqs", "version": __version__}, "command": options.command,
           "seed": options.seed, "tol": options.tol, "spec": spec.echo(), "dim": spec_dim(spec)}

    def guard(where: str, fn):
        try:
            return fn()
        except (TensorError, RankNotConstant) as exc:
            errors.append({"where": where, "error": type(exc).__name__, "message": str(exc)})
            return None

    built = guard("build", lambda: build(spec, options.tol))
    structures = {}
    if built is not None and built.patch is None:
        for s in built.structures:
            structures[s.name] = _lie_sections(s, options, guard, identity_failures, inconsistencies)
        if built.triple is not None and _wants(options.command, "classify"):
            out["triple"] = guard("triple", lambda: _triple(built.triple, built.weights))
    elif built is not None:
        structures[built.patch.patch.name] = _patch_sections(built, options, guard,
                                                             identity_failures, inconsistencies)
    out["structures"] = structures
    if errors:
        category = EXIT_MODULE
    elif identity_failures:
        category = EXIT_IDENTITY
    elif inconsistencies:
        category = EXIT_INCONSISTENT
    else:
        category = EXIT_OK
    out["summary"] = {"errors": errors, "identity_failures": identity_failures,
                      "inconsistencies": inconsistencies, "exit_code": category}
    return plain(out)


def _lie_sections(s, options, guard, identity_failures, inconsistencies) -> dict:
    cmd = options.command
    sec = {}
    rep = guard(f"{s.name}.classify", lambda: classify(s))
    if rep is None:
        return sec
    aqs = rep["anti_quasi_sasakian"]
    if _wants(cmd, "classify"):
        sec["classification"] = _classification(rep)
        inconsistencies.extend(f"{s.name}: {i}" for i in rep.inconsistencies)
    if _wants(cmd, "spectrum"):
        sec["spectrum"] = guard(f"{s.name}.spectrum", lambda: _spectrum(s))
    if _wants(cmd, "curvature"):
        sec["curvature"] = guard(f"{s.name}.curvature", lambda: _curvature(s))
    if aqs and _wants(cmd, "connection"):
        sec["connection"] = guard(f"{s.name}.connection", lambda: _connection(s, True))
    if aqs and _wants(cmd, "decompose"):
        pt = guard(f"{s.name}.parallel", lambda: parallel_torsion_test(canonical_connection(s)))
        if pt is not None and pt.ok:
            sec["decomposition"] = guard(f"{s.name}.decompose", lambda: _decompose(s))
        elif pt is not None:
            sec["decomposition"] = {"skipped": "nabla_bar psi does not vanish"}
    if aqs and cmd == "report":
        ids = guard(f"{s.name}.identities", lambda: identity_suite(s))
        if ids is not None:
            sec["identities"] = _checks(ids)
            identity_failures.extend(f"{s.name}: {k}" for k, v in ids.items() if not v.ok)
    return sec


def _patch_sections(built: Built, options, guard, identity_failures, inconsistencies) -> dict:
    ps, cmd, tol = built.patch, options.command, options.tol
    sec = {}
    pts = ps.samples
    rep = guard("patch.classify", lambda: classify_patch(ps, tol=tol))
    if rep is None:
        return sec
    aqs = rep["anti_quasi_sasakian"]
    if _wants(cmd, "classify"):
        sec["classification"] = _classification(rep)
        inconsistencies.extend(f"patch: {i}" for i in rep.inconsistencies)
    if _wants(cmd, "spectrum"):
        rows = []
        for x, s in zip(pts, over_patch(ps, lambda s: s, tol=tol)):
            row = {"point": x, "psi_sq": _spectrum(s)}
            if built.disc_c is not None:
                row["expected_minus_lambda_sq"] = -disc_lambda_sq(built.disc_c, x)
            rows.append(row)
        sec["spectrum"] = rows
    if _wants(cmd, "curvature"):
        def curv(s):
            fit = eta_einstein_fit(s)
            return {"mu": fit.mu, "nu": fit.nu, "residual": fit.residual,
                    "scalar": s.geom.scalar_curvature}
        rows = guard("patch.curvature", lambda: over_patch(ps, curv, tol=tol))
        if rows is not None:
            sec["curvature"] = [dict(r, point=x) for r, x in zip(rows, pts)]
    if aqs and _wants(cmd, "connection"):
        def conn(s):
            c = canonical_connection(s)
            d = dict(c.checks)
            d["parallel_torsion"] = parallel_torsion_test(c).levi_civita_route
            return d
        res = guard("patch.connection", lambda: over_patch(ps, conn, tol=tol))
        if res is not None:
            merged = merge_checks(res)
            sec["connection"] = {"checks": _checks(merged),
                                 "parallel_torsion": merged.pop("parallel_torsion").ok}
    if aqs and _wants(cmd, "decompose"):
        sec["decomposition"] = {"skipped": "decomposition is checked on Lie-algebra hosts only"}
    if aqs and cmd == "report":
        res = guard("patch.identities", lambda: over_patch(ps, identity_suite, tol=tol))
        if res is not None:
            merged = merge_checks(res)
            sec["identities"] = _checks(merged)
            identity_failures.extend(f"patch: {k}" for k, v in merged.items() if not v.ok)
    return sec


def render(report: dict) -> str:
    return dumps(report) + "\n"
