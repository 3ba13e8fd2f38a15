"""Model files: JSON with rationals written as "p/q" strings."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .geometry import Branch, CantorModel, ModelError, RateBounds, classical_model
from .potential import ClassicalPotential, PotentialError, TablePotential
from .sft import TransitionError, TransitionSet


class ModelFileError(ValueError):
    def __init__(self, path: str, msg: str):
        self.path = path
        super().__init__(f"{path}: {msg}")


def _rat(x, path):
    try:
        if isinstance(x, bool):
            raise ValueError
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x.strip())
    except (ValueError, ZeroDivisionError):
        pass
    raise ModelFileError(path, f"expected a rational 'p/q' string, got {x!r}")


def _branch(d, path):
    if not isinstance(d, dict) or "coeffs" not in d:
        raise ModelFileError(path, "branch needs 'coeffs'")
    cs = d["coeffs"]
    if not isinstance(cs, list) or len(cs) not in (2, 4):
        raise ModelFileError(f"{path}.coeffs", "need [a, b, c, d] (Moebius) or [ratio, offset] (affine)")
    cs = [_rat(c, f"{path}.coeffs[{i}]") for i, c in enumerate(cs)]
    if len(cs) == 2:
        cs = [cs[0], cs[1], Fraction(0), Fraction(1)]
    det = cs[0] * cs[3] - cs[1] * cs[2]
    orient = d.get("orientation", 1 if det > 0 else -1)
    if orient not in (1, -1):
        raise ModelFileError(f"{path}.orientation", "must be 1 or -1")
    return Branch(tuple(cs), orient)


def _branches(items, k, path):
    base, pairs = {}, {}
    for i, d in enumerate(items):
        p = f"{path}[{i}]"
        br = _branch(d, p)
        if "pair" in d:
            a, b = d["pair"]
            pairs[(int(a), int(b))] = br
        elif "letter" in d:
            base[int(d["letter"])] = br
        else:
            raise ModelFileError(p, "branch needs 'letter' or 'pair'")
    missing = [a for a in range(k) if a not in base]
    if missing:
        raise ModelFileError(path, f"no base branch for letters {missing}")
    return tuple(base[a] for a in range(k)), pairs


def model_from_dict(d: dict):
    """(CantorModel, potential) from a parsed model file."""
    if not isinstance(d, dict):
        raise ModelFileError("$", "top level must be an object")
    geo = d.get("geometry")
    if not isinstance(geo, dict) or "kind" not in geo:
        raise ModelFileError("$.geometry", "missing geometry with 'kind'")
    kind = geo["kind"]
    try:
        if kind == "cf":
            N = int(geo.get("digit_cap", d.get("alphabet", 0)))
            model = classical_model(N)
            if d.get("alphabet", N) != N:
                raise ModelFileError("$.alphabet", "cf alphabet size must equal digit_cap")
            tr = d.get("transitions", "full")
            if tr != "full":
                T = TransitionSet.from_pairs(N, tr)
                model = CantorModel(T=T, kind="cf", rates=model.rates, digit_cap=N, c_lo=model.c_lo,
                                    c_hi=model.c_hi, mixing=bool(d.get("mixing", False)), name="cf-file")
        elif kind == "branches":
            k = d.get("alphabet")
            if not isinstance(k, int) or k < 1:
                raise ModelFileError("$.alphabet", "positive integer required")
            tr = d.get("transitions", "full")
            T = TransitionSet.full(k) if tr == "full" else TransitionSet.from_pairs(k, tr)
            base, pairs = _branches(geo.get("branches", []), k, "$.geometry.branches")
            stable = ()
            if "stable_branches" in geo:
                stable, _ = _branches(geo["stable_branches"], k, "$.geometry.stable_branches")
            rb = d.get("rate_bounds")
            if not isinstance(rb, dict):
                raise ModelFileError("$.rate_bounds", "required for branch models")
            rates = RateBounds(*(_rat(rb.get(key), f"$.rate_bounds.{key}") for key in ("l1u", "l2u", "l1s", "l2s")))
            model = CantorModel(T=T, kind="branches", rates=rates, branches=base, pair_branches=tuple(sorted(pairs.items())),
                                stable_branches=stable, mixing=bool(d.get("mixing", False)), name="branches-file")
        else:
            raise ModelFileError("$.geometry.kind", f"unknown kind {kind!r}")
        model.validate()
    except (ModelError, TransitionError) as e:
        raise ModelFileError("$.geometry", str(e)) from e
    pot = d.get("potential", {"kind": "classical"})
    pk = pot.get("kind")
    if pk == "classical":
        if model.kind != "cf":
            raise ModelFileError("$.potential.kind", "classical potential needs cf geometry")
        p = ClassicalPotential()
    elif pk == "table":
        vals = {}
        for key, v in pot.get("values", {}).items():
            try:
                word = tuple(int(x) for x in str(key).split(","))
            except ValueError:
                raise ModelFileError(f"$.potential.values[{key!r}]", "keys are comma-separated letters") from None
            vals[word] = _rat(v, f"$.potential.values[{key!r}]")
        try:
            p = TablePotential(int(pot.get("radius", 0)), vals, _rat(pot.get("kappa", "0"), "$.potential.kappa"),
                               _rat(pot.get("rho", "1/2"), "$.potential.rho"))
            p.validate(model.T)
        except PotentialError as e:
            raise ModelFileError("$.potential", str(e)) from e
    else:
        raise ModelFileError("$.potential.kind", f"unknown potential kind {pk!r}")
    return model, p


def load_model(path: str, digit_cap: int | None = None):
    """Model file path, or the built-in 'classical' with a digit cap."""
    if path == "classical":
        if digit_cap is None:
            raise ModelFileError("--digit-cap", "required for the built-in classical model")
        return classical_model(digit_cap), ClassicalPotential(), {"builtin": "classical", "digit_cap": digit_cap}
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelFileError("$", f"invalid JSON: {e}") from e
    model, p = model_from_dict(raw)
    return model, p, raw


def content_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()[:16]
