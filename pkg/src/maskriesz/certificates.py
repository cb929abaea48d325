"""Certificates: JSON records that can be regenerated from their own parameters.

A certificate has four top-level fields:

* ``kind`` and ``schema_version``;
* ``parameters`` holding every input needed to recompute the result;
* ``results`` holding the values produced from those inputs;
* ``provenance`` holding the tool version, a timestamp, wall time and thread count.

Verification never trusts ``results``. It recomputes them from
``parameters`` and compares: strings, booleans, integers and nulls must
match exactly, and floats must agree to a relative tolerance.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .errors import InvalidInput, MaskRieszError, VerificationError
from .grid import GridSupport, as_fraction, format_fraction

SCHEMA_VERSION = "1.0"
SUPPORTED_SCHEMAS = ("1.0",)
KINDS = ("construction", "classification", "conjecture_scan", "tri_interval", "sampling_report", "fixture")
REL_TOL = 1e-8
ABS_FLOOR = 1e-12
# the averaging bound is read with the modulus of det(A)
GUARANTEE_FORM = "R*|det(A)|/K!"


# ---------------------------------------------------------------------------
# encoding helpers


def frac_str(q) -> str:
    return format_fraction(as_fraction(q))


def cells_to_bits(n: int, cells) -> list[int]:
    cells = set(int(c) for c in cells)
    return [int(i in cells) for i in range(n)]


def bits_to_cells(bits) -> frozenset:
    if any(b not in (0, 1) for b in bits):
        raise InvalidInput(f"mask bits must be 0 or 1: {bits}")
    return frozenset(i for i, b in enumerate(bits) if b)


def cplx(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def jsonable(x: Any) -> Any:
    """Convert numpy scalars, tuples, sets and Fractions to plain JSON types."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(jsonable(v) for v in x)
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return cplx(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    return x


# ---------------------------------------------------------------------------
# certificate object


@dataclass
class Certificate:
    kind: str
    parameters: dict
    results: dict
    provenance: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "parameters": jsonable(self.parameters),
            "results": jsonable(self.results),
            "provenance": jsonable(self.provenance),
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.to_text())
        tmp.replace(path)
        return path

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise VerificationError(f"certificate is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise VerificationError("certificate must be a JSON object")
        for key in ("schema_version", "kind", "parameters", "results"):
            if key not in data:
                raise VerificationError(f"certificate lacks field {key!r}")
        if data["schema_version"] not in SUPPORTED_SCHEMAS:
            raise VerificationError(f"unsupported schema_version {data['schema_version']!r}")
        if data["kind"] not in KINDS:
            raise VerificationError(f"unknown certificate kind {data['kind']!r}")
        if not isinstance(data["parameters"], dict) or not isinstance(data["results"], dict):
            raise VerificationError("parameters and results must be JSON objects")
        return cls(data["kind"], data["parameters"], data["results"], data.get("provenance") or {},
                   data["schema_version"])

    @classmethod
    def read(cls, path) -> "Certificate":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise VerificationError(f"cannot read certificate: {exc}") from None
        return cls.from_text(text)


def make_provenance(wall_time: float, threads: int) -> dict:
    return {
        "tool": "maskriesz",
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "wall_time": round(float(wall_time), 6),
        "threads": int(threads),
    }


# ---------------------------------------------------------------------------
# regeneration, one function per kind


def _classification_results(m, exact: bool = True) -> dict:
    from .linalg import det
    from .masked import classify_system

    cls = classify_system(m, exact=exact)
    out = {"shape": list(m.shape), **cls.to_json()}
    if m.shape[0] == m.shape[1]:
        out["det_modulus"] = abs(det(m.matrix))
    return out


def _compute_classification(p: dict, workers: int) -> dict:
    from .masked import build_masked_matrix

    n = int(p["N"])
    offsets = [as_fraction(c) for c in p["offsets"]]
    masks = [bits_to_cells(b) for b in p["masks"]]
    return _classification_results(build_masked_matrix(n, offsets, masks), bool(p.get("exact", True)))


def _construction_common(con) -> dict:
    return {
        "rho": list(con.rho.one_based()),
        "offsets": [int(c) for c in con.offsets],
        "det_modulus": con.det_modulus,
        "guarantee": con.lemma.guarantee,
        "guarantee_form": GUARANTEE_FORM,
        "R": con.lemma.R,
        "search_verdict": con.classification.verdict,
    }


def _claimed_check(n: int, rho_one_based, masks) -> dict:
    from .masked import build_masked_matrix
    from .permsearch import PermutationAssignment

    rho = PermutationAssignment.from_one_based(rho_one_based)
    offsets = [(v + 1) % n for v in rho.map]
    return _classification_results(build_masked_matrix(n, offsets, masks))


def _compute_construction(p: dict, workers: int) -> dict:
    from .linalg import fourier_matrix
    from .permsearch import corollary_construct, lemma_search, theorem1_construct

    mode = p.get("mode", "theorem1")
    search = p.get("search")
    if mode == "theorem1":
        n = int(p["N"])
        cells = [int(c) for c in p["cells"]]
        masks = [bits_to_cells(b) for b in p["masks"]]
        con = theorem1_construct(n, cells, masks, mode=search, workers=workers)
        out = _construction_common(con)
        if p.get("rho") is not None:
            out["claimed"] = _claimed_check(n, p["rho"], masks)
        return out
    if mode == "corollary":
        from .grid import parse_support_line

        sets = [parse_support_line(", ".join(s)) for s in p["sets"]]
        res = corollary_construct(sets, mode=search, workers=workers)
        con = res.construction
        out = _construction_common(con)
        out.update({
            "N": res.modulus,
            "supports": [cells_to_bits(res.modulus, s.cells) for s in res.supports],
            "assignment": [a + 1 for a in res.assignment],
            "frequencies": [f.offset_strings() for f in res.frequencies],
        })
        if p.get("rho") is not None:
            masks = [res.supports[o].cells for o in res.assignment]
            out["claimed"] = _claimed_check(res.modulus, p["rho"], masks)
        return out
    if mode == "lemma":
        n = int(p["N"])
        mask = np.array(p["mask"], dtype=int)
        k = mask.shape[0]
        a = fourier_matrix(n, rows=np.arange(1, k + 1))[:, :k]
        res = lemma_search(a, mask, search or "exhaustive", workers=workers)
        return {"rho": list(res.rho.one_based()), "det_modulus": res.det_modulus,
                "guarantee": res.guarantee, "guarantee_form": GUARANTEE_FORM, "R": res.R,
                "meets_guarantee": bool(res.det_modulus >= res.guarantee - 1e-9)}
    raise InvalidInput(f"unknown construction mode {mode!r}")


def _compute_scan(p: dict, workers: int) -> dict:
    from .conjectures import conjecture1_scan, conjecture2_scan, hierarchical_noninteger_check

    conj = p["conjecture"]
    n = int(p["N"])
    rho = None if p.get("rho") is None else tuple(int(v) for v in p["rho"])
    if conj == "one":
        v = conjecture1_scan(n, rho, strategy=p.get("strategy", "exhaustive"), seed=int(p.get("seed", 0)),
                             workers=workers, max_batches=int(p.get("max_batches", 256)))
    elif conj == "two":
        v = conjecture2_scan(n, rho, workers=workers)
    elif conj == "hierarchy":
        v = hierarchical_noninteger_check(n, int(p["P"]))
    else:
        raise InvalidInput(f"unknown conjecture {conj!r}")
    return v.results_json()


def _tri_rows(rows) -> list:
    return [{"branch": r.branch, "membership": [sorted(m) for m in r.membership],
             "case": r.tag.tag, "k": r.tag.k} for r in rows]


def _compute_tri(p: dict, workers: int) -> dict:
    from . import tri_interval as ti
    from .grid import CosetSystem

    mode = p["mode"]
    if mode == "table":
        rows = ti.case_table()
        sweep = ti.sweep_canonical(3)
        return {"rows": _tri_rows(rows), "canonical_n3_verdicts": [c.verdict for _, c in sweep]}
    if mode == "classify":
        cfg = ti.TripleConfig(tuple(p["membership"]), p.get("alphas"), frozenset(p.get("empty", ())))
        tag = ti.classify_triple(cfg)
        out = {"case": tag.tag, "k": tag.k, "branch": tag.proof_branch}
        if cfg.alphas is not None:
            out["lambda"] = ti.paley_wiener_lambda(cfg.alphas)
        return out
    if mode == "cross_check":
        n = int(p["N"])
        intervals = [GridSupport(n, bits_to_cells(b)) for b in p["intervals"]]
        freqs = [CosetSystem(n, tuple(as_fraction(c) for c in f)) for f in p["freqs"]]
        m = ti.induced_system(n, intervals, freqs, p["membership"])
        out = _classification_results(m)
        alphas = ti.periodic_alphas(n, intervals, freqs)
        out["alphas"] = list(alphas)
        return out
    raise InvalidInput(f"unknown tri_interval mode {mode!r}")


def _compute_sampling(p: dict, workers: int) -> dict:
    from .permsearch import PermutationAssignment
    from .sampling import SpectrumFunction, build_filters, error_report

    n = int(p["N"])
    masks = [bits_to_cells(b) for b in p["masks"]]
    rho = None if p.get("rho") is None else PermutationAssignment(tuple(p["rho"]))
    bank = build_filters(n, masks, rho, workers=workers)
    fhat = SpectrumFunction.random(n, int(p["grid"]), int(p["seed"]))
    rows = error_report(fhat, bank, [int(m) for m in p["mtruncs"]])
    return {
        "rho": list(bank.rho.map),
        "G": [[cplx(g) for g in row] for row in bank.G],
        "errors": [{"mtrunc": m, "relative_error": e} for m, e in rows],
    }


def _compute_fixture(p: dict, workers: int) -> dict:
    from .fixtures import run_fixture

    return run_fixture(p["id"], workers=workers)


COMPUTE: dict[str, Callable[[dict, int], dict]] = {
    "classification": _compute_classification,
    "construction": _compute_construction,
    "conjecture_scan": _compute_scan,
    "tri_interval": _compute_tri,
    "sampling_report": _compute_sampling,
    "fixture": _compute_fixture,
}


def build_certificate(kind: str, parameters: dict, workers: int = 1) -> Certificate:
    """Run the computation described by ``parameters`` and wrap it as a certificate."""
    if kind not in COMPUTE:
        raise InvalidInput(f"unknown certificate kind {kind!r}")
    params = jsonable(parameters)
    t0 = time.perf_counter()
    results = jsonable(COMPUTE[kind](params, workers))
    return Certificate(kind, params, results, make_provenance(time.perf_counter() - t0, workers))


# ---------------------------------------------------------------------------
# verification


def _close(a: float, b: float, rtol: float, floor: float) -> bool:
    if math.isnan(a) or math.isnan(b):
        return False
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), floor)


def compare(recorded, recomputed, path: str = "results", rtol: float = REL_TOL,
            floor: float = ABS_FLOOR) -> list[str]:
    """Differences between two JSON trees; floats compare with tolerance."""
    out: list[str] = []
    if isinstance(recorded, dict) and isinstance(recomputed, dict):
        for key in sorted(set(recorded) | set(recomputed)):
            if key not in recorded:
                out.append(f"{path}.{key}: missing from certificate")
            elif key not in recomputed:
                out.append(f"{path}.{key}: not produced by regeneration")
            else:
                out.extend(compare(recorded[key], recomputed[key], f"{path}.{key}", rtol, floor))
        return out
    if isinstance(recorded, list) and isinstance(recomputed, list):
        if len(recorded) != len(recomputed):
            return [f"{path}: length {len(recorded)} recorded, {len(recomputed)} recomputed"]
        for i, (a, b) in enumerate(zip(recorded, recomputed)):
            out.extend(compare(a, b, f"{path}[{i}]", rtol, floor))
        return out
    is_num = lambda v: isinstance(v, (int, float)) and not isinstance(v, bool)
    if is_num(recorded) and is_num(recomputed) and (isinstance(recorded, float) or isinstance(recomputed, float)):
        if not _close(float(recorded), float(recomputed), rtol, floor):
            out.append(f"{path}: recorded {recorded!r}, recomputed {recomputed!r}")
        return out
    if type(recorded) is not type(recomputed) or recorded != recomputed:
        out.append(f"{path}: recorded {recorded!r}, recomputed {recomputed!r}")
    return out


@dataclass
class VerificationReport:
    ok: bool
    mismatches: list
    kind: str

    def summary(self) -> str:
        if self.ok:
            return f"verified ({self.kind})"
        return "\n".join([f"MISMATCH ({self.kind}): {len(self.mismatches)} difference(s)"] + self.mismatches)


def verify_certificate(path_or_cert, workers: int = 1, rtol: float = REL_TOL) -> VerificationReport:
    """Regenerate a certificate's results and compare them with the recorded ones.

    Unreadable or malformed files raise VerificationError; a certificate whose
    parameters cannot be regenerated at all counts as a mismatch.
    """
    cert = path_or_cert if isinstance(path_or_cert, Certificate) else Certificate.read(path_or_cert)
    try:
        recomputed = jsonable(COMPUTE[cert.kind](cert.parameters, workers))
    except MaskRieszError as exc:
        return VerificationReport(False, [f"regeneration failed: {type(exc).__name__}: {exc}"], cert.kind)
    except (KeyError, TypeError) as exc:
        raise VerificationError(f"parameters are incomplete: {exc}") from None
    diffs = compare(cert.results, recomputed, rtol=rtol)
    return VerificationReport(not diffs, diffs, cert.kind)


def strip_volatile(text: str) -> str:
    """Certificate text with timestamp and wall_time removed, for determinism checks."""
    data = json.loads(text)
    prov = data.get("provenance", {})
    prov.pop("timestamp", None)
    prov.pop("wall_time", None)
    return json.dumps(data, sort_keys=True, indent=2)
