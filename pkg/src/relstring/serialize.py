"""Canonical JSON/CSV serialization for all data objects and reports.

Numbers are written as shortest round-trip decimals (Python repr), keys are
sorted, and row order is fixed, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json

import numpy as np

from .curves import InitialData, NullPair
from .curved import ReducedBackgroundData
from .errors import StructuralError
from .periodic import LinearPlusPeriodic, PeriodicFunction, TWO_PI


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _coeff_block(pf):
    return {"cos": pf.cos_coeffs.tolist(), "sin": pf.sin_coeffs.tolist()}


def _coeffs_from_block(block, period):
    return PeriodicFunction(period, np.asarray(block["cos"], dtype=float),
                            np.asarray(block["sin"], dtype=float))


def initial_data_to_dict(data):
    return {
        "kind": "initial_data",
        "period": data.period,
        "dimension": data.dim,
        "alpha_coeffs": _coeff_block(data.alpha),
        "beta_coeffs": _coeff_block(data.beta),
        "singular_preset": data.singular_preset,
    }


def null_pair_to_dict(pair):
    return {
        "kind": "null_pair",
        "period": pair.period,
        "winding_a": pair.winding_a,
        "winding_b": pair.winding_b,
        "psi_coeffs": _coeff_block(pair.psi.periodic),
        "psi_offset": float(pair.psi.offset),
        "psitilde_coeffs": _coeff_block(pair.psitilde.periodic),
        "psitilde_offset": float(pair.psitilde.offset),
        "singular_preset": pair.singular_preset,
    }


def reduced_background_to_dict(data):
    return {
        "kind": "reduced_background",
        "period": data.period,
        "m0_coeffs": _coeff_block(data.m0),
        "n0_coeffs": _coeff_block(data.n0),
        "u0_coeffs": _coeff_block(data.u0),
        "v0_coeffs": _coeff_block(data.v0),
    }


def object_from_dict(doc):
    """Rebuild a data object from its `kind`-discriminated document."""
    kind = doc.get("kind")
    if kind == "initial_data":
        L = float(doc["period"])
        return InitialData(_coeffs_from_block(doc["alpha_coeffs"], L),
                           _coeffs_from_block(doc["beta_coeffs"], L),
                           singular_preset=bool(doc.get("singular_preset", False)))
    if kind == "null_pair":
        L = float(doc["period"])
        d_a, d_b = int(doc["winding_a"]), int(doc["winding_b"])
        psi = LinearPlusPeriodic(TWO_PI * d_a / L, float(doc.get("psi_offset", 0.0)),
                                 _coeffs_from_block(doc["psi_coeffs"], L))
        psitilde = LinearPlusPeriodic(TWO_PI * d_b / L,
                                      float(doc.get("psitilde_offset", 0.0)),
                                      _coeffs_from_block(doc["psitilde_coeffs"], L))
        return NullPair(psi, psitilde, L, d_a, d_b,
                        singular_preset=bool(doc.get("singular_preset", False)))
    if kind == "reduced_background":
        L = float(doc["period"])
        return ReducedBackgroundData(
            _coeffs_from_block(doc["m0_coeffs"], L),
            _coeffs_from_block(doc["n0_coeffs"], L),
            _coeffs_from_block(doc["u0_coeffs"], L),
            _coeffs_from_block(doc["v0_coeffs"], L))
    raise StructuralError(f"unknown document kind {kind!r}")


def event_to_dict(event, model=None):
    """Singularity report: event coordinates, lift data, and motion model."""
    doc = {
        "t0": event.t0,
        "s0": event.s0,
        "kind": event.kind,
        "zeta": event.zeta,
        "eta": event.eta,
        "zeta_prime": event.zeta_prime,
        "eta_prime": event.eta_prime,
        "residual": event.residual,
        "position": None if event.position is None else list(map(float, event.position)),
    }
    if model is not None:
        doc.update({
            "p": model.p, "q": model.q, "u3": model.u3, "k0": model.k0,
            "motion": model.motion,
        })
    return doc


def certificate_to_dict(cert, j=None, load=None):
    if cert is None:
        return {"issued": False, "j": j, "load": load,
                "T": None, "floor": None}
    return {"issued": True, "j": cert.j, "load": cert.load,
            "T": cert.T, "floor": cert.floor,
            "gauge_length": cert.gauge_length, "domain": list(cert.domain)}


def write_csv(path, header, rows):
    """Plain CSV with repr-formatted floats (shortest round trip)."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_worldsheet_csv(path, data, table):
    cols = ["t", "s", "x", "y"] + (["z"] if data.dim == 3 else [])
    write_csv(path, cols, table)


def write_trajectory_csv(path, trajectory):
    header = ["tau", "w", "w_prime", "u_max", "u_min", "em2u_max"]
    rows = [(st.tau, st.w, st.w_prime, st.u_max, st.u_min, st.em2u_max)
            for st in trajectory.states]
    write_csv(path, header, rows)


def write_curve3_csv(path, curve, n=1024):
    s = np.arange(n) * (curve.length / n)
    pos = curve(s)
    rows = np.column_stack([s, pos])
    write_csv(path, ["s", "x", "y", "z"], rows)


def patch_to_csv(path, patch):
    rows = []
    for i, t in enumerate(patch.t):
        for j, s in enumerate(patch.s):
            rows.append((t, s, patch.xy[i, j, 0], patch.xy[i, j, 1]))
    write_csv(path, ["t", "s", "x", "y"], rows)


def patch_from_csv(path):
    from .gauge import ArbitrarySurfacePatch
    raw = np.loadtxt(path, delimiter=",", skiprows=1)
    t_vals = np.unique(raw[:, 0])
    s_vals = np.unique(raw[:, 1])
    nt, ns = t_vals.size, s_vals.size
    if raw.shape[0] != nt * ns:
        raise StructuralError("patch CSV is not a full rectangular grid")
    order = np.lexsort((raw[:, 1], raw[:, 0]))
    xy = raw[order, 2:4].reshape(nt, ns, 2)
    ds = s_vals[1] - s_vals[0]
    period = float(s_vals[-1] - s_vals[0] + ds)
    return ArbitrarySurfacePatch(t_vals, s_vals, xy, period)
