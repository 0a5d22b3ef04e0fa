"""Lossless JSON serialization of codebooks.

Coordinates are written as hex-float strings (float.hex round-trips every
finite double exactly), scalar parameters as plain JSON numbers, which
Python also round-trips exactly.  Serialization is canonical (sorted keys,
fixed separators) so identical codes produce identical bytes.
"""

from __future__ import annotations

import json

import numpy as np

from .galaxy import (
    GalaxyCode,
    GalaxyNode,
    GalaxyParams,
    GalaxyTree,
    flatten_codewords,
)
from .spherical import SphericalCode

__all__ = ["FORMAT_VERSION", "serialize", "deserialize", "save", "load"]

FORMAT_VERSION = 1


def _enc_point(p: np.ndarray) -> list[str]:
    return [float(x).hex() for x in p]


def _dec_point(coords: list[str]) -> np.ndarray:
    return np.asarray([float.fromhex(c) for c in coords], dtype=np.float64)


def _enc_node(node: GalaxyNode) -> dict:
    out = {
        "center": _enc_point(node.center),
        "height": node.height,
        "radius": node.code.radius,
        "seed": node.code.seed,
        "saturated": node.code.saturated,
        "points": [_enc_point(p) for p in node.code.points],
    }
    if node.children:
        out["children"] = [_enc_node(c) for c in node.children]
    return out


def _dec_node(obj: dict, theta: float) -> GalaxyNode:
    center = _dec_point(obj["center"])
    points = np.asarray([_dec_point(p) for p in obj["points"]])
    code = SphericalCode(
        center=center,
        radius=float(obj["radius"]),
        theta=theta,
        points=points,
        seed=int(obj["seed"]),
        saturated=bool(obj["saturated"]),
    )
    node = GalaxyNode(center=center, height=int(obj["height"]), code=code)
    node.children = [_dec_node(c, theta) for c in obj.get("children", [])]
    return node


def _params_dict(p: GalaxyParams) -> dict:
    return {
        "n": p.n,
        "power": p.power,
        "b": p.b,
        "k": p.k,
        "theta": p.theta,
        "m_per_level": p.m_per_level,
        "sigma": p.sigma,
        "master_seed": p.master_seed,
        "t_bar": p.t_bar,
        "r_min_coeff": p.r_min_coeff,
        "enforce_cross_galaxy_margin": p.enforce_cross_galaxy_margin,
        "max_roots": p.max_roots,
        "saturation_probes": p.saturation_probes,
        "max_attempts": p.max_attempts,
        # derived values recorded for inspection; reconstruction recomputes them
        "r": p.r,
        "r_nominal": p.r_nominal,
        "t_bar_overridden": p.t_bar_overridden,
        "spacing": p.spacing,
        "spacing_nominal": p.spacing_nominal,
        "extent": p.extent,
    }


def serialize(code: GalaxyCode) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "params": _params_dict(code.params),
        "roots": [_enc_point(r) for r in code.roots],
        "trees": [_enc_node(t.root) for t in code.trees],
        "achieved": {
            "num_roots": len(code.roots),
            "num_codewords": len(code.codewords),
            "packing_saturated": code.packing_saturated,
            "degraded": code.degraded,
        },
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def deserialize(text: str) -> GalaxyCode:
    doc = json.loads(text)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported code file format_version {version!r}")
    pd = doc["params"]
    params = GalaxyParams(
        n=int(pd["n"]),
        power=float(pd["power"]),
        b=float(pd["b"]),
        k=int(pd["k"]),
        theta=float(pd["theta"]),
        m_per_level=int(pd["m_per_level"]),
        sigma=float(pd["sigma"]),
        master_seed=int(pd["master_seed"]),
        t_bar=int(pd["t_bar"]),
        r_min_coeff=None if pd["r_min_coeff"] is None else float(pd["r_min_coeff"]),
        enforce_cross_galaxy_margin=bool(pd["enforce_cross_galaxy_margin"]),
        max_roots=int(pd["max_roots"]),
        saturation_probes=int(pd["saturation_probes"]),
        max_attempts=int(pd["max_attempts"]),
    )
    roots = [_dec_point(r) for r in doc["roots"]]
    trees = []
    degraded = False
    for i, tobj in enumerate(doc["trees"]):
        root_node = _dec_node(tobj, params.theta)

        def any_short(node) -> bool:
            if len(node.code) < params.m_per_level:
                return True
            return any(any_short(c) for c in node.children)

        tree = GalaxyTree(root=root_node, root_index=i, degraded=any_short(root_node))
        degraded = degraded or tree.degraded
        trees.append(tree)
    codewords = []
    for tree in trees:
        codewords.extend(flatten_codewords(tree))
    return GalaxyCode(
        params=params,
        roots=roots,
        trees=trees,
        codewords=codewords,
        packing_saturated=bool(doc["achieved"]["packing_saturated"]),
        degraded=degraded,
    )


def save(code: GalaxyCode, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(code))


def load(path) -> GalaxyCode:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize(fh.read())
