"""KAN layers and networks: evaluation, jets, initialization, checkpoints.

Each edge of a layer carries a learnable univariate function

    phi(x) = base_w * silu(x) + spline_w * sum_m c_m B_m(x)

on a shared spline grid; node outputs are plain sums over incoming edges.
Evaluation is batched and generic over plain numpy arrays and recorded
tape variables, so the same code serves inference and training.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import diffcore as dc
from .errors import (
    CheckpointFormatError,
    CheckpointShapeError,
    CheckpointVersionError,
    ShapeError,
)
from .jets import Jet2
from .splines import SplineGrid, make_grid

CHECKPOINT_VERSION = 1


@dataclass
class Normalizer:
    """Affine map per input coordinate, physical range -> [-1, 1]."""

    scale: np.ndarray
    offset: np.ndarray


def normalizer_from_ranges(ranges) -> Normalizer:
    ranges = [(float(lo), float(hi)) for lo, hi in ranges]
    for lo, hi in ranges:
        if not hi > lo:
            raise ShapeError(f"bad input range [{lo}, {hi}]")
    scale = np.array([2.0 / (hi - lo) for lo, hi in ranges])
    offset = np.array([-(hi + lo) / (hi - lo) for lo, hi in ranges])
    return Normalizer(scale=scale, offset=offset)


@dataclass
class KanLayer:
    grid: SplineGrid
    coeffs: object  # (fan_in, fan_out, n_basis)
    base_w: object  # (fan_in, fan_out)
    spline_w: object  # (fan_in, fan_out)

    @property
    def fan_in(self) -> int:
        return np.shape(dc.value_of(self.coeffs))[0]

    @property
    def fan_out(self) -> int:
        return np.shape(dc.value_of(self.coeffs))[1]


@dataclass
class KanNetwork:
    layers: list
    normalizer: Normalizer

    @property
    def shape(self) -> list[int]:
        return [self.layers[0].fan_in] + [l.fan_out for l in self.layers]

    # evaluation protocol shared with the analytic oracle adapters
    def values(self, pts):
        return eval_values(self, pts)

    def jets_multi(self, pts, directions):
        return forward_jet_multi(self, pts, directions)

    def dir_jet(self, pts, direction):
        return forward_dir_jet(self, pts, direction)


def init(shape, grid: SplineGrid | None = None, seed: int = 0, input_ranges=None) -> KanNetwork:
    """Fresh network: coeffs ~ Normal(0, 0.1), unit base and spline weights."""
    shape = [int(s) for s in shape]
    if len(shape) < 2 or any(s < 1 for s in shape):
        raise ShapeError(f"invalid network shape {shape}")
    grid = grid if grid is not None else make_grid()
    if input_ranges is None:
        input_ranges = [(-1.0, 1.0)] * shape[0]
    if len(input_ranges) != shape[0]:
        raise ShapeError("one input range per input coordinate required")
    rng = np.random.default_rng(seed)
    layers = []
    for m, n in zip(shape[:-1], shape[1:]):
        coeffs = rng.normal(0.0, 0.1, size=(m, n, grid.n_basis))
        layers.append(
            KanLayer(grid=grid, coeffs=coeffs, base_w=np.ones((m, n)), spline_w=np.ones((m, n)))
        )
    return KanNetwork(layers=layers, normalizer=normalizer_from_ranges(input_ranges))


def param_count(net: KanNetwork) -> int:
    return sum(
        l.fan_in * l.fan_out * (l.grid.n_basis + 2) for l in net.layers
    )


def _sigmoid(z):
    return 1.0 / (1.0 + dc.exp(-z))


def _silu3(z):
    """silu(z) with its first and second derivatives."""
    s = _sigmoid(z)
    sp = s * (1.0 - s)
    return z * s, s + z * sp, 2.0 * sp + z * (sp * (1.0 - 2.0 * s))


def _layer_values(layer: KanLayer, z):
    (B,) = dc.basis_op(layer.grid, z, order=0)
    ct = dc.unsqueeze_last(layer.spline_w) * layer.coeffs
    sil = z * _sigmoid(z)
    return dc.einsum2("bik,ijk->bj", B, ct) + dc.einsum2("bi,ij->bj", sil, layer.base_w)


def _layer_jets(layer: KanLayer, v, d1, d2):
    B, B1, B2 = dc.basis_op(layer.grid, v, order=2)
    sil, sil1, sil2 = _silu3(v)
    ct = dc.unsqueeze_last(layer.spline_w) * layer.coeffs
    v_out = dc.einsum2("bik,ijk->bj", B, ct) + dc.einsum2("bi,ij->bj", sil, layer.base_w)
    # phi'(v) and phi''(v) per edge, shape (batch, fan_in, fan_out)
    e1 = dc.einsum2("bik,ijk->bij", B1, ct) + dc.unsqueeze_last(sil1) * layer.base_w
    e2 = dc.einsum2("bik,ijk->bij", B2, ct) + dc.unsqueeze_last(sil2) * layer.base_w
    d1_out = dc.einsum2("bij,bid->bjd", e1, d1)
    d2_out = dc.einsum2("bij,bid->bjd", e2, d1 * d1) + dc.einsum2("bij,bid->bjd", e1, d2)
    return v_out, d1_out, d2_out


def _check_points(net: KanNetwork, pts):
    shape = np.shape(dc.value_of(pts))
    if len(shape) != 2 or shape[1] != net.layers[0].fan_in:
        raise ShapeError(
            f"expected points of shape (n, {net.layers[0].fan_in}), got {shape}"
        )
    return shape[0]


def eval_values(net: KanNetwork, pts):
    """Batched forward pass: points (n, dim) -> outputs (n,)."""
    n = _check_points(net, pts)
    z = pts * net.normalizer.scale + net.normalizer.offset
    for layer in net.layers:
        z = _layer_values(layer, z)
    return dc.reshape(z, (n,))


def eval_jets(net: KanNetwork, pts, d1_seeds, d2_seeds=None):
    """Batched jet pass for several directions at once.

    ``d1_seeds``/``d2_seeds`` have shape (n, dim, n_directions); returns
    value (n,), first and second directional derivatives (n, n_directions).
    """
    n = _check_points(net, pts)
    ndir = np.shape(dc.value_of(d1_seeds))[-1]
    scale3 = net.normalizer.scale[None, :, None]
    v = pts * net.normalizer.scale + net.normalizer.offset
    d1 = d1_seeds * scale3
    d2 = d2_seeds * scale3 if d2_seeds is not None else np.zeros_like(dc.value_of(d1))
    for layer in net.layers:
        v, d1, d2 = _layer_jets(layer, v, d1, d2)
    return dc.reshape(v, (n,)), dc.reshape(d1, (n, ndir)), dc.reshape(d2, (n, ndir))


def forward(net: KanNetwork, x):
    """Scalar output for one point (dim,) or a batch (n, dim)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(eval_values(net, x[None, :])[0])
    return eval_values(net, x)


def forward_jet_multi(net: KanNetwork, pts, directions):
    """Jets along several input coordinates in one pass."""
    n = np.shape(dc.value_of(pts))[0]
    dim = net.layers[0].fan_in
    seeds = np.zeros((n, dim, len(directions)))
    for j, d in enumerate(directions):
        seeds[:, d, j] = 1.0
    return eval_jets(net, pts, seeds)


def forward_dir_jet(net: KanNetwork, pts, direction):
    """Jet along one (possibly recorded) direction vector per point.

    ``direction`` has shape (n, dim); returns value, first and second
    derivative along it, each of shape (n,).
    """
    v, d1, d2 = eval_jets(net, pts, dc.unsqueeze_last(direction))
    n = np.shape(dc.value_of(v))[0]
    return v, dc.reshape(d1, (n,)), dc.reshape(d2, (n,))


def forward_jet(net: KanNetwork, x, direction_index: int) -> Jet2:
    """Second-order jet of the output along one input coordinate."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if not 0 <= direction_index < net.layers[0].fan_in:
        raise ShapeError(f"direction {direction_index} outside {net.layers[0].fan_in} inputs")
    v, d1, d2 = forward_jet_multi(net, pts, [direction_index])
    if single:
        return Jet2(float(v[0]), float(dc.value_of(d1)[0, 0]), float(dc.value_of(d2)[0, 0]))
    return Jet2(v, dc.reshape(d1, (pts.shape[0],)), dc.reshape(d2, (pts.shape[0],)))


# --- parameter vector <-> network ------------------------------------------

def get_flat(net: KanNetwork) -> np.ndarray:
    parts = []
    for l in net.layers:
        parts.extend([np.ravel(l.coeffs), np.ravel(l.base_w), np.ravel(l.spline_w)])
    return np.concatenate(parts)


def set_flat(net: KanNetwork, vec: np.ndarray):
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (param_count(net),):
        raise ShapeError(f"expected {param_count(net)} parameters, got {vec.shape}")
    pos = 0
    for l in net.layers:
        for attr in ("coeffs", "base_w", "spline_w"):
            cur = dc.value_of(getattr(l, attr))
            n = cur.size
            setattr(l, attr, vec[pos : pos + n].reshape(cur.shape).copy())
            pos += n


def var_params(net: KanNetwork, tape: dc.Tape):
    """Copy of the network with parameters as tape leaves, plus the leaves.

    Leaf order matches :func:`get_flat`.
    """
    leaves = []
    layers = []
    for l in net.layers:
        vls = [tape.leaf(getattr(l, attr), name=attr) for attr in ("coeffs", "base_w", "spline_w")]
        leaves.extend(vls)
        layers.append(KanLayer(grid=l.grid, coeffs=vls[0], base_w=vls[1], spline_w=vls[2]))
    return KanNetwork(layers=layers, normalizer=net.normalizer), leaves


def grads_to_flat(grads) -> np.ndarray:
    return np.concatenate([np.ravel(g) for g in grads])


# --- checkpoint text format --------------------------------------------------
#
# A network document is JSON with parameters stored as full-precision decimal
# strings (shortest round-trip repr), in this exact field order:
#   version, shape, grid {lo, hi, intervals, degree},
#   normalizer {scale, offset}, layers [{coeffs, base_w, spline_w}]
# Layer tensors are flattened in C order.

def _fmt(arr):
    return [repr(float(x)) for x in np.ravel(np.asarray(arr, dtype=float))]


def _parse_floats(items, what):
    try:
        vals = np.array([float(s) for s in items], dtype=float)
    except (TypeError, ValueError) as e:
        raise CheckpointFormatError(f"bad numeric field in {what}: {e}") from e
    if not np.all(np.isfinite(vals)):
        raise CheckpointFormatError(f"non-finite value in {what}")
    return vals


def to_doc(net: KanNetwork) -> dict:
    return {
        "version": CHECKPOINT_VERSION,
        "shape": net.shape,
        "grid": {
            "lo": net.layers[0].grid.lo,
            "hi": net.layers[0].grid.hi,
            "intervals": net.layers[0].grid.intervals,
            "degree": net.layers[0].grid.degree,
        },
        "normalizer": {
            "scale": _fmt(net.normalizer.scale),
            "offset": _fmt(net.normalizer.offset),
        },
        "layers": [
            {
                "coeffs": _fmt(l.coeffs),
                "base_w": _fmt(l.base_w),
                "spline_w": _fmt(l.spline_w),
            }
            for l in net.layers
        ],
    }


def serialize(net: KanNetwork) -> str:
    return json.dumps(to_doc(net))


def deserialize(text: str) -> KanNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CheckpointFormatError(f"truncated or unparseable document: {e}") from e
    return from_doc(doc)


def from_doc(doc) -> KanNetwork:
    if not isinstance(doc, dict) or "version" not in doc:
        raise CheckpointFormatError("missing version field")
    if doc["version"] != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {doc['version']!r}"
        )
    try:
        shape = [int(s) for s in doc["shape"]]
        g = doc["grid"]
        grid = SplineGrid(
            lo=float(g["lo"]), hi=float(g["hi"]),
            intervals=int(g["intervals"]), degree=int(g["degree"]),
        )
        norm = doc["normalizer"]
        scale = _parse_floats(norm["scale"], "normalizer.scale")
        offset = _parse_floats(norm["offset"], "normalizer.offset")
        layer_docs = doc["layers"]
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointFormatError(f"malformed checkpoint document: {e}") from e
    if len(scale) != shape[0] or len(offset) != shape[0]:
        raise CheckpointShapeError("normalizer length does not match input dimension")
    if len(layer_docs) != len(shape) - 1:
        raise CheckpointShapeError("layer count does not match shape")
    layers = []
    for idx, (m, n) in enumerate(zip(shape[:-1], shape[1:])):
        ld = layer_docs[idx]
        try:
            coeffs = _parse_floats(ld["coeffs"], f"layers[{idx}].coeffs")
            base_w = _parse_floats(ld["base_w"], f"layers[{idx}].base_w")
            spline_w = _parse_floats(ld["spline_w"], f"layers[{idx}].spline_w")
        except (KeyError, TypeError) as e:
            raise CheckpointFormatError(f"malformed layer {idx}: {e}") from e
        if coeffs.size != m * n * grid.n_basis or base_w.size != m * n or spline_w.size != m * n:
            raise CheckpointShapeError(f"layer {idx} parameter sizes inconsistent with shape")
        layers.append(
            KanLayer(
                grid=grid,
                coeffs=coeffs.reshape(m, n, grid.n_basis),
                base_w=base_w.reshape(m, n),
                spline_w=spline_w.reshape(m, n),
            )
        )
    return KanNetwork(layers=layers, normalizer=Normalizer(scale=scale, offset=offset))
