"""Dense numerical core: LSTM cells, the two-branch sequence model, and BPTT.

The model has two input branches. The left branch runs a bidirectional
LSTM over the chronological term-vector history: a forward cell consumes
terms oldest-to-newest and a backward cell newest-to-oldest, both from
zero initial state. The sequence representation is the concatenation of
the forward cell's final hidden state and the backward cell's hidden
state at the first term. The right branch embeds the queried course
combination through a ReLU layer. Both are concatenated, passed through a
ReLU merge layer, and a sigmoid output unit yields the success
probability.

Gradients are derived by hand and accumulated across every time step in
both directions; there is no autodiff. Everything is float64.

Cell equations, per step (sigmoid s, elementwise *):

    i = s(W_i x + U_i h_prev + b_i)        input gate
    f = s(W_f x + U_f h_prev + b_f)        forget gate
    g = tanh(W_g x + U_g h_prev + b_g)     candidate state
    o = s(W_o x + U_o h_prev + b_o)        output gate
    c = f * c_prev + i * g
    h = o * tanh(c)
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .transcripts import NUM_CATEGORIES, CourseCatalog

CHECKPOINT_VERSION = 1
BCE_EPS = 1e-12

GATE_NAMES = ("i", "f", "g", "o")

TENSOR_NAMES = tuple(
    f"{prefix}.{kind}_{gate}"
    for prefix in ("fwd", "bwd")
    for gate in GATE_NAMES
    for kind in ("W", "U", "b")
) + ("combo.W", "combo.b", "merge.W", "merge.b", "out.W", "out.b")

# Sized for corpora of hundreds of students: larger nets (64+) memorize
# such training sets within a few epochs and generalize measurably worse.
DEFAULT_HIDDEN_SIZE = 16
DEFAULT_COMBO_SIZE = 16
DEFAULT_MERGE_SIZE = 16


@dataclass(frozen=True)
class ModelDims:
    """Catalog size C, per-direction hidden H, combo embedding K, merge M."""

    C: int
    H: int
    K: int
    M: int

    @property
    def input_size(self) -> int:
        return self.C * NUM_CATEGORIES

    def validate(self) -> None:
        for name in ("C", "H", "K", "M"):
            if getattr(self, name) < 1:
                raise ValueError(f"dimension {name} must be positive")


@dataclass
class LstmCellParams:
    """Per-gate weights: W_* (H, D) on the input, U_* (H, H) recurrent, b_* (H,)."""

    W_i: np.ndarray
    U_i: np.ndarray
    b_i: np.ndarray
    W_f: np.ndarray
    U_f: np.ndarray
    b_f: np.ndarray
    W_g: np.ndarray
    U_g: np.ndarray
    b_g: np.ndarray
    W_o: np.ndarray
    U_o: np.ndarray
    b_o: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.W_i.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_i.shape[1]

    def named_tensors(self, prefix: str) -> list[tuple[str, np.ndarray]]:
        return [
            (f"{prefix}.{kind}_{gate}", getattr(self, f"{kind}_{gate}"))
            for gate in GATE_NAMES
            for kind in ("W", "U", "b")
        ]


@dataclass
class ModelParams:
    """All trainable tensors plus the dimensions they were built for."""

    dims: ModelDims
    fwd: LstmCellParams
    bwd: LstmCellParams
    combo_W: np.ndarray  # (K, C)
    combo_b: np.ndarray  # (K,)
    merge_W: np.ndarray  # (M, 2H + K)
    merge_b: np.ndarray  # (M,)
    out_W: np.ndarray  # (M,)
    out_b: np.ndarray  # (1,)

    def named_tensors(self) -> list[tuple[str, np.ndarray]]:
        """All tensors in a fixed, documented order (the checkpoint order)."""
        return (
            self.fwd.named_tensors("fwd")
            + self.bwd.named_tensors("bwd")
            + [
                ("combo.W", self.combo_W),
                ("combo.b", self.combo_b),
                ("merge.W", self.merge_W),
                ("merge.b", self.merge_b),
                ("out.W", self.out_W),
                ("out.b", self.out_b),
            ]
        )

    def tensor(self, name: str) -> np.ndarray:
        for tensor_name, array in self.named_tensors():
            if tensor_name == name:
                return array
        raise KeyError(name)

    def copy(self) -> "ModelParams":
        return ModelParams(
            dims=self.dims,
            fwd=LstmCellParams(**{n.split(".")[1]: a.copy() for n, a in self.fwd.named_tensors("x")}),
            bwd=LstmCellParams(**{n.split(".")[1]: a.copy() for n, a in self.bwd.named_tensors("x")}),
            combo_W=self.combo_W.copy(),
            combo_b=self.combo_b.copy(),
            merge_W=self.merge_W.copy(),
            merge_b=self.merge_b.copy(),
            out_W=self.out_W.copy(),
            out_b=self.out_b.copy(),
        )


def zero_gradients(params: ModelParams) -> dict[str, np.ndarray]:
    """A gradient structure congruent to the parameters, all zeros."""
    return {name: np.zeros_like(array) for name, array in params.named_tensors()}


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def _init_cell(rng: np.random.Generator, hidden: int, inputs: int) -> LstmCellParams:
    tensors = {}
    for gate in GATE_NAMES:
        tensors[f"W_{gate}"] = _glorot(rng, hidden, inputs)
        tensors[f"U_{gate}"] = _glorot(rng, hidden, hidden)
        # Forget bias starts at 1 so early steps retain long-range signal.
        tensors[f"b_{gate}"] = np.full(hidden, 1.0) if gate == "f" else np.zeros(hidden)
    return LstmCellParams(**tensors)


def init_params(dims: ModelDims, seed: int) -> ModelParams:
    """Seeded Glorot-uniform init; biases zero except forget gates at 1."""
    dims.validate()
    rng = np.random.default_rng(seed)
    return ModelParams(
        dims=dims,
        fwd=_init_cell(rng, dims.H, dims.input_size),
        bwd=_init_cell(rng, dims.H, dims.input_size),
        combo_W=_glorot(rng, dims.K, dims.C),
        combo_b=np.zeros(dims.K),
        merge_W=_glorot(rng, dims.M, 2 * dims.H + dims.K),
        merge_b=np.zeros(dims.M),
        out_W=_glorot(rng, 1, dims.M)[0],
        out_b=np.zeros(1),
    )


@dataclass
class StepCache:
    """Everything the backward pass needs from one cell step."""

    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray


def lstm_cell_forward(
    cell: LstmCellParams, x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray
) -> tuple[np.ndarray, np.ndarray, StepCache]:
    """One cell step. Accepts (D,) vectors or (B, D) batches."""
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    if x.shape[-1] != cell.input_size:
        raise ValueError(f"input size {x.shape[-1]} != cell input size {cell.input_size}")
    if h_prev.shape[-1] != cell.hidden_size or c_prev.shape[-1] != cell.hidden_size:
        raise ValueError("state size does not match cell hidden size")
    if h_prev.shape != c_prev.shape or x.shape[:-1] != h_prev.shape[:-1]:
        raise ValueError("mismatched batch shapes for x, h_prev, c_prev")

    i = expit(x @ cell.W_i.T + h_prev @ cell.U_i.T + cell.b_i)
    f = expit(x @ cell.W_f.T + h_prev @ cell.U_f.T + cell.b_f)
    g = np.tanh(x @ cell.W_g.T + h_prev @ cell.U_g.T + cell.b_g)
    o = expit(x @ cell.W_o.T + h_prev @ cell.U_o.T + cell.b_o)
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(c))):
        raise FloatingPointError("non-finite LSTM state")
    return h, c, StepCache(x, h_prev, c_prev, i, f, g, o, c, tanh_c)


def lstm_sequence_forward(
    cell: LstmCellParams, xs: np.ndarray
) -> tuple[np.ndarray, list[StepCache]]:
    """Run a cell over xs of shape (L, B, D) from zero state.

    Returns the final hidden state (B, H) and per-step caches in
    processing order.
    """
    length, batch, _ = xs.shape
    h = np.zeros((batch, cell.hidden_size))
    c = np.zeros((batch, cell.hidden_size))
    caches: list[StepCache] = []
    for t in range(length):
        h, c, cache = lstm_cell_forward(cell, xs[t], h, c)
        caches.append(cache)
    return h, caches


def _lstm_sequence_backward(
    cell: LstmCellParams,
    caches: Sequence[StepCache],
    d_h_last: np.ndarray,
    grads: dict[str, np.ndarray],
    prefix: str,
) -> None:
    """BPTT through one direction, seeding the final processing step.

    Parameter gradients are accumulated into ``grads`` (summed over the
    batch); gradients w.r.t. the inputs are not needed and not computed.
    """
    d_h = d_h_last
    d_c = np.zeros_like(d_h_last)
    for cache in reversed(caches):
        d_o = d_h * cache.tanh_c
        d_c = d_c + d_h * cache.o * (1.0 - cache.tanh_c**2)
        d_i = d_c * cache.g
        d_g = d_c * cache.i
        d_f = d_c * cache.c_prev
        d_c = d_c * cache.f  # becomes d_c_prev for the next-older step

        pre = {
            "i": d_i * cache.i * (1.0 - cache.i),
            "f": d_f * cache.f * (1.0 - cache.f),
            "g": d_g * (1.0 - cache.g**2),
            "o": d_o * cache.o * (1.0 - cache.o),
        }
        d_h = np.zeros_like(d_h)
        for gate, d_a in pre.items():
            grads[f"{prefix}.W_{gate}"] += d_a.T @ cache.x
            grads[f"{prefix}.U_{gate}"] += d_a.T @ cache.h_prev
            grads[f"{prefix}.b_{gate}"] += d_a.sum(axis=0)
            d_h += d_a @ getattr(cell, f"U_{gate}")


@dataclass
class ForwardTrace:
    """Cached activations of one forward pass, consumed by backward()."""

    xs: np.ndarray  # (L, B, D)
    query: np.ndarray  # (B, C)
    fwd_caches: list[StepCache]
    bwd_caches: list[StepCache]
    representation: np.ndarray  # (B, 2H)
    combo_pre: np.ndarray  # (B, K)
    combo_out: np.ndarray  # (B, K)
    merged_in: np.ndarray  # (B, 2H + K)
    merge_pre: np.ndarray  # (B, M)
    merge_out: np.ndarray  # (B, M)
    p: np.ndarray  # (B,)

    @property
    def batch_size(self) -> int:
        return self.xs.shape[1]


def _as_history_array(history, dims: ModelDims) -> np.ndarray:
    arr = np.asarray(history, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("history must be a non-empty sequence of term vectors")
    if arr.shape[1] != dims.input_size:
        raise ValueError(
            f"term vectors have size {arr.shape[1]}, expected C*4 = {dims.input_size}"
        )
    return arr


def forward_batch(params: ModelParams, xs: np.ndarray, queries: np.ndarray) -> ForwardTrace:
    """Forward pass over a batch of equal-length histories.

    xs: (L, B, C*4); queries: (B, C). Returns a trace whose ``p`` holds
    each example's success probability.
    """
    dims = params.dims
    if xs.ndim != 3 or xs.shape[0] == 0:
        raise ValueError("xs must have shape (L, B, D) with L >= 1")
    if xs.shape[2] != dims.input_size:
        raise ValueError(f"input size {xs.shape[2]} != C*4 = {dims.input_size}")
    if queries.shape != (xs.shape[1], dims.C):
        raise ValueError(f"queries must have shape (B, {dims.C})")

    h_fwd, fwd_caches = lstm_sequence_forward(params.fwd, xs)
    h_bwd, bwd_caches = lstm_sequence_forward(params.bwd, xs[::-1])
    representation = np.concatenate([h_fwd, h_bwd], axis=1)

    combo_pre = queries @ params.combo_W.T + params.combo_b
    combo_out = np.maximum(combo_pre, 0.0)
    merged_in = np.concatenate([representation, combo_out], axis=1)
    merge_pre = merged_in @ params.merge_W.T + params.merge_b
    merge_out = np.maximum(merge_pre, 0.0)
    logit = merge_out @ params.out_W + params.out_b[0]
    p = expit(logit)
    if not np.all(np.isfinite(p)):
        raise FloatingPointError("non-finite model output")
    return ForwardTrace(
        xs=xs,
        query=queries,
        fwd_caches=fwd_caches,
        bwd_caches=bwd_caches,
        representation=representation,
        combo_pre=combo_pre,
        combo_out=combo_out,
        merged_in=merged_in,
        merge_pre=merge_pre,
        merge_out=merge_out,
        p=p,
    )


def bidi_forward(params: ModelParams, history, query) -> tuple[float, ForwardTrace]:
    """Score one history/query pair. Returns (probability, trace)."""
    xs = _as_history_array(history, params.dims)[:, np.newaxis, :]
    q = np.asarray(query, dtype=np.float64).reshape(1, -1)
    trace = forward_batch(params, xs, q)
    return float(trace.p[0]), trace


def sequence_representation(params: ModelParams, history) -> np.ndarray:
    """The query-independent bidirectional representation of a history."""
    xs = _as_history_array(history, params.dims)[:, np.newaxis, :]
    h_fwd, _ = lstm_sequence_forward(params.fwd, xs)
    h_bwd, _ = lstm_sequence_forward(params.bwd, xs[::-1])
    return np.concatenate([h_fwd, h_bwd], axis=1)[0]


def head_probabilities(params: ModelParams, representation: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Probabilities for many queries sharing one history representation."""
    reps = np.broadcast_to(representation, (queries.shape[0], representation.shape[-1]))
    combo_out = np.maximum(queries @ params.combo_W.T + params.combo_b, 0.0)
    merged_in = np.concatenate([reps, combo_out], axis=1)
    merge_out = np.maximum(merged_in @ params.merge_W.T + params.merge_b, 0.0)
    return expit(merge_out @ params.out_W + params.out_b[0])


def score_queries(params: ModelParams, history, queries: np.ndarray) -> np.ndarray:
    """Score one history against many candidate queries, sharing the
    recurrent pass (the planner hot path)."""
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != params.dims.C:
        raise ValueError(f"queries must have shape (N, {params.dims.C})")
    rep = sequence_representation(params, history)
    return head_probabilities(params, rep, queries)


def bce_loss(p, label):
    """Binary cross-entropy with probabilities clamped to [eps, 1-eps]."""
    p = np.clip(np.asarray(p, dtype=np.float64), BCE_EPS, 1.0 - BCE_EPS)
    y = np.asarray(label, dtype=np.float64)
    out = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(out) if out.ndim == 0 else out


def backward_batch(
    params: ModelParams, trace: ForwardTrace, labels: np.ndarray
) -> dict[str, np.ndarray]:
    """Gradients of the summed BCE loss over the batch in ``trace``.

    Exact analytical gradients, accumulated across all time steps in both
    directions. Divide by the batch size for the mean-loss gradient.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != trace.p.shape:
        raise ValueError("labels do not match the traced batch")
    dims = params.dims
    grads = zero_gradients(params)

    # Sigmoid + BCE collapse: d(loss)/d(logit) = p - y.
    d_logit = trace.p - labels  # (B,)
    grads["out.W"] += d_logit @ trace.merge_out
    grads["out.b"] += d_logit.sum(keepdims=True)

    d_merge_out = np.outer(d_logit, params.out_W)
    d_merge_pre = d_merge_out * (trace.merge_pre > 0.0)
    grads["merge.W"] += d_merge_pre.T @ trace.merged_in
    grads["merge.b"] += d_merge_pre.sum(axis=0)

    d_merged_in = d_merge_pre @ params.merge_W
    d_rep = d_merged_in[:, : 2 * dims.H]
    d_combo_out = d_merged_in[:, 2 * dims.H :]

    d_combo_pre = d_combo_out * (trace.combo_pre > 0.0)
    grads["combo.W"] += d_combo_pre.T @ trace.query
    grads["combo.b"] += d_combo_pre.sum(axis=0)

    # Each half of the representation seeds BPTT at its direction's final
    # processing step (sequence end for fwd, sequence start for bwd).
    _lstm_sequence_backward(params.fwd, trace.fwd_caches, d_rep[:, : dims.H], grads, "fwd")
    _lstm_sequence_backward(params.bwd, trace.bwd_caches, d_rep[:, dims.H :], grads, "bwd")
    return grads


def backward(params: ModelParams, trace: ForwardTrace, label) -> dict[str, np.ndarray]:
    """Gradients of a single example's BCE loss w.r.t. every parameter."""
    if trace.batch_size != 1:
        raise ValueError("backward() expects a single-example trace")
    return backward_batch(params, trace, np.asarray([label], dtype=np.float64))


# ---------------------------------------------------------------------------
# Checkpoint serialization
# ---------------------------------------------------------------------------


def _tensor_to_doc(array: np.ndarray) -> dict:
    if array.ndim == 1:
        rows, cols = array.shape[0], 1
    else:
        rows, cols = array.shape
    return {"rows": rows, "cols": cols, "data": [float(v) for v in array.ravel()]}


def params_to_document(params: ModelParams, catalog: CourseCatalog) -> dict:
    """Checkpoint document: version, dims, catalog, and all tensors.

    Tensor names are fixed: fwd.W_i/U_i/b_i (and _f, _g, _o) for the
    forward cell, the same under bwd. for the backward cell, then
    combo.W/b, merge.W/b, out.W/b. Matrices are row-major; vectors are
    stored as single-column matrices.
    """
    dims = params.dims
    if len(catalog) != dims.C:
        raise ValueError(f"catalog size {len(catalog)} != model C = {dims.C}")
    tensors = {}
    for name, array in params.named_tensors():
        if not np.all(np.isfinite(array)):
            raise ValueError(f"tensor {name} contains non-finite values")
        tensors[name] = _tensor_to_doc(array)
    return {
        "version": CHECKPOINT_VERSION,
        "dims": {"C": dims.C, "H": dims.H, "K": dims.K, "M": dims.M},
        "catalog": list(catalog.courses),
        "tensors": tensors,
    }


def _expected_shape(name: str, dims: ModelDims) -> tuple[int, ...]:
    if name.startswith(("fwd.", "bwd.")):
        kind = name.split(".")[1][0]
        return {
            "W": (dims.H, dims.input_size),
            "U": (dims.H, dims.H),
            "b": (dims.H,),
        }[kind]
    return {
        "combo.W": (dims.K, dims.C),
        "combo.b": (dims.K,),
        "merge.W": (dims.M, 2 * dims.H + dims.K),
        "merge.b": (dims.M,),
        "out.W": (dims.M,),
        "out.b": (1,),
    }[name]


def params_from_document(doc: dict) -> tuple[ModelParams, CourseCatalog]:
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version: {doc.get('version')!r}")
    d = doc["dims"]
    dims = ModelDims(C=int(d["C"]), H=int(d["H"]), K=int(d["K"]), M=int(d["M"]))
    dims.validate()
    catalog = CourseCatalog(doc["catalog"])
    if len(catalog) != dims.C:
        raise ValueError("catalog length does not match dims.C")

    arrays: dict[str, np.ndarray] = {}
    for name in TENSOR_NAMES:
        if name not in doc["tensors"]:
            raise ValueError(f"checkpoint missing tensor {name}")
        entry = doc["tensors"][name]
        expected = _expected_shape(name, dims)
        array = np.asarray(entry["data"], dtype=np.float64)
        if array.size != entry["rows"] * entry["cols"] or array.size != int(np.prod(expected)):
            raise ValueError(f"tensor {name} has wrong size")
        if not np.all(np.isfinite(array)):
            raise ValueError(f"tensor {name} contains non-finite values")
        arrays[name] = array.reshape(expected)

    def cell_args(prefix: str) -> dict[str, np.ndarray]:
        return {
            f"{kind}_{gate}": arrays[f"{prefix}.{kind}_{gate}"]
            for gate in GATE_NAMES
            for kind in ("W", "U", "b")
        }

    params = ModelParams(
        dims=dims,
        fwd=LstmCellParams(**cell_args("fwd")),
        bwd=LstmCellParams(**cell_args("bwd")),
        combo_W=arrays["combo.W"],
        combo_b=arrays["combo.b"],
        merge_W=arrays["merge.W"],
        merge_b=arrays["merge.b"],
        out_W=arrays["out.W"],
        out_b=arrays["out.b"],
    )
    return params, catalog


def checkpoint_bytes(params: ModelParams, catalog: CourseCatalog) -> bytes:
    """Canonical checkpoint encoding; byte-stable under save/load cycles."""
    doc = params_to_document(params, catalog)
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")


def checkpoint_id(blob: bytes) -> str:
    return "sha256:" + hashlib.sha256(blob).hexdigest()[:16]


def save_checkpoint(params: ModelParams, catalog: CourseCatalog, path) -> str:
    """Write the checkpoint and return its content id."""
    blob = checkpoint_bytes(params, catalog)
    with open(path, "wb") as f:
        f.write(blob)
    return checkpoint_id(blob)


def load_checkpoint(path) -> tuple[ModelParams, CourseCatalog, str]:
    """Read a checkpoint; returns (params, catalog, content id)."""
    with open(path, "rb") as f:
        blob = f.read()
    params, catalog = params_from_document(json.loads(blob.decode("utf-8")))
    return params, catalog, checkpoint_id(blob)


def params_fingerprint(params: ModelParams) -> str:
    """Content hash of the raw tensor values (catalog-independent)."""
    digest = hashlib.sha256()
    for name, array in params.named_tensors():
        digest.update(name.encode("utf-8"))
        digest.update(np.ascontiguousarray(array).tobytes())
    return "params:" + digest.hexdigest()[:16]
