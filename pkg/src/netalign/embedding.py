"""GIN encoder, multi-hop reconstruction loss, and embedding similarity.

The encoder is an L-layer graph isomorphism network whose per-layer MLP is
one linear map followed by ReLU:

    H_l = relu(((1 + eps) I + A) H_{l-1} W_l + b_l)

Training minimizes, summed over both networks and layers,

    || normalized_adjacency_target(g, l) - H_l H_l^T ||_F

(Frobenius norm, not squared). Gradients are derived by hand for this fixed
architecture; the derivative of ||R||_F with respect to H_l is
-(2 / ||R||_F) R H_l for symmetric R, taken as 0 at R = 0, and the ReLU
subgradient at 0 is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graphs import Graph, normalized_adjacency_target


class TrainingDivergedError(RuntimeError):
    """Loss or parameters became non-finite during training."""


@dataclass
class GnnParams:
    """Per-layer weights (input x hidden, then hidden x hidden) and biases."""

    weights: list[np.ndarray]
    biases: list[np.ndarray] | None = None
    epsilon: float = 0.0

    @property
    def layers(self) -> int:
        return len(self.weights)


@dataclass
class GnnGradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray] | None = None


@dataclass(frozen=True)
class TrainConfig:
    layers: int = 2
    hidden: int = 128
    lr: float = 0.005
    max_epochs: int = 50
    tol: float = 1e-4
    use_bias: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")


def init_gnn_params(
    input_dim: int, hidden: int, layers: int, seed: int = 0, use_bias: bool = True
) -> GnnParams:
    """Glorot-uniform weights, zero biases, from a seeded generator."""
    rng = np.random.default_rng(seed)
    weights = []
    biases = [] if use_bias else None
    fan_in = input_dim
    for _ in range(layers):
        limit = np.sqrt(6.0 / (fan_in + hidden))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, hidden)))
        if biases is not None:
            biases.append(np.zeros(hidden))
        fan_in = hidden
    return GnnParams(weights, biases)


def _aggregator(g: Graph, epsilon: float) -> sp.csr_matrix:
    """(1 + eps) I + A as a sparse symmetric operator."""
    n = g.node_count
    return (g.adjacency_csr() + sp.identity(n, format="csr") * (1.0 + epsilon)).tocsr()


def _forward_full(
    params: GnnParams, agg: sp.csr_matrix, x: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """Forward pass keeping aggregated inputs and pre-activations per layer."""
    aggregated: list[np.ndarray] = []
    pre: list[np.ndarray] = []
    hidden: list[np.ndarray] = []
    h = np.asarray(x, dtype=np.float64)
    for l in range(params.layers):
        m = agg @ h
        z = m @ params.weights[l]
        if params.biases is not None:
            z = z + params.biases[l]
        h = np.maximum(z, 0.0)
        aggregated.append(m)
        pre.append(z)
        hidden.append(h)
    return aggregated, pre, hidden


def gin_forward(params: GnnParams, g: Graph, x: np.ndarray) -> list[np.ndarray]:
    """Per-layer embeddings H_1 .. H_L for one graph."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != g.node_count:
        raise ValueError(f"feature matrix shape {x.shape} does not match {g.node_count} nodes")
    if x.shape[1] != params.weights[0].shape[0]:
        raise ValueError(
            f"feature width {x.shape[1]} does not match first layer input "
            f"{params.weights[0].shape[0]}"
        )
    _, _, hidden = _forward_full(params, _aggregator(g, params.epsilon), x)
    return hidden


def reconstruction_loss(stack: list[np.ndarray], g: Graph) -> float:
    """Sum over layers of the Frobenius distance between H_l H_l^T and the
    l-hop normalized adjacency target."""
    total = 0.0
    for l, h in enumerate(stack, start=1):
        r = normalized_adjacency_target(g, l) - h @ h.T
        total += float(np.linalg.norm(r))
    return total


def _zeros_like_params(params: GnnParams) -> GnnGradients:
    weights = [np.zeros_like(w) for w in params.weights]
    biases = None if params.biases is None else [np.zeros_like(b) for b in params.biases]
    return GnnGradients(weights, biases)


def network_loss_and_gradient(
    params: GnnParams,
    g: Graph,
    x: np.ndarray,
    targets: list[np.ndarray] | None = None,
) -> tuple[float, GnnGradients]:
    """Loss and parameter gradients for a single network."""
    x = np.asarray(x, dtype=np.float64)
    agg = _aggregator(g, params.epsilon)
    if targets is None:
        targets = [normalized_adjacency_target(g, l) for l in range(1, params.layers + 1)]
    aggregated, pre, hidden = _forward_full(params, agg, x)

    loss = 0.0
    direct: list[np.ndarray] = []
    for l in range(params.layers):
        r = targets[l] - hidden[l] @ hidden[l].T
        norm = float(np.linalg.norm(r))
        loss += norm
        if norm > 0.0:
            direct.append((-2.0 / norm) * (r @ hidden[l]))
        else:
            direct.append(np.zeros_like(hidden[l]))

    grads = _zeros_like_params(params)
    carried = np.zeros_like(hidden[-1])
    for l in range(params.layers - 1, -1, -1):
        h_bar = direct[l] + carried
        z_bar = np.where(pre[l] > 0.0, h_bar, 0.0)
        grads.weights[l] += aggregated[l].T @ z_bar
        if grads.biases is not None:
            grads.biases[l] += z_bar.sum(axis=0)
        if l > 0:
            carried = agg @ (z_bar @ params.weights[l].T)
    return loss, grads


def loss_gradient(
    params: GnnParams, g_s: Graph, g_t: Graph, x_s: np.ndarray, x_t: np.ndarray
) -> GnnGradients:
    """Gradients of the two-network reconstruction loss, shaped like params."""
    _, grads = total_loss_and_gradient(params, g_s, g_t, x_s, x_t)
    return grads


def total_loss_and_gradient(
    params: GnnParams,
    g_s: Graph,
    g_t: Graph,
    x_s: np.ndarray,
    x_t: np.ndarray,
    targets_s: list[np.ndarray] | None = None,
    targets_t: list[np.ndarray] | None = None,
) -> tuple[float, GnnGradients]:
    loss_s, grads_s = network_loss_and_gradient(params, g_s, x_s, targets_s)
    loss_t, grads_t = network_loss_and_gradient(params, g_t, x_t, targets_t)
    for a, b in zip(grads_s.weights, grads_t.weights):
        a += b
    if grads_s.biases is not None:
        for a, b in zip(grads_s.biases, grads_t.biases):
            a += b
    return loss_s + loss_t, grads_s


class _Adam:
    """Standard Adam update over a flat list of parameter arrays."""

    def __init__(self, arrays: list[np.ndarray], lr: float):
        self.lr = lr
        self.beta1 = 0.9
        self.beta2 = 0.999
        self.eps = 1e-8
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, arrays: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            a -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def train_gnn(
    g_s: Graph,
    g_t: Graph,
    x_s: np.ndarray,
    x_t: np.ndarray,
    cfg: TrainConfig,
) -> tuple[GnnParams, list[np.ndarray], list[np.ndarray]]:
    """Train one shared encoder on both networks.

    One Adam step per epoch on the summed two-network loss; stops at
    max_epochs or when the relative loss change drops below cfg.tol.
    Returns the trained parameters and both final embedding stacks.
    """
    x_s = np.asarray(x_s, dtype=np.float64)
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_s.shape[1] != x_t.shape[1]:
        raise ValueError("feature widths differ between networks")
    params = init_gnn_params(x_s.shape[1], cfg.hidden, cfg.layers, cfg.seed, cfg.use_bias)
    targets_s = [normalized_adjacency_target(g_s, l) for l in range(1, cfg.layers + 1)]
    targets_t = [normalized_adjacency_target(g_t, l) for l in range(1, cfg.layers + 1)]

    flat = list(params.weights) + (list(params.biases) if params.biases is not None else [])
    opt = _Adam(flat, cfg.lr)
    prev = None
    for _ in range(cfg.max_epochs):
        loss, grads = total_loss_and_gradient(
            params, g_s, g_t, x_s, x_t, targets_s, targets_t
        )
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"loss became non-finite ({loss})")
        flat_grads = list(grads.weights) + (
            list(grads.biases) if grads.biases is not None else []
        )
        opt.step(flat, flat_grads)
        if any(not np.all(np.isfinite(w)) for w in flat):
            raise TrainingDivergedError("parameters became non-finite")
        if prev is not None and abs(prev - loss) / max(abs(prev), 1e-12) < cfg.tol:
            break
        prev = loss
    stack_s = gin_forward(params, g_s, x_s)
    stack_t = gin_forward(params, g_t, x_t)
    return params, stack_s, stack_t


def _normalize_rows(h: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(h, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return h / norms


def embedding_similarity(
    stack_s: list[np.ndarray] | None,
    stack_t: list[np.ndarray] | None,
    hat_stack_s: list[np.ndarray],
    hat_stack_t: list[np.ndarray],
    lam: float = 0.3,
    normalize: bool = True,
) -> np.ndarray:
    """Layer-summed embedding similarity between two networks.

    S = sum_l H_s,l H_t,l^T + lam * sum_l Hhat_s,l Hhat_t,l^T; when the
    original-feature stacks are absent only the lam term is used. Rows are
    L2-normalized per layer unless normalize=False (raw dot products).
    """
    if (stack_s is None) != (stack_t is None):
        raise ValueError("original-feature stacks must be present for both networks or neither")
    if len(hat_stack_s) != len(hat_stack_t):
        raise ValueError(
            f"augmented stacks have different layer counts "
            f"({len(hat_stack_s)} vs {len(hat_stack_t)})"
        )

    def stack_product(a: list[np.ndarray], b: list[np.ndarray]) -> np.ndarray:
        out = np.zeros((a[0].shape[0], b[0].shape[0]))
        for ha, hb in zip(a, b):
            if normalize:
                ha = _normalize_rows(ha)
                hb = _normalize_rows(hb)
            out += ha @ hb.T
        return out

    sim = lam * stack_product(hat_stack_s, hat_stack_t)
    if stack_s is not None:
        if len(stack_s) != len(stack_t):
            raise ValueError(
                f"original stacks have different layer counts "
                f"({len(stack_s)} vs {len(stack_t)})"
            )
        sim += stack_product(stack_s, stack_t)
    if not np.all(np.isfinite(sim)):
        raise ValueError("similarity matrix contains non-finite entries")
    return sim
