"""Two stacked LSTM layers with a per-step node/bandwidth head, plus backprop.

Shapes: inputs ``x`` are (batch, steps, features). Gate blocks are laid out
as [input, forget, candidate, output] along the last axis of every weight.
The head maps the top hidden state to ``node_count`` logits and one
bandwidth-share pre-activation squashed by a logistic function.
"""

from __future__ import annotations

import numpy as np

PARAM_ORDER = ("W1", "U1", "b1", "W2", "U2", "b2", "Wn", "bn", "ws", "bs")


def param_shapes(input_dim: int, hidden: int, node_count: int) -> dict[str, tuple[int, ...]]:
    g = 4 * hidden
    return {
        "W1": (input_dim, g),
        "U1": (hidden, g),
        "b1": (g,),
        "W2": (hidden, g),
        "U2": (hidden, g),
        "b2": (g,),
        "Wn": (hidden, node_count),
        "bn": (node_count,),
        "ws": (hidden,),
        "bs": (1,),
    }


def init_params(input_dim: int, hidden: int, node_count: int, rng: np.random.Generator | None = None) -> dict[str, np.ndarray]:
    """Uniform(+-1/sqrt(hidden)) weights, zero biases except a forget bias of 1.

    With ``rng=None`` every parameter is zero.
    """
    shapes = param_shapes(input_dim, hidden, node_count)
    if rng is None:
        return {name: np.zeros(shape) for name, shape in shapes.items()}
    scale = 1.0 / np.sqrt(hidden)
    params = {}
    for name in PARAM_ORDER:
        shape = shapes[name]
        if name.startswith("b"):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.uniform(-scale, scale, size=shape)
    for name in ("b1", "b2"):
        params[name][hidden : 2 * hidden] = 1.0
    return params


def sigmoid(z):
    # split by sign so large |z| never overflows exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _lstm_forward(x, W, U, b):
    n, steps, _ = x.shape
    hidden = U.shape[0]
    xw = x @ W + b
    dt = xw.dtype
    h = np.zeros((n, hidden), dtype=dt)
    c = np.zeros((n, hidden), dtype=dt)
    hs = np.empty((n, steps, hidden), dtype=dt)
    cs = np.empty((n, steps, hidden), dtype=dt)
    acts = np.empty((n, steps, 4 * hidden), dtype=dt)
    tcs = np.empty((n, steps, hidden), dtype=dt)
    for t in range(steps):
        z = xw[:, t] + h @ U
        a = acts[:, t]
        a[:, : 2 * hidden] = sigmoid(z[:, : 2 * hidden])
        a[:, 2 * hidden : 3 * hidden] = np.tanh(z[:, 2 * hidden : 3 * hidden])
        a[:, 3 * hidden :] = sigmoid(z[:, 3 * hidden :])
        c = a[:, hidden : 2 * hidden] * c + a[:, :hidden] * a[:, 2 * hidden : 3 * hidden]
        tc = np.tanh(c)
        h = a[:, 3 * hidden :] * tc
        hs[:, t] = h
        cs[:, t] = c
        tcs[:, t] = tc
    return hs, (x, hs, cs, acts, tcs)


def _lstm_backward(dhs, cache, W, U):
    x, hs, cs, acts, tcs = cache
    n, steps, hidden = hs.shape
    dz_all = np.empty((n, steps, 4 * hidden))
    dU = np.zeros_like(U)
    dh_next = np.zeros((n, hidden))
    dc_next = np.zeros((n, hidden))
    for t in range(steps - 1, -1, -1):
        a = acts[:, t]
        i, f = a[:, :hidden], a[:, hidden : 2 * hidden]
        g, o = a[:, 2 * hidden : 3 * hidden], a[:, 3 * hidden :]
        tc = tcs[:, t]
        dh = dhs[:, t] + dh_next
        dc = dh * o * (1.0 - tc * tc) + dc_next
        c_prev = cs[:, t - 1] if t > 0 else np.zeros((n, hidden))
        dz = dz_all[:, t]
        dz[:, :hidden] = dc * g * i * (1.0 - i)
        dz[:, hidden : 2 * hidden] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * hidden : 3 * hidden] = dc * i * (1.0 - g * g)
        dz[:, 3 * hidden :] = dh * tc * o * (1.0 - o)
        dc_next = dc * f
        if t > 0:
            dU += hs[:, t - 1].T @ dz
        dh_next = dz @ U.T
    flat_dz = dz_all.reshape(n * steps, 4 * hidden)
    dW = x.reshape(n * steps, -1).T @ flat_dz
    db = flat_dz.sum(axis=0)
    dx = dz_all @ W.T
    return dx, dW, dU, db


def forward(params: dict[str, np.ndarray], x: np.ndarray, keep_cache: bool = False):
    """Return (logits (n, steps, nodes), shares (n, steps)) and optionally the backprop cache."""
    h1, c1 = _lstm_forward(x, params["W1"], params["U1"], params["b1"])
    h2, c2 = _lstm_forward(h1, params["W2"], params["U2"], params["b2"])
    logits = h2 @ params["Wn"] + params["bn"]
    shares = sigmoid(h2 @ params["ws"] + params["bs"][0])
    if keep_cache:
        return logits, shares, (c1, c2, h2)
    return logits, shares


def loss_terms(logits, shares, label_nodes, label_shares, share_weight: float = 1.0):
    """Mean cross-entropy + share_weight * mean squared share error, with output gradients."""
    m = logits.shape[0] * logits.shape[1]
    z = logits - logits.max(axis=-1, keepdims=True)
    ez = np.exp(z)
    sum_ez = ez.sum(axis=-1, keepdims=True)
    logp = z - np.log(sum_ez)
    onehot = np.zeros_like(logits)
    np.put_along_axis(onehot, label_nodes[..., None], 1.0, axis=-1)
    ce = -(onehot * logp).sum() / m
    err = shares - label_shares
    se = (err * err).sum() / m
    dlogits = (ez / sum_ez - onehot) / m
    dshares = 2.0 * share_weight * err / m
    return ce + share_weight * se, ce, se, dlogits, dshares


def backward(params, cache, dlogits, dshares) -> dict[str, np.ndarray]:
    c1, c2, h2 = cache
    n, steps, hidden = h2.shape
    shares = sigmoid(h2 @ params["ws"] + params["bs"][0])
    dzs = dshares * shares * (1.0 - shares)
    flat_h2 = h2.reshape(n * steps, hidden)
    grads = {
        "Wn": flat_h2.T @ dlogits.reshape(n * steps, -1),
        "bn": dlogits.reshape(n * steps, -1).sum(axis=0),
        "ws": flat_h2.T @ dzs.reshape(-1),
        "bs": np.array([dzs.sum()]),
    }
    dh2 = dlogits @ params["Wn"].T + dzs[..., None] * params["ws"]
    dh1, grads["W2"], grads["U2"], grads["b2"] = _lstm_backward(dh2, c2, params["W2"], params["U2"])
    _, grads["W1"], grads["U1"], grads["b1"] = _lstm_backward(dh1, c1, params["W1"], params["U1"])
    return grads


def loss_and_grads(params, x, label_nodes, label_shares, share_weight: float = 1.0):
    logits, shares, cache = forward(params, x, keep_cache=True)
    loss, _, _, dlogits, dshares = loss_terms(logits, shares, label_nodes, label_shares, share_weight)
    return loss, backward(params, cache, dlogits, dshares)
