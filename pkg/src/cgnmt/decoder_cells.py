"""Decoder state-update cells: vanilla tanh and GRU, with context gates.

Every step mixes a target preactivation ``T = W e(y_prev) + U t_prev``
with a source preactivation ``S = C s``.  Five gating variants modulate
the mix before the activation:

* ``none``           t = f(b*T + a*S)            (optional (a, b) scaling probe)
* ``source``         t = f(T + z * S)
* ``target``         t = f(z * T + S)
* ``both``           t = f((1 - z) * T + z * S)  (linear interpolation)
* ``gating_scalar``  t = f(T + z * S) with a single sigmoid scalar z

where ``z = sigmoid(W_z e(y_prev) + U_z t_prev + C_z s)`` is elementwise
for the first three gated variants and ``z = sigmoid(v . t_prev + b)``
for the scalar baseline.  Scaling composes before gating, so (a, b) =
(1, 1) is transparent.  For the GRU the same multipliers are applied to
the T-part and S-part of all three internal preactivations (reset,
update, candidate); the gate itself is computed once per step.

No preactivation carries a bias vector; the scalar gate keeps a bias
because a one-parameter projection cannot center its operating point
without one.

Storage layout: the per-block weight matrices live as row slices of one
stacked array per family (inputs, recurrent, context) so a step costs
one matrix product per family instead of one per block.  Each block
remains an independently named ``Parameter`` view.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, ShapeError
from .numerics import Parameter, sigmoid_vec

VANILLA = "vanilla"
GRU = "gru"
CELL_KINDS = (VANILLA, GRU)

GATE_NONE = "none"
GATE_SOURCE = "source"
GATE_TARGET = "target"
GATE_BOTH = "both"
GATE_SCALAR = "gating_scalar"
GATE_VARIANTS = (GATE_NONE, GATE_SOURCE, GATE_TARGET, GATE_BOTH, GATE_SCALAR)

GATE_INPUTS = ("t_prev", "s", "y_prev")
ELEMENTWISE = "elementwise"
SCALAR = "scalar"


@dataclass(frozen=True)
class GateConfig:
    """Which gate variant is active, which signals feed it, and its granularity."""

    variant: str = GATE_NONE
    inputs: frozenset = frozenset()
    granularity: str = ELEMENTWISE

    def __post_init__(self):
        if self.variant not in GATE_VARIANTS:
            raise ConfigError(f"unknown gate variant {self.variant!r}")
        bad = set(self.inputs) - set(GATE_INPUTS)
        if bad:
            raise ConfigError(f"unknown gate inputs {sorted(bad)}")
        if self.variant == GATE_NONE:
            if self.inputs:
                raise ConfigError("gate variant 'none' takes no inputs")
        elif self.variant == GATE_SCALAR:
            if self.granularity != SCALAR:
                raise ConfigError("gating_scalar requires scalar granularity")
            if set(self.inputs) != {"t_prev"}:
                raise ConfigError("gating_scalar reads only t_prev")
        else:
            if self.granularity != ELEMENTWISE:
                raise ConfigError(f"variant {self.variant!r} requires elementwise granularity")
            if "t_prev" not in self.inputs:
                raise ConfigError("elementwise gates always read t_prev")

    @classmethod
    def none(cls) -> "GateConfig":
        return cls(GATE_NONE, frozenset(), ELEMENTWISE)

    @classmethod
    def scalar_gate(cls) -> "GateConfig":
        return cls(GATE_SCALAR, frozenset({"t_prev"}), SCALAR)

    @classmethod
    def elementwise(cls, variant: str, inputs=GATE_INPUTS) -> "GateConfig":
        return cls(variant, frozenset(inputs), ELEMENTWISE)

    @property
    def active(self) -> bool:
        return self.variant != GATE_NONE

    def inputs_sorted(self) -> list[str]:
        return sorted(self.inputs)


@dataclass(frozen=True)
class ScaleConfig:
    """Decode/step-time ratios applied to the source (a) and target (b) preactivations."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0 and 0.0 <= self.b <= 1.0):
            raise ConfigError(f"scale ratios must lie in [0, 1], got ({self.a}, {self.b})")

    @property
    def is_identity(self) -> bool:
        return self.a == 1.0 and self.b == 1.0


@dataclass
class ElementwiseGateParams:
    """Full gate block; matrices for disabled inputs stay allocated but unused."""

    w_prev: Parameter   # [n, m]
    u_state: Parameter  # [n, n]
    c_ctx: Parameter    # [n, n']

    def parameters(self) -> list[Parameter]:
        return [self.w_prev, self.u_state, self.c_ctx]


@dataclass
class ScalarGateParams:
    v_state: Parameter  # [n]
    bias: Parameter     # [1]

    def parameters(self) -> list[Parameter]:
        return [self.v_state, self.bias]


class CellParams:
    """Decoder cell weights: one preactivation block for vanilla, three for GRU.

    ``w_stack`` [k*n, m], ``u_stack`` [k*n, n], and ``c_stack`` [k*n, n']
    hold the blocks in (reset, update, candidate) order for the GRU
    (k = 3) or the single block for vanilla (k = 1); the named per-block
    ``Parameter`` objects are row-slice views of these stacks.
    """

    __slots__ = (
        "kind", "n",
        "w_stack", "u_stack", "c_stack",
        "w_grad", "u_grad", "c_grad",
        "gate", "_params",
    )

    def __init__(self, kind, n, w_stack, u_stack, c_stack, w_grad, u_grad, c_grad, gate, params):
        self.kind = kind
        self.n = n
        self.w_stack, self.u_stack, self.c_stack = w_stack, u_stack, c_stack
        self.w_grad, self.u_grad, self.c_grad = w_grad, u_grad, c_grad
        self.gate = gate
        self._params = params

    def parameters(self) -> list[Parameter]:
        return list(self._params)


_GRU_BLOCK_NAMES = ("reset", "update", "cand")


def make_cell_params(m: int, n: int, nprime: int, kind: str, cfg: GateConfig) -> CellParams:
    """Allocate zeroed cell parameters with canonical names."""
    if kind not in CELL_KINDS:
        raise ConfigError(f"unknown cell kind {kind!r}")
    names = ("main",) if kind == VANILLA else _GRU_BLOCK_NAMES
    k = len(names)
    w_stack, w_grad = np.zeros((k * n, m)), np.zeros((k * n, m))
    u_stack, u_grad = np.zeros((k * n, n)), np.zeros((k * n, n))
    c_stack, c_grad = np.zeros((k * n, nprime)), np.zeros((k * n, nprime))

    params = []
    for i, tag in enumerate(names):
        rows = slice(i * n, (i + 1) * n)
        params.append(Parameter(f"dec_{tag}_w", w_stack[rows], w_grad[rows]))
        params.append(Parameter(f"dec_{tag}_u", u_stack[rows], u_grad[rows]))
        params.append(Parameter(f"dec_{tag}_c", c_stack[rows], c_grad[rows]))

    gate: ElementwiseGateParams | ScalarGateParams | None = None
    if cfg.variant == GATE_SCALAR:
        gate = ScalarGateParams(
            Parameter("gate_scalar_v", np.zeros(n)),
            Parameter("gate_scalar_b", np.zeros(1)),
        )
    elif cfg.active:
        gate = ElementwiseGateParams(
            Parameter("gate_prev_w", np.zeros((n, m))),
            Parameter("gate_state_u", np.zeros((n, n))),
            Parameter("gate_ctx_c", np.zeros((n, nprime))),
        )
    if gate is not None:
        params.extend(gate.parameters())
    return CellParams(kind, n, w_stack, u_stack, c_stack, w_grad, u_grad, c_grad, gate, params)


def gate_block_size(m: int, n: int, nprime: int, cfg: GateConfig) -> int:
    """Number of gate parameters introduced by a configuration."""
    if not cfg.active:
        return 0
    if cfg.variant == GATE_SCALAR:
        return n + 1
    return n * m + n * n + n * nprime


def count_parameters(m: int, n: int, nprime: int, kind: str, cfg: GateConfig) -> int:
    """Exact entry count of the decoder cell plus its gate block."""
    if min(m, n, nprime) < 1:
        raise ConfigError("dimensions must be positive")
    block = n * m + n * n + n * nprime
    cell = block if kind == VANILLA else 3 * block
    return cell + gate_block_size(m, n, nprime, cfg)


def compute_gate(
    y_prev_emb: np.ndarray,
    t_prev: np.ndarray,
    s: np.ndarray,
    cfg: GateConfig,
    params: CellParams,
    we_pre: np.ndarray | None = None,
):
    """Gate value for one step: a vector in (0,1)^n, or a float for the scalar gate.

    Terms whose input is not in ``cfg.inputs`` contribute nothing.
    ``we_pre`` optionally supplies a precomputed ``W_z e(y_prev)``.
    """
    if not cfg.active:
        raise ContractError("compute_gate requires an active gate variant")
    gate = params.gate
    if gate is None:
        raise ContractError("cell parameters carry no gate block")
    if cfg.variant == GATE_SCALAR:
        pre = float(gate.v_state.value @ t_prev) + float(gate.bias.value[0])
        return float(sigmoid_vec(np.array([pre]))[0])
    pre = gate.u_state.value @ t_prev
    if "s" in cfg.inputs:
        pre = pre + gate.c_ctx.value @ s
    if "y_prev" in cfg.inputs:
        pre = pre + (we_pre if we_pre is not None else gate.w_prev.value @ y_prev_emb)
    return sigmoid_vec(pre)


def _gate_multipliers(variant: str, z):
    """(target multiplier, source multiplier) applied to the scaled preactivations."""
    if variant == GATE_NONE:
        return 1.0, 1.0
    if variant == GATE_SOURCE or variant == GATE_SCALAR:
        return 1.0, z
    if variant == GATE_TARGET:
        return z, 1.0
    return 1.0 - z, z  # both


def _is_one(g) -> bool:
    return isinstance(g, float) and g == 1.0


def _combine(g_t, g_s, a: float, b: float, raw_t, raw_s):
    """Gated, scaled preactivation ``g_t * (b*T) + g_s * (a*S)`` with fast paths."""
    left = raw_t if (_is_one(g_t) and b == 1.0) else g_t * (raw_t if b == 1.0 else b * raw_t)
    right = raw_s if (_is_one(g_s) and a == 1.0) else g_s * (raw_s if a == 1.0 else a * raw_s)
    return left + right


class CellCache:
    """Per-step activations retained for the backward pass."""

    __slots__ = (
        "e_prev", "t_prev", "s", "z", "z_forced",
        "raw_t", "raw_s", "ru", "cand", "q", "t_new",
    )

    def __init__(self):
        self.z = None
        self.z_forced = False
        self.ru = None
        self.cand = None
        self.q = None


def cell_forward(
    y_prev_emb: np.ndarray,
    t_prev: np.ndarray,
    s: np.ndarray,
    kind: str,
    cfg: GateConfig,
    scale: ScaleConfig,
    params: CellParams,
    z_override=None,
    we_pre: np.ndarray | None = None,
    gate_we_pre: np.ndarray | None = None,
) -> CellCache:
    """One decoder state update, returning the full activation cache.

    ``we_pre`` optionally holds the precomputed stacked input projection
    ``w_stack @ e(y_prev)``; ``z_override`` forces the gate value (used
    by the oracle equivalence checks).
    """
    if kind not in CELL_KINDS:
        raise ConfigError(f"unknown cell kind {kind!r}")
    if params.kind != kind:
        raise ContractError(f"cell parameters are for {params.kind!r}, not {kind!r}")
    n = params.n
    if t_prev.shape[0] != n:
        raise ShapeError(f"t_prev has dim {t_prev.shape[0]}, cell expects {n}")
    if s.shape[0] != params.c_stack.shape[1]:
        raise ShapeError(
            f"context has dim {s.shape[0]}, cell expects {params.c_stack.shape[1]}"
        )

    cache = CellCache()
    cache.e_prev, cache.t_prev, cache.s = y_prev_emb, t_prev, s

    if z_override is not None:
        z = z_override
        cache.z_forced = True
    elif cfg.active:
        z = compute_gate(y_prev_emb, t_prev, s, cfg, params, we_pre=gate_we_pre)
    else:
        z = None
    cache.z = z

    gated = z is not None
    g_t, g_s = _gate_multipliers(cfg.variant, z) if gated else (1.0, 1.0)
    a, b = scale.a, scale.b

    we_all = we_pre if we_pre is not None else params.w_stack @ y_prev_emb
    cs_all = params.c_stack @ s

    if kind == VANILLA:
        raw_t = we_all + params.u_stack @ t_prev
        cache.raw_t, cache.raw_s = raw_t, cs_all
        cache.t_new = np.tanh(_combine(g_t, g_s, a, b, raw_t, cs_all))
        return cache

    two_n = 2 * n
    if isinstance(z, np.ndarray):
        z2 = np.concatenate((z, z))
        g_t2, g_s2 = _gate_multipliers(cfg.variant, z2)
    else:
        g_t2, g_s2 = g_t, g_s

    raw_t_ru = we_all[:two_n] + params.u_stack[:two_n] @ t_prev
    ru = sigmoid_vec(_combine(g_t2, g_s2, a, b, raw_t_ru, cs_all[:two_n]))
    r, u = ru[:n], ru[n:]
    q = r * t_prev
    raw_t_c = we_all[two_n:] + params.u_stack[two_n:] @ q
    cand = np.tanh(_combine(g_t, g_s, a, b, raw_t_c, cs_all[two_n:]))

    cache.raw_t = np.concatenate((raw_t_ru, raw_t_c))
    cache.raw_s = cs_all
    cache.ru, cache.cand, cache.q = ru, cand, q
    cache.t_new = (1.0 - u) * t_prev + u * cand
    return cache


def cell_step(
    y_prev_emb: np.ndarray,
    t_prev: np.ndarray,
    s: np.ndarray,
    kind: str,
    cfg: GateConfig,
    scale: ScaleConfig,
    params: CellParams,
    z_override=None,
):
    """Public step: returns (new state, gate value or None)."""
    cache = cell_forward(y_prev_emb, t_prev, s, kind, cfg, scale, params, z_override)
    return cache.t_new, cache.z


def _scaled_back(dpre, g, ratio: float):
    """d raw-part = d pre * gate multiplier * scale ratio, skipping unit factors."""
    if _is_one(g) and ratio == 1.0:
        return dpre
    out = dpre * g
    if ratio != 1.0:
        out = out * ratio
    return out


def cell_backward(
    dt_new: np.ndarray,
    cache: CellCache,
    kind: str,
    cfg: GateConfig,
    scale: ScaleConfig,
    params: CellParams,
):
    """Accumulate parameter gradients for one step; returns input gradients.

    Returns ``(d y_prev_emb, d t_prev, d s)``.  Gradients of the gate
    block are included unless the forward pass forced ``z``.
    """
    e_prev, t_prev, s = cache.e_prev, cache.t_prev, cache.s
    a, b = scale.a, scale.b
    z = cache.z
    gated = z is not None
    g_t, g_s = _gate_multipliers(cfg.variant, z) if gated else (1.0, 1.0)
    n = params.n
    scalar_gate = cfg.variant == GATE_SCALAR
    gate_has_grad = gated and not cache.z_forced

    if kind == VANILLA:
        t_new = cache.t_new
        dpre_all = dt_new * (1.0 - t_new * t_new)
        d_t_all = _scaled_back(dpre_all, g_t, b)
        d_s_all = _scaled_back(dpre_all, g_s, a)
        dt_prev = params.u_stack.T @ d_t_all
        params.u_grad += np.outer(d_t_all, t_prev)
    else:
        two_n = 2 * n
        ru, cand, q = cache.ru, cache.cand, cache.q
        u = ru[n:]
        du = dt_new * (cand - t_prev)
        dc = dt_new * u
        dt_prev = dt_new * (1.0 - u)

        dpre_c = dc * (1.0 - cand * cand)
        d_t_c = _scaled_back(dpre_c, g_t, b)
        dq = params.u_stack[two_n:].T @ d_t_c
        dr = dq * t_prev
        dt_prev += dq * ru[:n]

        dpre_u = du * u * (1.0 - u)
        dpre_r = dr * ru[:n] * (1.0 - ru[:n])
        dpre_ru = np.concatenate((dpre_r, dpre_u))
        if isinstance(z, np.ndarray):
            z3 = np.concatenate((z, z, z))
            g_t3, g_s3 = _gate_multipliers(cfg.variant, z3)
        else:
            g_t3, g_s3 = g_t, g_s
        g_t2 = g_t3[:two_n] if isinstance(g_t3, np.ndarray) else g_t3
        g_s2 = g_s3[:two_n] if isinstance(g_s3, np.ndarray) else g_s3
        d_t_ru = _scaled_back(dpre_ru, g_t2, b)
        dt_prev += params.u_stack[:two_n].T @ d_t_ru
        params.u_grad[:two_n] += np.outer(d_t_ru, t_prev)
        params.u_grad[two_n:] += np.outer(d_t_c, q)

        dpre_all = np.concatenate((dpre_ru, dpre_c))
        d_t_all = np.concatenate((d_t_ru, d_t_c))
        d_s_all = _scaled_back(dpre_all, g_s3, a)

    params.w_grad += np.outer(d_t_all, e_prev)
    params.c_grad += np.outer(d_s_all, s)
    de = params.w_stack.T @ d_t_all
    ds = params.c_stack.T @ d_s_all

    if gate_has_grad:
        # d pre / d z, summed over blocks when the same z feeds all of them.
        scaled_t = cache.raw_t if b == 1.0 else b * cache.raw_t
        scaled_s = cache.raw_s if a == 1.0 else a * cache.raw_s
        if cfg.variant == GATE_SOURCE:
            dz_all = dpre_all * scaled_s
        elif cfg.variant == GATE_TARGET:
            dz_all = dpre_all * scaled_t
        elif cfg.variant == GATE_BOTH:
            dz_all = dpre_all * (scaled_s - scaled_t)
        else:  # gating_scalar
            dz_all = None
            dz_scalar = float(dpre_all @ scaled_s)

        gate = params.gate
        if scalar_gate:
            dpre_z = dz_scalar * z * (1.0 - z)
            gate.v_state.grad += dpre_z * t_prev
            gate.bias.grad[0] += dpre_z
            dt_prev += dpre_z * gate.v_state.value
        else:
            if kind == VANILLA:
                dz = dz_all
            else:
                dz = dz_all[:n] + dz_all[n:2 * n] + dz_all[2 * n:]
            dpre_z = dz * z * (1.0 - z)
            gate.u_state.grad += np.outer(dpre_z, t_prev)
            dt_prev += gate.u_state.value.T @ dpre_z
            if "s" in cfg.inputs:
                gate.c_ctx.grad += np.outer(dpre_z, s)
                ds += gate.c_ctx.value.T @ dpre_z
            if "y_prev" in cfg.inputs:
                gate.w_prev.grad += np.outer(dpre_z, e_prev)
                de += gate.w_prev.value.T @ dpre_z

    return de, dt_prev, ds
