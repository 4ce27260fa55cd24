"""Ten first-order optimizers behind one stepping interface, plus lr schedules.

Every optimizer consumes parameters and gradients as flat lists of float64
arrays (see ``net.params_to_list``) and returns the updated parameter list.
Auxiliary buffers are allocated lazily on the first step and mirror the
parameter shapes.  Weight decay is coupled (added to the gradient) for every
variant except AdamW, which applies it decoupled: theta <- theta - lr*lam*theta.

Update rules follow each method's defining publication; the formula used is
stated in each class docstring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadSpecError,
    NonFiniteGradientError,
    ShapeMismatchError,
    StepOutOfRangeError,
)

Arrays = list


class Optimizer:
    """Base stepping interface: validate, apply coupled decay, dispatch."""

    name = "base"
    default_lr = 0.01
    decoupled_decay = False

    def __init__(self, weight_decay: float = 0.0):
        if weight_decay < 0:
            raise BadSpecError("weight_decay must be >= 0")
        self.weight_decay = float(weight_decay)
        self.t = 0

    def step(self, params: Arrays, grads: Arrays, lr: float) -> Arrays:
        if lr < 0:
            raise BadSpecError("learning rate must be >= 0")
        if len(params) != len(grads):
            raise ShapeMismatchError(
                f"{len(params)} params vs {len(grads)} grads"
            )
        for p, g in zip(params, grads):
            if p.shape != g.shape:
                raise ShapeMismatchError(f"param {p.shape} vs grad {g.shape}")
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradientError("gradient has NaN or Inf entries")
        self.t += 1
        lam = self.weight_decay
        if lam and not self.decoupled_decay:
            grads = [g + lam * p for p, g in zip(params, grads)]
        new_params = self._step(params, grads, float(lr))
        if lam and self.decoupled_decay:
            new_params = [np - lr * lam * p for np, p in zip(new_params, params)]
        return new_params

    def reported(self, params: Arrays) -> Arrays:
        """Parameters to evaluate and checkpoint; ASGD overrides with its average."""
        return params

    def _step(self, params: Arrays, grads: Arrays, lr: float) -> Arrays:
        raise NotImplementedError

    def _zeros_like(self, params: Arrays) -> Arrays:
        return [np.zeros_like(p) for p in params]


class Sgd(Optimizer):
    """v <- mu*v + g; theta <- theta - lr*v (g already includes coupled decay)."""

    name = "sgd"
    default_lr = 0.1

    def __init__(self, momentum: float = 0.9, weight_decay: float = 0.0):
        super().__init__(weight_decay)
        self.momentum = float(momentum)
        self.velocity: Arrays | None = None

    def _step(self, params, grads, lr):
        if self.velocity is None:
            self.velocity = self._zeros_like(params)
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            v = self.momentum * self.velocity[i] + g
            self.velocity[i] = v
            out.append(p - lr * v)
        return out


class Asgd(Optimizer):
    """Plain SGD iterates with a running (Polyak) average of all iterates.

    reported() returns the average; after k steps it equals the arithmetic
    mean of the first k post-step parameter values.
    """

    name = "asgd"
    default_lr = 0.01

    def __init__(self, weight_decay: float = 0.0):
        super().__init__(weight_decay)
        self.average: Arrays | None = None

    def _step(self, params, grads, lr):
        out = [p - lr * g for p, g in zip(params, grads)]
        if self.average is None:
            self.average = self._zeros_like(params)
        for i, p in enumerate(out):
            self.average[i] = self.average[i] + (p - self.average[i]) / self.t
        return out

    def reported(self, params):
        if self.average is None:
            return params
        return [a.copy() for a in self.average]


class Adagrad(Optimizer):
    """acc <- acc + g^2; theta <- theta - lr * g / (sqrt(acc) + eps)."""

    name = "adagrad"
    default_lr = 0.01

    def __init__(self, eps: float = 1e-10, weight_decay: float = 0.0):
        super().__init__(weight_decay)
        self.eps = float(eps)
        self.accum: Arrays | None = None

    def _step(self, params, grads, lr):
        if self.accum is None:
            self.accum = self._zeros_like(params)
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.accum[i] = self.accum[i] + g * g
            out.append(p - lr * g / (np.sqrt(self.accum[i]) + self.eps))
        return out


class Adadelta(Optimizer):
    """Unit-correcting accumulators; lr defaults to 1 so the raw rule applies.

    sq <- rho*sq + (1-rho)*g^2
    delta = sqrt(acc + eps) / sqrt(sq + eps) * g
    acc <- rho*acc + (1-rho)*delta^2
    theta <- theta - lr*delta
    """

    name = "adadelta"
    default_lr = 1.0

    def __init__(self, rho: float = 0.9, eps: float = 1e-6, weight_decay: float = 0.0):
        super().__init__(weight_decay)
        self.rho = float(rho)
        self.eps = float(eps)
        self.sq_avg: Arrays | None = None
        self.delta_acc: Arrays | None = None

    def _step(self, params, grads, lr):
        if self.sq_avg is None:
            self.sq_avg = self._zeros_like(params)
            self.delta_acc = self._zeros_like(params)
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.sq_avg[i] = self.rho * self.sq_avg[i] + (1 - self.rho) * g * g
            delta = np.sqrt(self.delta_acc[i] + self.eps) / np.sqrt(self.sq_avg[i] + self.eps) * g
            self.delta_acc[i] = self.rho * self.delta_acc[i] + (1 - self.rho) * delta * delta
            out.append(p - lr * delta)
        return out


class Adam(Optimizer):
    """Bias-corrected first and second moments.

    m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2
    theta <- theta - lr * mhat / (sqrt(vhat) + eps)
    """

    name = "adam"
    default_lr = 1e-3

    def __init__(
        self,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        super().__init__(weight_decay)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.m: Arrays | None = None
        self.v: Arrays | None = None

    def _moments(self, params, grads):
        if self.m is None:
            self.m = self._zeros_like(params)
            self.v = self._zeros_like(params)
        for i, g in enumerate(grads):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g

    def _step(self, params, grads, lr):
        self._moments(params, grads)
        bc1 = 1 - self.beta1 ** self.t
        bc2 = 1 - self.beta2 ** self.t
        out = []
        for i, p in enumerate(params):
            mhat = self.m[i] / bc1
            vhat = self.v[i] / bc2
            out.append(p - lr * mhat / (np.sqrt(vhat) + self.eps))
        return out


class AdamW(Adam):
    """Adam step plus decoupled decay theta <- theta - lr*lam*theta."""

    name = "adamw"
    default_lr = 1e-3
    decoupled_decay = True


class Adamax(Adam):
    """Infinity-norm second moment: u <- max(b2*u, |g|).

    theta <- theta - (lr / (1 - b1^t)) * m / (u + eps)
    """

    name = "adamax"
    default_lr = 2e-3

    def __init__(self, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        super().__init__(beta1, beta2, eps, weight_decay)
        self.u: Arrays | None = None

    def _step(self, params, grads, lr):
        if self.m is None:
            self.m = self._zeros_like(params)
            self.u = self._zeros_like(params)
        bc1 = 1 - self.beta1 ** self.t
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.u[i] = np.maximum(self.beta2 * self.u[i], np.abs(g))
            out.append(p - (lr / bc1) * self.m[i] / (self.u[i] + self.eps))
        return out


class Nadam(Adam):
    """Nesterov-weighted Adam with the decaying momentum schedule.

    mu_t = b1 * (1 - 0.5 * 0.96^(t*psi)), psi = 0.004; the running product
    of mu values replaces the plain b1^t bias correction on the first moment.
    """

    name = "nadam"
    default_lr = 2e-3

    def __init__(
        self,
        beta1=0.9,
        beta2=0.999,
        eps=1e-8,
        weight_decay=0.0,
        momentum_decay: float = 0.004,
    ):
        super().__init__(beta1, beta2, eps, weight_decay)
        self.momentum_decay = float(momentum_decay)
        self.mu_product = 1.0

    def _mu(self, t: int) -> float:
        return self.beta1 * (1 - 0.5 * 0.96 ** (t * self.momentum_decay))

    def _step(self, params, grads, lr):
        self._moments(params, grads)
        mu_t = self._mu(self.t)
        mu_next = self._mu(self.t + 1)
        self.mu_product *= mu_t
        prod_t = self.mu_product
        prod_next = prod_t * mu_next
        bc2 = 1 - self.beta2 ** self.t
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            mhat = mu_next * self.m[i] / (1 - prod_next) + (1 - mu_t) * g / (1 - prod_t)
            vhat = self.v[i] / bc2
            out.append(p - lr * mhat / (np.sqrt(vhat) + self.eps))
        return out


class RAdam(Adam):
    """Rectified Adam: adaptive step only once the variance estimate is tractable.

    rho_inf = 2/(1-b2) - 1; rho_t = rho_inf - 2*t*b2^t/(1-b2^t).
    When rho_t > 4 apply the rectified adaptive step with factor
    sqrt(((rho_t-4)(rho_t-2)rho_inf) / ((rho_inf-4)(rho_inf-2)rho_t));
    otherwise fall back to the unadapted theta <- theta - lr*mhat.
    """

    name = "radam"
    default_lr = 1e-3

    def _step(self, params, grads, lr):
        self._moments(params, grads)
        bc1 = 1 - self.beta1 ** self.t
        bc2 = 1 - self.beta2 ** self.t
        rho_inf = 2 / (1 - self.beta2) - 1
        rho_t = rho_inf - 2 * self.t * self.beta2 ** self.t / bc2
        out = []
        if rho_t > 4:
            rect = math.sqrt(
                ((rho_t - 4) * (rho_t - 2) * rho_inf)
                / ((rho_inf - 4) * (rho_inf - 2) * rho_t)
            )
            for i, p in enumerate(params):
                mhat = self.m[i] / bc1
                vhat = self.v[i] / bc2
                out.append(p - lr * rect * mhat / (np.sqrt(vhat) + self.eps))
        else:
            for i, p in enumerate(params):
                out.append(p - lr * self.m[i] / bc1)
        return out


class RmsProp(Optimizer):
    """sq <- alpha*sq + (1-alpha)*g^2; theta <- theta - lr * g / (sqrt(sq) + eps)."""

    name = "rmsprop"
    default_lr = 0.01

    def __init__(self, alpha: float = 0.99, eps: float = 1e-8, weight_decay: float = 0.0):
        super().__init__(weight_decay)
        self.alpha = float(alpha)
        self.eps = float(eps)
        self.sq_avg: Arrays | None = None

    def _step(self, params, grads, lr):
        if self.sq_avg is None:
            self.sq_avg = self._zeros_like(params)
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.sq_avg[i] = self.alpha * self.sq_avg[i] + (1 - self.alpha) * g * g
            out.append(p - lr * g / (np.sqrt(self.sq_avg[i]) + self.eps))
        return out


OPTIMIZERS: dict[str, type[Optimizer]] = {
    cls.name: cls
    for cls in (Sgd, Asgd, Adagrad, Adadelta, Adam, AdamW, Adamax, Nadam, RAdam, RmsProp)
}


def make_optimizer(name: str, **hyper) -> Optimizer:
    try:
        cls = OPTIMIZERS[name]
    except KeyError:
        raise BadSpecError(f"unknown optimizer {name!r}") from None
    try:
        return cls(**hyper)
    except TypeError as exc:
        raise BadSpecError(f"bad hyperparameters for {name}: {exc}") from None


def default_lr(name: str) -> float:
    try:
        return OPTIMIZERS[name].default_lr
    except KeyError:
        raise BadSpecError(f"unknown optimizer {name!r}") from None


@dataclass(frozen=True)
class LrSchedule:
    kind: str  # "constant" or "cosine"
    lr_max: float
    lr_min: float = 0.0
    total_steps: int = 1

    def validate(self) -> None:
        if self.kind not in ("constant", "cosine"):
            raise BadSpecError(f"unknown schedule kind {self.kind!r}")
        if not (self.lr_max >= self.lr_min >= 0):
            raise BadSpecError("need lr_max >= lr_min >= 0")
        if self.total_steps < 1:
            raise BadSpecError("total_steps must be >= 1")


def schedule_lr(schedule: LrSchedule, t: int) -> float:
    """Learning rate at integer step t in [0, total_steps]."""
    schedule.validate()
    if not 0 <= t <= schedule.total_steps:
        raise StepOutOfRangeError(
            f"step {t} outside [0, {schedule.total_steps}]"
        )
    if schedule.kind == "constant":
        return schedule.lr_max
    span = schedule.lr_max - schedule.lr_min
    return schedule.lr_min + 0.5 * span * (1 + math.cos(math.pi * t / schedule.total_steps))


# Named SGD configurations: (schedule kind, lr_max, lr_min).
SCHEDULE_PRESETS: dict[str, tuple[str, float, float]] = {
    "sgd-anneal": ("cosine", 0.1, 0.0),
    "sgd-big": ("constant", 0.01, 0.01),
    "sgd-small": ("constant", 1e-4, 1e-4),
}


def preset_schedule(preset: str, total_steps: int) -> LrSchedule:
    try:
        kind, lr_max, lr_min = SCHEDULE_PRESETS[preset]
    except KeyError:
        raise BadSpecError(f"unknown preset {preset!r}") from None
    return LrSchedule(kind=kind, lr_max=lr_max, lr_min=lr_min, total_steps=total_steps)
