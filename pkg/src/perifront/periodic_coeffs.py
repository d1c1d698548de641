"""L-periodic coefficient functions and complete competition systems.

Coefficients are truncated Fourier series, so periodicity is exact by
construction and first/second derivatives are exact trigonometric sums.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SystemValidationError

try:  # py3.11+ stdlib, tomli backport otherwise
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml


@dataclass(frozen=True)
class PeriodicFn:
    """f(x) = mean + sum_k a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L)."""

    period: float
    mean: float = 0.0
    cosine_coeffs: tuple = ()
    sine_coeffs: tuple = ()

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")
        object.__setattr__(self, "cosine_coeffs", tuple(float(c) for c in self.cosine_coeffs))
        object.__setattr__(self, "sine_coeffs", tuple(float(s) for s in self.sine_coeffs))

    @classmethod
    def constant(cls, value, period=1.0):
        return cls(period=period, mean=float(value))

    @property
    def n_modes(self):
        return max(len(self.cosine_coeffs), len(self.sine_coeffs))

    def _padded(self):
        k = self.n_modes
        a = np.zeros(k)
        b = np.zeros(k)
        a[: len(self.cosine_coeffs)] = self.cosine_coeffs
        b[: len(self.sine_coeffs)] = self.sine_coeffs
        return a, b

    def eval(self, x):
        """Fourier sum at x (scalar or array)."""
        x = np.asarray(x, dtype=float)
        if self.n_modes == 0:
            out = np.full(x.shape, self.mean)
            return out if out.ndim else float(out)
        a, b = self._padded()
        k = np.arange(1, self.n_modes + 1)
        phase = np.multiply.outer(x, k) * (2.0 * np.pi / self.period)
        out = self.mean + np.cos(phase) @ a + np.sin(phase) @ b
        return out if out.ndim else float(out)

    def eval_d1(self, x):
        """Exact first derivative."""
        x = np.asarray(x, dtype=float)
        if self.n_modes == 0:
            out = np.zeros(x.shape)
            return out if out.ndim else float(out)
        a, b = self._padded()
        k = np.arange(1, self.n_modes + 1)
        w = 2.0 * np.pi * k / self.period
        phase = np.multiply.outer(x, k) * (2.0 * np.pi / self.period)
        out = -np.sin(phase) @ (w * a) + np.cos(phase) @ (w * b)
        return out if out.ndim else float(out)

    def eval_d2(self, x):
        """Exact second derivative."""
        x = np.asarray(x, dtype=float)
        if self.n_modes == 0:
            out = np.zeros(x.shape)
            return out if out.ndim else float(out)
        a, b = self._padded()
        k = np.arange(1, self.n_modes + 1)
        w2 = (2.0 * np.pi * k / self.period) ** 2
        phase = np.multiply.outer(x, k) * (2.0 * np.pi / self.period)
        out = -np.cos(phase) @ (w2 * a) - np.sin(phase) @ (w2 * b)
        return out if out.ndim else float(out)

    __call__ = eval

    def lipschitz_bound(self):
        """Upper bound on sup|f'| from the Fourier coefficients."""
        a, b = self._padded()
        k = np.arange(1, self.n_modes + 1)
        return float(np.sum(2.0 * np.pi * k / self.period * (np.abs(a) + np.abs(b))))

    def scaled(self, factor):
        return PeriodicFn(
            self.period,
            factor * self.mean,
            tuple(factor * c for c in self.cosine_coeffs),
            tuple(factor * s for s in self.sine_coeffs),
        )

    def plus(self, other):
        """Sum of two series on the same period (exact in coefficient space)."""
        if isinstance(other, (int, float)):
            return PeriodicFn(self.period, self.mean + other, self.cosine_coeffs, self.sine_coeffs)
        if abs(other.period - self.period) > 1e-14 * self.period:
            raise ValueError("cannot add PeriodicFn with different periods")
        k = max(self.n_modes, other.n_modes)
        a1, b1 = self._padded()
        a2, b2 = other._padded()
        a = np.zeros(k)
        b = np.zeros(k)
        a[: a1.size] += a1
        a[: a2.size] += a2
        b[: b1.size] += b1
        b[: b2.size] += b2
        return PeriodicFn(self.period, self.mean + other.mean, tuple(a), tuple(b))


COEFFICIENT_NAMES = ("d1", "d2", "a1", "a2", "b1", "b2", "a11", "a12", "a21", "a22")
_POSITIVITY_CHECKED = ("d1", "d2", "a11", "a12", "a21", "a22")


@dataclass(frozen=True)
class CompetitionSystem:
    """Full coefficient set of the two-species competition model."""

    L: float
    d1: PeriodicFn
    d2: PeriodicFn
    a1: PeriodicFn
    a2: PeriodicFn
    b1: PeriodicFn
    b2: PeriodicFn
    a11: PeriodicFn
    a12: PeriodicFn
    a21: PeriodicFn
    a22: PeriodicFn

    def __post_init__(self):
        for name in COEFFICIENT_NAMES:
            fn = getattr(self, name)
            if abs(fn.period - self.L) > 1e-14 * self.L:
                raise ValueError(f"coefficient {name} has period {fn.period}, system has L={self.L}")

    def coefficient(self, name):
        if name not in COEFFICIENT_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    @classmethod
    def from_constants(cls, L=1.0, **values):
        """Build a constant-coefficient system; keys are coefficient names."""
        missing = [n for n in COEFFICIENT_NAMES if n not in values]
        if missing:
            raise ValueError(f"missing coefficients: {missing}")
        extra = [n for n in values if n not in COEFFICIENT_NAMES]
        if extra:
            raise ValueError(f"unknown coefficients: {extra}")
        fns = {n: PeriodicFn.constant(values[n], L) for n in COEFFICIENT_NAMES}
        return cls(L=L, **fns)


@dataclass(frozen=True)
class ValidationReport:
    """Sampled minima, certified ellipticity constant and slack margins."""

    n_samples: int
    minima: dict  # name -> (sampled min, argmin x)
    slack: dict  # name -> Lipschitz slack bound for the sampling gap
    d0: float  # certified ellipticity constant
    margin: float  # worst certified positivity margin over checked coefficients
    passed: bool
    violations: tuple = ()  # (name, x, value) for each failed coefficient

    def to_dict(self):
        return {
            "n_samples": self.n_samples,
            "minima": {k: {"min": v[0], "x": v[1]} for k, v in self.minima.items()},
            "slack": dict(self.slack),
            "d0": self.d0,
            "margin": self.margin,
            "passed": self.passed,
            "violations": [{"name": n, "x": x, "value": v} for (n, x, v) in self.violations],
        }


def validate_system(system, n_samples=4096):
    """Certify uniform ellipticity and competition positivity by dense sampling.

    The certified minimum subtracts a Lipschitz slack bound computed from the
    Fourier coefficients, so near-violations hiding between samples are caught.
    Raises SystemValidationError (with the offending x) on any violation.
    """
    if n_samples < 64:
        raise ValueError(f"n_samples must be >= 64, got {n_samples}")
    xs = np.linspace(0.0, system.L, n_samples, endpoint=False)
    h = system.L / n_samples
    minima = {}
    slack = {}
    violations = []
    for name in _POSITIVITY_CHECKED:
        fn = system.coefficient(name)
        vals = fn.eval(xs)
        j = int(np.argmin(vals))
        minima[name] = (float(vals[j]), float(xs[j]))
        slack[name] = fn.lipschitz_bound() * h / 2.0
        if minima[name][0] - slack[name] <= 0.0:
            violations.append((name, minima[name][1], minima[name][0]))
    d0 = min(minima["d1"][0] - slack["d1"], minima["d2"][0] - slack["d2"])
    margin = min(minima[n][0] - slack[n] for n in _POSITIVITY_CHECKED)
    report = ValidationReport(
        n_samples=n_samples,
        minima=minima,
        slack=slack,
        d0=d0,
        margin=margin,
        passed=not violations,
        violations=tuple(violations),
    )
    if violations:
        worst = min(violations, key=lambda v: v[2])
        raise SystemValidationError(
            f"coefficient {worst[0]} fails positivity near x={worst[1]:.6g} "
            f"(value {worst[2]:.6g}); system unusable downstream",
            report=report,
        )
    return report


# -- configuration parsing ---------------------------------------------------

_COEF_KEYS = {"mean", "cos", "sin"}


def _coefficient_from_block(name, block, period):
    if not isinstance(block, dict):
        raise ConfigError(f"coefficient block '{name}' must be a table")
    unknown = set(block) - _COEF_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in coefficient block '{name}'")
    if "mean" not in block:
        raise ConfigError(f"coefficient block '{name}' is missing 'mean'")
    cos = block.get("cos", [])
    sin = block.get("sin", [])
    for label, seq in (("cos", cos), ("sin", sin)):
        if not isinstance(seq, list) or not all(isinstance(v, (int, float)) for v in seq):
            raise ConfigError(f"'{label}' in block '{name}' must be a list of numbers")
    return PeriodicFn(period=period, mean=float(block["mean"]), cosine_coeffs=tuple(cos), sine_coeffs=tuple(sin))


def system_from_mapping(mapping):
    """Build a CompetitionSystem from a parsed config mapping.

    Expected layout: top-level 'period' plus one block per coefficient name.
    Unknown keys are errors; so are missing coefficients.
    """
    if "period" not in mapping:
        raise ConfigError("missing top-level 'period'")
    period = mapping["period"]
    if not isinstance(period, (int, float)) or period <= 0:
        raise ConfigError(f"'period' must be a positive number, got {period!r}")
    unknown = set(mapping) - set(COEFFICIENT_NAMES) - {"period"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    missing = [n for n in COEFFICIENT_NAMES if n not in mapping]
    if missing:
        raise ConfigError(f"missing coefficient blocks: {missing}")
    fns = {n: _coefficient_from_block(n, mapping[n], float(period)) for n in COEFFICIENT_NAMES}
    return CompetitionSystem(L=float(period), **fns)


def load_system_config(path):
    """Parse a system config file (strict TOML-style structured text)."""
    with open(path, "rb") as fh:
        try:
            data = _toml.load(fh)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return system_from_mapping(data)
