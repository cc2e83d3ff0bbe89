"""Deterministic degradations of a ground-truth trajectory.

Random draws come from numpy's Philox-4x64-10 counter-based generator keyed
by ``PerturbationSpec.seed`` (``numpy.random.Generator(numpy.random.Philox(seed))``).
Noise is drawn once per ``NoiseLowAmp`` entry as an ``(n, 2)`` array of
uniform doubles, row-major, so x and y alternate in the underlying stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import PupilTrajectory
from .errors import EmptySpecError, InvalidParamsError, OutOfBoundsError, TooShortError


@dataclass(frozen=True)
class NoiseLowAmp:
    amplitude: float


@dataclass(frozen=True)
class Blink:
    """Vertical excursion of ``magnitude`` pixels over ``duration`` samples."""

    start: int
    duration: int
    magnitude: float


@dataclass(frozen=True)
class PixelShift:
    start: int
    offset: tuple


@dataclass(frozen=True)
class Tremor:
    """Sinusoid of ``amplitude`` pixels on x at DFT bin ``frequency``."""

    frequency: float
    amplitude: float


Perturbation = Union[NoiseLowAmp, Blink, PixelShift, Tremor]


@dataclass(frozen=True)
class PerturbationSpec:
    kinds: Sequence[Perturbation]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if not self.kinds:
            raise EmptySpecError("perturbation spec lists no perturbations")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParamsError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def validate(self, n: int) -> None:
        for k in self.kinds:
            if isinstance(k, NoiseLowAmp):
                _nonneg("noise amplitude", k.amplitude)
            elif isinstance(k, Blink):
                if k.duration < 0 or not 0 <= k.start or k.start + k.duration > n:
                    raise OutOfBoundsError(
                        f"blink [{k.start}, {k.start + k.duration}) outside trajectory of length {n}")
            elif isinstance(k, PixelShift):
                if not 0 <= k.start < n:
                    raise OutOfBoundsError(f"pixel shift start {k.start} outside trajectory of length {n}")
            elif isinstance(k, Tremor):
                _nonneg("tremor amplitude", k.amplitude)
                if not 0 <= k.frequency <= n / 2:
                    raise OutOfBoundsError(f"tremor bin {k.frequency} outside [0, {n / 2}]")
            else:
                raise InvalidParamsError(f"unknown perturbation {k!r}")


def _nonneg(name, value):
    if not value >= 0:
        raise InvalidParamsError(f"{name} must be >= 0, got {value}")


def perturb(truth: PupilTrajectory, spec: PerturbationSpec) -> PupilTrajectory:
    """Apply ``spec.kinds`` to ``truth`` in listed order."""
    n = len(truth)
    if n < 2:
        raise TooShortError(f"need at least 2 samples to perturb, got {n}")
    spec.validate(n)
    rng = np.random.Generator(np.random.Philox(int(spec.seed)))
    out = truth.xy.copy()
    i = np.arange(n)
    for k in spec.kinds:
        if isinstance(k, NoiseLowAmp):
            out += rng.uniform(-k.amplitude, k.amplitude, size=(n, 2))
        elif isinstance(k, Blink):
            sl = slice(k.start, k.start + k.duration)
            out[sl] = truth.xy[sl]
            out[sl, 1] += k.magnitude
        elif isinstance(k, PixelShift):
            out[k.start:] += np.asarray(k.offset, dtype=float)
        elif isinstance(k, Tremor):
            out[:, 0] += k.amplitude * np.sin(2.0 * np.pi * k.frequency * i / n)
    return truth.with_xy(out)


_NAMES = {"noise": NoiseLowAmp, "blink": Blink, "shift": PixelShift, "tremor": Tremor}


def format_kinds(kinds: Sequence[Perturbation]) -> str:
    """Serialise perturbations as ``name:a,b,...`` items joined by ``;``."""
    parts = []
    for k in kinds:
        if isinstance(k, NoiseLowAmp):
            parts.append(f"noise:{k.amplitude!r}")
        elif isinstance(k, Blink):
            parts.append(f"blink:{k.start},{k.duration},{k.magnitude!r}")
        elif isinstance(k, PixelShift):
            parts.append(f"shift:{k.start},{k.offset[0]!r},{k.offset[1]!r}")
        elif isinstance(k, Tremor):
            parts.append(f"tremor:{k.frequency!r},{k.amplitude!r}")
    return ";".join(parts)


def parse_kinds(text: str) -> list:
    """Inverse of :func:`format_kinds`."""
    kinds = []
    for item in filter(None, (p.strip() for p in text.split(";"))):
        name, _, args = item.partition(":")
        name = name.strip().lower()
        if name not in _NAMES:
            raise InvalidParamsError(f"unknown perturbation {name!r}; expected one of {sorted(_NAMES)}")
        try:
            vals = [a.strip() for a in args.split(",")] if args.strip() else []
            if name == "noise" and len(vals) == 1:
                kinds.append(NoiseLowAmp(float(vals[0])))
            elif name == "blink" and len(vals) == 3:
                kinds.append(Blink(int(vals[0]), int(vals[1]), float(vals[2])))
            elif name == "shift" and len(vals) == 3:
                kinds.append(PixelShift(int(vals[0]), (float(vals[1]), float(vals[2]))))
            elif name == "tremor" and len(vals) == 2:
                kinds.append(Tremor(float(vals[0]), float(vals[1])))
            else:
                raise ValueError("wrong number of arguments")
        except ValueError as exc:
            raise InvalidParamsError(f"bad perturbation {item!r}: {exc}") from None
    if not kinds:
        raise EmptySpecError("perturbation spec lists no perturbations")
    return kinds
