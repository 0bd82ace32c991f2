"""Uniform dispatch over every model: ``GeneratorSpec(model, params)``.

``sample_paths(length, reps, rng)`` returns a ``(reps, length)`` array.  For
the continuous-time models a path is the count process read at ``length``
equally spaced times in ``(0, horizon]``; for the multicolor urn it is the
sequence of drawn color indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import gaussian, point_processes as pp, urns
from .distributions import parse_distribution
from .rng import RngStream
from .sequence import SequenceSample


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).split(";"))


@dataclass(frozen=True)
class _Model:
    params: dict[str, tuple[Callable[[Any], Any], Any]]  # name -> (converter, default; ... = required)
    paths: Callable[..., np.ndarray]
    kind: str = "integer"
    aliases: dict[str, str] = field(default_factory=dict)
    build: Callable[[dict], Any] | None = None


REQUIRED = ...


def _pp_params(p):
    return pp.PointProcessParams(p["alpha"], p["beta"], p["horizon"])


def _pp_grid(p, length):
    return np.linspace(p["horizon"] / length, p["horizon"], length)


def _urn(p):
    return urns.UrnState(p["counts"], p.get("reinforcement"))


def _q(p):
    return gaussian.QModelParams(p["mu_T"], p["sigma_T"], p["sigma_X"])


def _twin(p):
    return gaussian.TwinParams(p["a"], p["b"], p["c"])


def _monkey(p):
    return urns.MonkeyParams(p["alpha"], p["N"], p["K"])


MODELS: dict[str, _Model] = {
    "polya-binary": _Model(
        {"ones": (float, 1.0), "zeros": (float, 1.0)},
        lambda p, n, r, rng: urns.polya_binary_paths(n, r, rng, p["ones"], p["zeros"]),
    ),
    "talent-uniform": _Model(
        {},
        lambda p, n, r, rng: urns.talent_binary_paths(urns.uniform_talent(), n, r, rng),
    ),
    "talent-binary": _Model(
        {"talent": (parse_distribution, REQUIRED)},
        lambda p, n, r, rng: urns.talent_binary_paths(urns.TalentBinaryParams(p["talent"]), n, r, rng),
        build=lambda p: urns.TalentBinaryParams(p["talent"]),
    ),
    "iid-bernoulli": _Model(
        {"p": (float, 0.5)},
        lambda p, n, r, rng: urns.iid_bernoulli_paths(p["p"], n, r, rng),
    ),
    "price": _Model({}, lambda p, n, r, rng: urns.price_paths(n, r, rng)),
    "simon": _Model(
        {"alpha": (float, REQUIRED), "nr0": (int, 1), "k0": (int, 2)},
        lambda p, n, r, rng: urns.simon_paths(p["alpha"], p["nr0"], p["k0"], n, r, rng),
        aliases={"n_R0": "nr0", "K0": "k0"},
        build=lambda p: urns._check_simon(p["alpha"], p["nr0"], p["k0"]),
    ),
    "ba-degree": _Model(
        {"m0": (int, 1), "t_entry": (int, 1)},
        lambda p, n, r, rng: urns.ba_degree_paths(p["m0"], p["t_entry"], n, r, rng),
    ),
    "gibrat": _Model(
        {"y0": (float, 1.0), "growth": (parse_distribution, REQUIRED)},
        lambda p, n, r, rng: urns.gibrat_paths(p["y0"], p["growth"], n, r, rng),
        kind="real",
    ),
    "gibrat-increments": _Model(
        {"y0": (float, 1.0), "growth": (parse_distribution, REQUIRED)},
        lambda p, n, r, rng: urns.gibrat_increment_paths(p["y0"], p["growth"], n, r, rng),
        kind="real",
    ),
    "monkey": _Model(
        {"alpha": (float, REQUIRED), "N": (int, 26), "K": (int, 5), "k": (int, None)},
        lambda p, n, r, rng: urns.monkey_paths(_monkey(p), n, r, rng, p["k"]),
        build=_monkey,
    ),
    "multicolor-urn": _Model(
        {"counts": (_floats, (1.0, 1.0, 1.0)), "reinforcement": (_floats, None)},
        lambda p, n, r, rng: urns.multicolor_color_paths(_urn(p), n, r, rng),
        build=_urn,
    ),
    "q-model": _Model(
        {"mu_T": (float, 0.0), "sigma_T": (float, 1.0), "sigma_X": (float, 1.0)},
        lambda p, n, r, rng: gaussian.q_model_paths(_q(p), n, r, rng),
        kind="real",
        aliases={"mu": "mu_T", "muT": "mu_T", "sigmaT": "sigma_T", "sigmaX": "sigma_X"},
        build=_q,
    ),
    "twin": _Model(
        {"a": (float, 0.0), "b": (float, 1.0), "c": (float, 1.0)},
        lambda p, n, r, rng: gaussian.twin_paths(_twin(p), n, r, rng),
        kind="real",
        build=_twin,
    ),
    "contagious-poisson": _Model(
        {"alpha": (float, REQUIRED), "beta": (float, REQUIRED), "horizon": (float, 1.0)},
        lambda p, n, r, rng: pp.contagious_counts(_pp_params(p), _pp_grid(p, n), r, rng),
        build=_pp_params,
    ),
    "mixed-poisson-twin": _Model(
        {"alpha": (float, REQUIRED), "beta": (float, REQUIRED), "horizon": (float, 1.0)},
        lambda p, n, r, rng: pp.mixed_twin_counts(_pp_params(p), _pp_grid(p, n), r, rng),
        build=_pp_params,
    ),
    "homogeneous-mixed-poisson": _Model(
        {"alpha": (float, REQUIRED), "beta": (float, REQUIRED), "horizon": (float, 1.0)},
        lambda p, n, r, rng: pp.homogeneous_mixed_counts(_pp_params(p), _pp_grid(p, n), r, rng),
        build=_pp_params,
    ),
}

POINT_PROCESS_MODELS = ("contagious-poisson", "mixed-poisson-twin", "homogeneous-mixed-poisson")


@dataclass(frozen=True)
class GeneratorSpec:
    model: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; known: {', '.join(sorted(MODELS))}")
        spec = MODELS[self.model]
        given = {spec.aliases.get(k, k): v for k, v in self.params.items()}
        unknown = set(given) - set(spec.params)
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.model}: {', '.join(sorted(unknown))}")
        resolved = {}
        for name, (conv, default) in spec.params.items():
            if name in given:
                raw = given[name]
                try:
                    if isinstance(raw, str) or conv in (int, float):
                        raw = conv(raw)
                    resolved[name] = raw
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"{self.model}: bad value for {name}: {exc}") from None
            elif default is REQUIRED:
                raise ValueError(f"{self.model}: missing required parameter {name}")
            else:
                resolved[name] = default
        object.__setattr__(self, "params", resolved)
        if spec.build is not None:
            spec.build(resolved)

    @property
    def kind(self) -> str:
        return MODELS[self.model].kind

    def sample_paths(self, length: int, reps: int, rng: RngStream) -> np.ndarray:
        if length < 0 or reps < 0:
            raise ValueError("length and reps must be non-negative")
        if length == 0:
            return np.zeros((reps, 0))
        return MODELS[self.model].paths(self.params, length, reps, rng)

    def sample(self, length: int, rng: RngStream) -> SequenceSample:
        vals = self.sample_paths(length, 1, rng)[0]
        kind = self.kind
        if kind == "integer":
            vals = vals.astype(np.int64)
        return SequenceSample(vals, self.model, kind)

    def describe(self) -> str:
        from .distributions import format_distribution

        parts = []
        for k, v in self.params.items():
            if v is None:
                continue
            if hasattr(v, "draw"):
                v = format_distribution(v)
            elif isinstance(v, tuple):
                v = ";".join(repr(x) for x in v)
            parts.append(f"{k}={v}")
        return self.model + (" " + ",".join(parts) if parts else "")


def parse_params(text: str) -> dict[str, str]:
    """``"alpha=1,beta=0.5"`` -> ``{"alpha": "1", "beta": "0.5"}``."""
    out = {}
    text = text.strip()
    if not text:
        return out
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"malformed parameter {item!r}; expected key=value")
        out[key.strip()] = val.strip()
    return out
