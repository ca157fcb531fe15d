"""Finite Markov-random-field machinery on small state spaces.

A field is a set of sites, a symmetric neighborhood, a clique list, and a
shared finite alphabet.  With quadratic clique potentials the Gibbs
distribution exp(-U/T)/Z coincides with a multivariate Gaussian density
restricted to the alphabet grid and renormalized; :func:`equivalence_report`
verifies that identity by exhaustive enumeration, which is the point of this
module.  Everything enumerates the full state space (capped), nothing samples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    InvalidState,
    NotPositiveDefinite,
    StateSpaceTooLarge,
)
from .gaussmodel import Dense, GaussianModel

__all__ = [
    "STATE_SPACE_LIMIT",
    "MRFSpec",
    "PotentialSpec",
    "FieldState",
    "energy",
    "enumerate_states",
    "partition_function",
    "gibbs_pmf",
    "gibbs_table",
    "quantized_gaussian_pmf_on_alphabet",
    "model_from_potentials",
    "equivalence_report",
    "spec_from_dict",
    "spec_to_dict",
]

#: Exhaustive enumeration refuses state spaces larger than this.
STATE_SPACE_LIMIT = 10 ** 7

_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class MRFSpec:
    """Sites, neighborhood, cliques, shared alphabet, and temperature."""

    sites: tuple
    neighbors: Mapping
    cliques: tuple
    alphabet: tuple
    temperature: float

    def __post_init__(self):
        sites = tuple(self.sites)
        if not sites:
            raise DomainError("at least one site required")
        if len(set(sites)) != len(sites):
            raise DomainError("site identifiers must be unique")
        site_set = set(sites)

        neigh = {s: frozenset(self.neighbors.get(s, ())) for s in sites}
        for s, ns in neigh.items():
            if s in ns:
                raise DomainError(f"site {s!r} listed as its own neighbor")
            for t in ns:
                if t not in site_set:
                    raise DomainError(f"unknown neighbor {t!r} of site {s!r}")
                if s not in neigh[t]:
                    raise DomainError(
                        f"neighborhood not symmetric: {s!r} -> {t!r}")

        cliques = tuple(tuple(c) for c in self.cliques)
        for c in cliques:
            if not c:
                raise DomainError("empty clique")
            if len(set(c)) != len(c):
                raise DomainError(f"repeated site in clique {c!r}")
            for s in c:
                if s not in site_set:
                    raise DomainError(f"clique site {s!r} not in sites")
            for s, t in itertools.combinations(c, 2):
                if t not in neigh[s]:
                    raise DomainError(
                        f"clique {c!r} is not a set of mutual neighbors")

        alphabet = tuple(float(v) for v in self.alphabet)
        if not alphabet:
            raise DomainError("alphabet must be nonempty")
        if any(not math.isfinite(v) for v in alphabet):
            raise DomainError("alphabet values must be finite")
        if any(b <= a for a, b in zip(alphabet, alphabet[1:])):
            raise DomainError("alphabet must be strictly increasing")
        if not (math.isfinite(self.temperature) and self.temperature > 0.0):
            raise DomainError(f"temperature must be > 0, got {self.temperature}")

        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "neighbors", neigh)
        object.__setattr__(self, "cliques", cliques)
        object.__setattr__(self, "alphabet", alphabet)

    @property
    def state_count(self) -> int:
        return len(self.alphabet) ** len(self.sites)

    def site_index(self, site) -> int:
        return self.sites.index(site)

    def check_enumerable(self) -> None:
        if self.state_count > STATE_SPACE_LIMIT:
            raise StateSpaceTooLarge(
                f"{self.state_count} states exceed the enumeration cap "
                f"{STATE_SPACE_LIMIT}")


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """Quadratic clique potentials: per-clique mean vector and SPD matrix."""

    means: tuple
    covariances: tuple

    def __post_init__(self):
        means = tuple(np.array(m, dtype=float, copy=True).reshape(-1)
                      for m in self.means)
        covs = []
        for c in self.covariances:
            c = np.array(c, dtype=float, copy=True)
            if c.ndim == 0:
                c = c.reshape(1, 1)
            covs.append(c)
        if len(means) != len(covs):
            raise DimensionMismatch(
                f"{len(means)} means vs {len(covs)} covariances")
        for m, c in zip(means, covs):
            k = m.size
            if c.shape != (k, k):
                raise DimensionMismatch(
                    f"covariance shape {c.shape} does not match mean length {k}")
            if not np.allclose(c, c.T, atol=1e-12 * max(np.abs(c).max(), 1.0)):
                raise NotPositiveDefinite("clique covariance not symmetric")
            eig = np.linalg.eigvalsh(c)
            if eig[0] <= 0.0:
                raise NotPositiveDefinite(
                    f"clique covariance not positive definite (min eig {eig[0]:.3e})")
        for m in means:
            m.setflags(write=False)
        for c in covs:
            c.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", tuple(covs))

    def validate_for(self, spec: MRFSpec) -> None:
        if len(self.means) != len(spec.cliques):
            raise DimensionMismatch(
                f"{len(self.means)} potentials for {len(spec.cliques)} cliques")
        for clique, m in zip(spec.cliques, self.means):
            if m.size != len(clique):
                raise DimensionMismatch(
                    f"potential dimension {m.size} does not match clique {clique!r}")


@dataclass(frozen=True)
class FieldState:
    """One joint assignment of alphabet values to every site."""

    assignment: Mapping

    def vector(self, spec: MRFSpec) -> np.ndarray:
        values = []
        for s in spec.sites:
            if s not in self.assignment:
                raise InvalidState(f"site {s!r} has no assigned value")
            v = float(self.assignment[s])
            if v not in spec.alphabet:
                raise InvalidState(
                    f"value {v} at site {s!r} is outside the alphabet")
            values.append(v)
        extra = set(self.assignment) - set(spec.sites)
        if extra:
            raise InvalidState(f"assignment mentions unknown sites {extra}")
        return np.array(values)


def _clique_indices(spec: MRFSpec) -> list:
    return [[spec.site_index(s) for s in c] for c in spec.cliques]


def _energies(spec: MRFSpec, pot: PotentialSpec,
              states: np.ndarray) -> np.ndarray:
    """Vectorized U over rows of a (m, n_sites) state matrix."""
    total = np.zeros(states.shape[0])
    for idx, mean, cov in zip(_clique_indices(spec), pot.means,
                              pot.covariances):
        d = states[:, idx] - mean
        total += 0.5 * spec.temperature * np.einsum(
            "ij,ij->i", d, np.linalg.solve(cov, d.T).T)
    return total


def energy(spec: MRFSpec, pot: PotentialSpec, f: FieldState) -> float:
    """Total energy U(f): sum of quadratic clique potentials.

    Each clique contributes (T/2) (f_w - mu_w)' Sigma_w^{-1} (f_w - mu_w);
    zero exactly when every clique realization sits at its mean.
    """
    pot.validate_for(spec)
    vec = f.vector(spec)
    return float(_energies(spec, pot, vec[None, :])[0])


def enumerate_states(spec: MRFSpec):
    """All joint states as value tuples in site order, lexicographically."""
    spec.check_enumerable()
    return itertools.product(spec.alphabet, repeat=len(spec.sites))


def _state_chunks(spec: MRFSpec):
    it = enumerate_states(spec)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block)


def partition_function(spec: MRFSpec, pot: PotentialSpec) -> float:
    """Z = sum over all states of exp(-U/T), by exhaustive enumeration."""
    pot.validate_for(spec)
    z = 0.0
    for states in _state_chunks(spec):
        z += float(np.exp(-_energies(spec, pot, states) / spec.temperature).sum())
    return z


def gibbs_pmf(spec: MRFSpec, pot: PotentialSpec, f: FieldState) -> float:
    """P(f) = exp(-U(f)/T) / Z."""
    u = energy(spec, pot, f)
    return math.exp(-u / spec.temperature) / partition_function(spec, pot)


def gibbs_table(spec: MRFSpec, pot: PotentialSpec,
                energy_fn: Callable[[np.ndarray], np.ndarray] | None = None
                ) -> np.ndarray:
    """Probabilities of every state in enumeration order.

    ``energy_fn`` substitutes an arbitrary energy (rows -> energies) for the
    quadratic default — useful for demonstrating that the Gaussian
    equivalence genuinely requires quadratic potentials.
    """
    if energy_fn is None:
        pot.validate_for(spec)
        energy_fn = lambda rows: _energies(spec, pot, rows)
    spec.check_enumerable()
    weights = []
    for states in _state_chunks(spec):
        weights.append(np.exp(-np.asarray(energy_fn(states)) / spec.temperature))
    w = np.concatenate(weights)
    return w / w.sum()


def quantized_gaussian_pmf_on_alphabet(model: GaussianModel,
                                       spec: MRFSpec) -> np.ndarray:
    """N(mean, Sigma) density at each joint state, renormalized to sum to 1.

    State coordinates follow spec.sites order, which must match the model's
    coordinate order.
    """
    if model.dim != len(spec.sites):
        raise DimensionMismatch(
            f"model dim {model.dim} vs {len(spec.sites)} sites")
    spec.check_enumerable()
    exponents = []
    for states in _state_chunks(spec):
        d = states - model.mean
        exponents.append(-0.5 * np.einsum("ij,ij->i", d,
                                          model.covariance.solve(d)))
    e = np.concatenate(exponents)
    e -= e.max()  # renormalization absorbs any constant shift
    w = np.exp(e)
    return w / w.sum()


def model_from_potentials(spec: MRFSpec, pot: PotentialSpec) -> GaussianModel:
    """Assemble the joint Gaussian whose blocks are the clique potentials.

    Requires the cliques to be disjoint and to cover every site, so the
    joint covariance is block-diagonal in site order.
    """
    pot.validate_for(spec)
    _require_disjoint(spec, cover=True)
    n = len(spec.sites)
    mean = np.zeros(n)
    cov = np.zeros((n, n))
    for idx, m, c in zip(_clique_indices(spec), pot.means, pot.covariances):
        mean[idx] = m
        cov[np.ix_(idx, idx)] = c
    return GaussianModel(n, mean, Dense(cov))


def _require_disjoint(spec: MRFSpec, cover: bool = False) -> None:
    seen = set()
    for c in spec.cliques:
        for s in c:
            if s in seen:
                raise DomainError(
                    f"site {s!r} appears in more than one clique; "
                    "disjoint cliques required")
            seen.add(s)
    if cover and seen != set(spec.sites):
        raise DomainError("cliques must cover every site")


def equivalence_report(spec: MRFSpec, pot: PotentialSpec,
                       model: GaussianModel, tolerance: float = 1e-12,
                       energy_fn: Callable[[np.ndarray], np.ndarray] | None = None
                       ) -> float:
    """Max-abs difference between the Gibbs pmf and the renormalized
    Gaussian pmf over the full state space.

    A value at or below ``tolerance`` certifies the equivalence for this
    instance; larger values are returned, not raised.
    """
    _require_disjoint(spec)
    if tolerance < 0.0:
        raise DomainError(f"tolerance must be >= 0, got {tolerance}")
    g = gibbs_table(spec, pot, energy_fn=energy_fn)
    q = quantized_gaussian_pmf_on_alphabet(model, spec)
    return float(np.abs(g - q).max())


def spec_to_dict(spec: MRFSpec, pot: PotentialSpec) -> dict:
    """JSON-ready dictionary for an MRF spec plus potentials."""
    return {
        "sites": list(spec.sites),
        "neighbors": {s: sorted(ns) for s, ns in spec.neighbors.items()},
        "cliques": [list(c) for c in spec.cliques],
        "alphabet": list(spec.alphabet),
        "temperature": spec.temperature,
        "potentials": [
            {"mean": m.tolist(), "covariance": c.tolist()}
            for m, c in zip(pot.means, pot.covariances)
        ],
    }


def spec_from_dict(data: Mapping) -> tuple[MRFSpec, PotentialSpec]:
    """Inverse of :func:`spec_to_dict`; raises DomainError on missing keys."""
    try:
        spec = MRFSpec(
            sites=tuple(data["sites"]),
            neighbors={s: frozenset(ns)
                       for s, ns in dict(data.get("neighbors", {})).items()},
            cliques=tuple(tuple(c) for c in data["cliques"]),
            alphabet=tuple(data["alphabet"]),
            temperature=float(data["temperature"]),
        )
        pots = data["potentials"]
        pot = PotentialSpec(
            means=tuple(p["mean"] for p in pots),
            covariances=tuple(p["covariance"] for p in pots),
        )
    except KeyError as exc:
        raise DomainError(f"MRF spec is missing required key {exc}") from exc
    pot.validate_for(spec)
    return spec, pot
