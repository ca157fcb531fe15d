import itertools
import math

import numpy as np
import pytest

from stegcap import (
    DimensionMismatch,
    DomainError,
    InvalidState,
    NotPositiveDefinite,
    StateSpaceTooLarge,
)
from stegcap.gaussmodel import Dense, GaussianModel
from stegcap.gibbs import (
    FieldState,
    MRFSpec,
    PotentialSpec,
    energy,
    enumerate_states,
    equivalence_report,
    gibbs_pmf,
    gibbs_table,
    model_from_potentials,
    partition_function,
    quantized_gaussian_pmf_on_alphabet,
    spec_from_dict,
    spec_to_dict,
)


def single_site(alphabet=(-1.0, 0.0, 1.0), temperature=1.0, sigma2=1.0):
    spec = MRFSpec(sites=("s",), neighbors={}, cliques=(("s",),),
                   alphabet=alphabet, temperature=temperature)
    pot = PotentialSpec(means=([0.0],), covariances=([[sigma2]],))
    return spec, pot


def two_site_clique(rho=0.5, temperature=1.0):
    spec = MRFSpec(sites=("a", "b"), neighbors={"a": {"b"}, "b": {"a"}},
                   cliques=(("a", "b"),), alphabet=(-1.0, 0.0, 1.0),
                   temperature=temperature)
    pot = PotentialSpec(means=([0.0, 0.0],),
                        covariances=([[1.0, rho], [rho, 1.0]],))
    return spec, pot


def random_disjoint_mrf(rng):
    """Random sites partitioned into disjoint cliques of size 1-3."""
    n = int(rng.integers(2, 6))
    sites = tuple(f"x{i}" for i in range(n))
    order = list(rng.permutation(n))
    cliques = []
    while order:
        k = int(min(len(order), rng.integers(1, 4)))
        cliques.append(tuple(sites[i] for i in order[:k]))
        order = order[k:]
    neighbors = {s: set() for s in sites}
    for c in cliques:
        for s, t in itertools.permutations(c, 2):
            neighbors[s].add(t)
    alphabet = tuple(np.sort(rng.uniform(-2, 2, size=int(rng.integers(2, 4)))))
    means, covs = [], []
    for c in cliques:
        k = len(c)
        q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        covs.append((q * rng.uniform(0.3, 2.0, size=k)) @ q.T)
        means.append(rng.uniform(-1, 1, size=k))
    spec = MRFSpec(sites=sites, neighbors=neighbors, cliques=tuple(cliques),
                   alphabet=alphabet,
                   temperature=float(rng.uniform(0.5, 3.0)))
    pot = PotentialSpec(means=tuple(means), covariances=tuple(covs))
    return spec, pot


# ------------------------------------------------------------------- energy

def test_energy_zero_at_clique_means():
    spec, pot = two_site_clique()
    assert energy(spec, pot, FieldState({"a": 0.0, "b": 0.0})) == 0.0


def test_energy_single_site_quadratic():
    spec, pot = single_site()
    for v in (-1.0, 0.0, 1.0):
        assert math.isclose(energy(spec, pot, FieldState({"s": v})),
                            v * v / 2.0, rel_tol=1e-12, abs_tol=1e-15)


def test_energy_two_site_identity_cov_temperature_two():
    spec = MRFSpec(sites=("a", "b"), neighbors={"a": {"b"}, "b": {"a"}},
                   cliques=(("a", "b"),), alphabet=(0.0, 1.0), temperature=2.0)
    pot = PotentialSpec(means=([0.0, 0.0],), covariances=(np.eye(2),))
    # (T/2) * ||(1,1)||^2 = 2
    assert math.isclose(energy(spec, pot, FieldState({"a": 1.0, "b": 1.0})),
                        2.0, rel_tol=1e-12)


def test_energy_invalid_states():
    spec, pot = single_site()
    with pytest.raises(InvalidState):
        energy(spec, pot, FieldState({}))
    with pytest.raises(InvalidState):
        energy(spec, pot, FieldState({"s": 0.25}))
    with pytest.raises(InvalidState):
        energy(spec, pot, FieldState({"s": 0.0, "ghost": 1.0}))


# -------------------------------------------------------- partition function

def test_partition_function_hand_value():
    spec, pot = single_site()
    assert math.isclose(partition_function(spec, pot), 2.2130613194252668,
                        rel_tol=1e-12)


def test_partition_function_single_state():
    spec = MRFSpec(sites=("s",), neighbors={}, cliques=(("s",),),
                   alphabet=(0.5,), temperature=1.0)
    pot = PotentialSpec(means=([0.0],), covariances=([[1.0]],))
    # single term: exp(-U/T) with U = 0.5^2/2
    assert math.isclose(partition_function(spec, pot),
                        math.exp(-0.125), rel_tol=1e-12)


def test_partition_function_factorizes_over_independent_sites():
    spec = MRFSpec(sites=("a", "b"), neighbors={}, cliques=(("a",), ("b",)),
                   alphabet=(-1.0, 0.0, 1.0), temperature=1.0)
    pot = PotentialSpec(means=([0.0], [0.0]),
                        covariances=([[1.0]], [[2.0]]))
    za = 1.0 + 2.0 * math.exp(-0.5)
    zb = 1.0 + 2.0 * math.exp(-0.25)
    assert math.isclose(partition_function(spec, pot), za * zb, rel_tol=1e-12)


def test_partition_function_independent_of_temperature():
    # T appears in both the potential and the Gibbs exponent; it cancels.
    for t in (0.5, 1.0, 4.0):
        spec, pot = single_site(temperature=t)
        assert math.isclose(partition_function(spec, pot),
                            2.2130613194252668, rel_tol=1e-12)


def test_state_space_cap():
    spec = MRFSpec(sites=tuple(range(30)), neighbors={},
                   cliques=tuple((s,) for s in range(30)),
                   alphabet=(0.0, 1.0), temperature=1.0)
    pot = PotentialSpec(means=tuple([0.0] for _ in range(30)),
                        covariances=tuple([[1.0]] for _ in range(30)))
    assert spec.state_count == 2 ** 30
    with pytest.raises(StateSpaceTooLarge):
        partition_function(spec, pot)


# ---------------------------------------------------------------- gibbs pmf

def test_gibbs_pmf_hand_value_and_symmetry():
    spec, pot = single_site()
    p0 = gibbs_pmf(spec, pot, FieldState({"s": 0.0}))
    p_plus = gibbs_pmf(spec, pot, FieldState({"s": 1.0}))
    p_minus = gibbs_pmf(spec, pot, FieldState({"s": -1.0}))
    assert math.isclose(p0, 0.45186276187760604, rel_tol=1e-12)
    assert math.isclose(p_plus, p_minus, rel_tol=1e-12)
    assert p0 > p_plus  # lower energy, higher probability


def test_gibbs_table_sums_to_one():
    rng = np.random.default_rng(0)
    for _ in range(5):
        spec, pot = random_disjoint_mrf(rng)
        table = gibbs_table(spec, pot)
        assert abs(table.sum() - 1.0) <= 1e-12
        assert table.shape == (spec.state_count,)
        assert np.all(table > 0.0)


def test_gibbs_energy_shift_invariance():
    spec, pot = two_site_clique(rho=0.3)
    base = gibbs_table(spec, pot)
    sites = len(spec.sites)

    def shifted(rows):
        d = rows - pot.means[0]
        inv = np.linalg.inv(np.asarray(pot.covariances[0]))
        u = 0.5 * spec.temperature * np.einsum("ij,jk,ik->i", d, inv, d)
        return u + 7.5  # constant offset must cancel in the pmf

    table = gibbs_table(spec, pot, energy_fn=shifted)
    np.testing.assert_allclose(table, base, atol=1e-12)


def test_chain_markov_property():
    # pairwise cliques on a 4-chain: P(x1 | rest) must not depend on x3
    sites = ("s0", "s1", "s2", "s3")
    neighbors = {"s0": {"s1"}, "s1": {"s0", "s2"}, "s2": {"s1", "s3"},
                 "s3": {"s2"}}
    cliques = (("s0", "s1"), ("s1", "s2"), ("s2", "s3"))
    spec = MRFSpec(sites=sites, neighbors=neighbors, cliques=cliques,
                   alphabet=(-1.0, 1.0), temperature=1.0)
    cov = [[1.0, 0.4], [0.4, 1.0]]
    pot = PotentialSpec(means=([0.0, 0.0],) * 3, covariances=(cov,) * 3)
    k = 2
    table = gibbs_table(spec, pot).reshape((k,) * 4)
    cond = table / table.sum(axis=1, keepdims=True)  # P(x1 | x0, x2, x3)
    for i0, i2 in itertools.product(range(k), repeat=2):
        col = cond[i0, :, i2, :]
        np.testing.assert_allclose(col[:, 0], col[:, 1], atol=1e-12)


# ------------------------------------------------------- Gaussian equivalence

def test_single_site_tables_identical():
    spec, pot = single_site()
    model = GaussianModel(1, [0.0], Dense([[1.0]]))
    g = gibbs_table(spec, pot)
    q = quantized_gaussian_pmf_on_alphabet(model, spec)
    np.testing.assert_allclose(g, q, atol=1e-15)


def test_two_site_correlated_equivalence():
    spec, pot = two_site_clique(rho=0.6)
    model = model_from_potentials(spec, pot)
    assert equivalence_report(spec, pot, model) <= 1e-12


def test_zero_correlation_product_form():
    spec, pot = two_site_clique(rho=0.0)
    model = model_from_potentials(spec, pot)
    table = quantized_gaussian_pmf_on_alphabet(model, spec).reshape(3, 3)
    marg_a = table.sum(axis=1)
    marg_b = table.sum(axis=0)
    np.testing.assert_allclose(table, np.outer(marg_a, marg_b), atol=1e-12)


def test_equivalence_randomized_disjoint_cliques():
    rng = np.random.default_rng(2024)
    for _ in range(12):
        spec, pot = random_disjoint_mrf(rng)
        model = model_from_potentials(spec, pot)
        assert equivalence_report(spec, pot, model) <= 1e-12


def test_equivalence_fails_for_non_quadratic_potential():
    spec, pot = two_site_clique(rho=0.5)
    model = model_from_potentials(spec, pot)

    def absolute_deviation(rows):
        return spec.temperature * np.abs(rows - pot.means[0]).sum(axis=1)

    diff = equivalence_report(spec, pot, model, energy_fn=absolute_deviation)
    assert diff > 1e-3  # reported, not raised


def test_equivalence_rejects_overlapping_cliques():
    sites = ("a", "b", "c")
    neighbors = {"a": {"b"}, "b": {"a", "c"}, "c": {"b"}}
    spec = MRFSpec(sites=sites, neighbors=neighbors,
                   cliques=(("a", "b"), ("b", "c")), alphabet=(0.0, 1.0),
                   temperature=1.0)
    cov = [[1.0, 0.2], [0.2, 1.0]]
    pot = PotentialSpec(means=([0.0, 0.0],) * 2, covariances=(cov,) * 2)
    model = GaussianModel.iid(3)
    with pytest.raises(DomainError):
        equivalence_report(spec, pot, model)
    with pytest.raises(DomainError):
        model_from_potentials(spec, pot)


def test_gaussian_table_dimension_checked():
    spec, _ = two_site_clique()
    with pytest.raises(DimensionMismatch):
        quantized_gaussian_pmf_on_alphabet(GaussianModel.iid(3), spec)


# ----------------------------------------------------------------- validation

def test_spec_validation_errors():
    with pytest.raises(DomainError):
        MRFSpec(sites=(), neighbors={}, cliques=(), alphabet=(0.0,),
                temperature=1.0)
    with pytest.raises(DomainError):  # self-neighbor
        MRFSpec(sites=("a",), neighbors={"a": {"a"}}, cliques=(),
                alphabet=(0.0,), temperature=1.0)
    with pytest.raises(DomainError):  # asymmetric neighborhood
        MRFSpec(sites=("a", "b"), neighbors={"a": {"b"}, "b": set()},
                cliques=(), alphabet=(0.0,), temperature=1.0)
    with pytest.raises(DomainError):  # clique members not neighbors
        MRFSpec(sites=("a", "b"), neighbors={}, cliques=(("a", "b"),),
                alphabet=(0.0,), temperature=1.0)
    with pytest.raises(DomainError):  # unordered alphabet
        MRFSpec(sites=("a",), neighbors={}, cliques=(), alphabet=(1.0, 0.0),
                temperature=1.0)
    with pytest.raises(DomainError):  # bad temperature
        MRFSpec(sites=("a",), neighbors={}, cliques=(), alphabet=(0.0,),
                temperature=0.0)


def test_potential_validation_errors():
    with pytest.raises(DimensionMismatch):
        PotentialSpec(means=([0.0],), covariances=())
    with pytest.raises(DimensionMismatch):
        PotentialSpec(means=([0.0, 0.0],), covariances=([[1.0]],))
    with pytest.raises(NotPositiveDefinite):
        PotentialSpec(means=([0.0, 0.0],),
                      covariances=([[1.0, 2.0], [2.0, 1.0]],))
    spec, _ = single_site()
    pot = PotentialSpec(means=([0.0, 0.0],), covariances=(np.eye(2),))
    with pytest.raises(DimensionMismatch):
        pot.validate_for(spec)


def test_enumerate_states_order_and_count():
    spec, _ = two_site_clique()
    states = list(enumerate_states(spec))
    assert len(states) == 9
    assert states[0] == (-1.0, -1.0)
    assert states[1] == (-1.0, 0.0)  # last site varies fastest
    assert states[-1] == (1.0, 1.0)


def test_spec_dict_round_trip():
    spec, pot = two_site_clique(rho=0.25, temperature=1.5)
    data = spec_to_dict(spec, pot)
    spec2, pot2 = spec_from_dict(data)
    assert spec2.sites == spec.sites
    assert spec2.alphabet == spec.alphabet
    assert spec2.temperature == spec.temperature
    np.testing.assert_array_equal(pot2.means[0], pot.means[0])
    np.testing.assert_array_equal(pot2.covariances[0], pot.covariances[0])
    assert math.isclose(partition_function(spec2, pot2),
                        partition_function(spec, pot), rel_tol=1e-12)


def test_spec_from_dict_missing_key():
    with pytest.raises(DomainError):
        spec_from_dict({"sites": ["a"]})
