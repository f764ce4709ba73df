import math

import numpy as np
import pytest

from qpkr import (EnsembleSpec, MomentumDistribution, ObservableSeries,
                  ParameterError, SimParams, derive_seed, validate)
from qpkr.core import DEFAULT_OMEGA2, TWO_PI


def test_validate_experimental_parameters_clean():
    checked = validate(SimParams(K=5.34, hbar_eff=2.89, epsilon=0.36))
    assert checked.warnings == ()


def test_validate_rejects_epsilon_out_of_range():
    with pytest.raises(ParameterError):
        validate(SimParams(K=5.34, hbar_eff=2.89, epsilon=1.2))


@pytest.mark.parametrize("bad", [
    dict(K=-1.0, hbar_eff=2.89),
    dict(K=5.34, hbar_eff=0.0),
    dict(K=5.34, hbar_eff=2.89, grid_n=15),
    dict(K=5.34, hbar_eff=2.89, grid_n=8),
    dict(K=5.34, hbar_eff=2.89, n_kicks=-1),
    dict(K=5.34, hbar_eff=2.89, beta=1.5),
])
def test_validate_rejects_invariant_violations(bad):
    with pytest.raises(ParameterError):
        validate(SimParams(**bad))


def test_validate_warns_for_small_K():
    checked = validate(SimParams(K=3.0, hbar_eff=2.89, epsilon=0.2))
    assert any("K <= 4" in w for w in checked.warnings)


def test_validate_warns_for_commensurate_omega2():
    checked = validate(SimParams(K=5.34, hbar_eff=2.89, omega2=TWO_PI * 0.5))
    assert any("commensurability" in w for w in checked.warnings)


def test_validate_warns_for_commensurate_hbar():
    checked = validate(SimParams(K=5.34, hbar_eff=TWO_PI / 3))
    assert any("hbar_eff" in w for w in checked.warnings)


def test_validation_is_pure():
    params = SimParams(K=5.34, hbar_eff=2.89, epsilon=0.36)
    before = params
    validate(params)
    assert params == before


def test_default_omega2():
    assert DEFAULT_OMEGA2 == pytest.approx(2 * math.pi * math.sqrt(5))


def test_derive_seed_deterministic():
    assert derive_seed(12345, 7) == derive_seed(12345, 7)


def test_derive_seed_distinct():
    s = 987654321
    assert derive_seed(s, 0) != derive_seed(s, 1)


def test_derive_seed_no_collisions_brute_force():
    s = 0xDEADBEEF
    seeds = {derive_seed(s, k) for k in range(10_000)}
    assert len(seeds) == 10_000


def test_derive_seed_rejects_negative_index():
    with pytest.raises(ParameterError):
        derive_seed(1, -1)


def test_ensemble_draws_reproducible():
    params = SimParams(K=5.34, hbar_eff=2.89)
    spec = EnsembleSpec(n_realizations=4, master_seed=77)
    draws = [spec.draw(params, r) for r in range(4)]
    again = [spec.draw(params, r) for r in range(4)]
    assert draws == again
    assert len({d[0] for d in draws}) == 4


def test_ensemble_fixed_sampling_uses_params():
    params = SimParams(K=5.34, hbar_eff=2.89, beta=0.25, phi2=1.5)
    spec = EnsembleSpec(n_realizations=2, master_seed=1,
                        beta_sampling="fixed", phi2_sampling="fixed")
    assert spec.draw(params, 0) == (0.25, 1.5)
    assert spec.draw(params, 1) == (0.25, 1.5)


def test_ensemble_spec_validation():
    with pytest.raises(ParameterError):
        EnsembleSpec(n_realizations=0)
    with pytest.raises(ParameterError):
        EnsembleSpec(beta_sampling="gaussian")


def test_momentum_distribution_invariants():
    probs = np.zeros(32)
    probs[16] = 1.0
    dist = MomentumDistribution(probs=probs, time=0)
    assert dist.sites[0] == -16
    with pytest.raises(ParameterError):
        MomentumDistribution(probs=probs * 0.5, time=0)
    probs2 = probs.copy()
    probs2[0] = -0.1
    probs2[16] = 1.1
    with pytest.raises(ParameterError):
        MomentumDistribution(probs=probs2, time=0)


def test_observable_series_length_check():
    with pytest.raises(ParameterError):
        ObservableSeries(times=np.arange(3), p2_mean=np.zeros(3),
                         pi0=np.zeros(2), edge_mass=np.zeros(3))
