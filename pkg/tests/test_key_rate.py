from dataclasses import replace

import pytest

from pdc_decoy.channel import forecast_observables
from pdc_decoy.core_model import GYS, IntensitySet, binary_entropy, transmittance
from pdc_decoy.decoy import DecoyEstimates, InvalidIntensityError, mu_from_coupling
from pdc_decoy.key_rate import (
    SchemeSpec,
    evaluate_scheme,
    rate_both,
    rate_ideal,
    rate_triggered,
)

NEW_LIMIT = SchemeSpec.coupled("new_both", "limit")
NEW_STRICT = SchemeSpec.coupled("new_both", "strict")
PREV_113 = SchemeSpec.fixed("previous_fixed_mu", 0.113)

# frozen from a 50-digit mpmath evaluation of the same formulas
LIMIT_RATES = {
    25.0: (1.4648612382433609e-4, 3.8397915327200875e-4),
    50.0: (4.3151468099279309e-5, 1.1276637365331657e-4),
    100.0: (3.4775763850545436e-6, 8.2744848104148681e-6),
}
STRICT_RATES = {
    25.0: (1.586585962342016e-4, 4.0832409809173975e-4),
    50.0: (4.6822997017559131e-5, 1.2010943148987621e-4),
    100.0: (3.8060028727327573e-6, 8.9313377857712957e-6),
}


@pytest.mark.parametrize("L", sorted(LIMIT_RATES))
def test_limit_rates_fixture(L):
    res = evaluate_scheme(NEW_LIMIT, GYS, L, 0.255)
    assert (res.R_t, res.R_both) == pytest.approx(LIMIT_RATES[L], rel=1e-9)
    assert res.R_final == res.R_both


@pytest.mark.parametrize("L", sorted(STRICT_RATES))
def test_strict_rates_fixture(L):
    res = evaluate_scheme(NEW_STRICT, GYS, L, 0.255)
    assert (res.R_t, res.R_both) == pytest.approx(STRICT_RATES[L], rel=1e-9)


def test_previous_and_ideal_fixture():
    prev = evaluate_scheme(PREV_113, GYS, 50.0, 0.143)
    assert prev.R_t == pytest.approx(2.9549863008537813e-5, rel=1e-9)
    assert prev.R_both is None and prev.R_final == prev.R_t
    assert prev.estimates.Y1_lower == pytest.approx(0.0036366963609783519, rel=1e-9)

    ideal = evaluate_scheme(SchemeSpec("ideal"), GYS, 50.0, 0.255)
    assert ideal.R_t == pytest.approx(4.8899268952112632e-5, rel=1e-9)
    assert ideal.R_both == pytest.approx(1.2426197535898321e-4, rel=1e-9)
    assert rate_ideal(GYS, 50.0, 0.255) == ideal.R_final


def test_fifty_km_ratio_near_reported_value():
    new = evaluate_scheme(NEW_LIMIT, GYS, 50.0, 0.255).R_final
    prev = evaluate_scheme(PREV_113, GYS, 50.0, 0.143).R_final
    assert new / prev == pytest.approx(3.8, rel=0.15)


def test_vacuous_single_photon_error_gives_negative_rate(eta50):
    intensities = IntensitySet(0.113, 0.255)
    obs = forecast_observables(GYS, 50.0, intensities)
    est = DecoyEstimates(Y0=GYS.d_B, Y1_lower=0.004, Q1_t=1e-4, Q1_ut=1e-4, e1_upper=0.5, a_used=0.5, policy="limit")
    r_t = rate_triggered(obs, est, GYS, 0.255)
    expected = 0.5 * (GYS.d_B * GYS.d_A / 1.255 - obs.signal.Q_t * GYS.f_ec * binary_entropy(obs.signal.E_t))
    assert r_t == pytest.approx(expected, rel=1e-12)
    assert r_t < 0
    assert rate_both(obs, est, GYS, 0.255) < 0


def test_noiseless_toy_case():
    p = replace(GYS, d_B=0.0, e_d=0.0)
    eta = transmittance(p.alpha, 50.0, p.eta_B)
    res = evaluate_scheme(SchemeSpec("ideal"), p, 50.0, 0.255)
    # no errors, no vacuum clicks: only the single-photon term survives
    assert res.R_t == pytest.approx(0.5 * p.eta_A * eta * 0.255 / 1.255**2, rel=1e-12)
    assert res.R_both == pytest.approx(0.5 * eta * 0.255 / 1.255**2, rel=1e-12)


def test_nearly_perfect_trigger_leaves_nothing_to_gain():
    p = replace(GYS, eta_A=0.999999)
    for spec in (SchemeSpec("ideal"), NEW_LIMIT):
        res = evaluate_scheme(spec, p, 50.0, 0.255)
        assert res.R_both < res.R_t
        assert not res.nontriggered_active
        assert res.R_final == res.R_t


def test_error_correction_factor_only_scales_leakage():
    base = evaluate_scheme(NEW_LIMIT, GYS, 50.0, 0.255)
    perfect = evaluate_scheme(NEW_LIMIT, replace(GYS, f_ec=1.0), 50.0, 0.255)
    sig = base.observables.signal
    leak_t = 0.5 * 0.22 * sig.Q_t * binary_entropy(sig.E_t)
    leak_ut = 0.5 * 0.22 * sig.Q_ut * binary_entropy(sig.E_ut)
    assert perfect.R_t - base.R_t == pytest.approx(leak_t, rel=1e-9)
    assert perfect.R_both - base.R_both == pytest.approx(leak_t + leak_ut, rel=1e-9)
    assert perfect.estimates == base.estimates


def test_nontriggered_events_help_short_but_not_long_distance():
    short = evaluate_scheme(NEW_LIMIT, GYS, 20.0, 0.25)
    assert short.nontriggered_active
    far = evaluate_scheme(NEW_LIMIT, GYS, 150.0, 0.15)
    assert far.R_both < far.R_t
    assert not far.nontriggered_active


def test_ideal_positive_at_zero_distance():
    assert rate_ideal(GYS, 0.0, 0.3) > 0


def test_triggered_scheme_below_combined_scheme():
    trig = evaluate_scheme(SchemeSpec.coupled("new_triggered", "limit"), GYS, 50.0, 0.255)
    both = evaluate_scheme(NEW_LIMIT, GYS, 50.0, 0.255)
    assert trig.R_both is None
    assert trig.R_final == both.R_t < both.R_final


def test_coupled_mu_is_used():
    res = evaluate_scheme(NEW_LIMIT, GYS, 50.0, 0.255)
    assert res.intensities.mu == mu_from_coupling(0.255, 0.5, "limit")
    assert evaluate_scheme(SchemeSpec("new_both"), GYS, 50.0, 0.255).estimates.policy == "strict"


def test_fixed_decoy_above_signal_rejected():
    with pytest.raises(InvalidIntensityError):
        evaluate_scheme(SchemeSpec.fixed("previous_fixed_mu", 0.2), GYS, 50.0, 0.15)
    with pytest.raises(InvalidIntensityError):
        evaluate_scheme(SchemeSpec.fixed("new_both", 0.2), GYS, 50.0, 0.2)


def test_vacuum_term_variants_agree_closely():
    a = evaluate_scheme(NEW_LIMIT, GYS, 50.0, 0.255, vacuum_term="signal")
    b = evaluate_scheme(NEW_LIMIT, GYS, 50.0, 0.255, vacuum_term="observable")
    assert b.R_both == pytest.approx(a.R_both, rel=0.05)
    with pytest.raises(ValueError):
        evaluate_scheme(NEW_LIMIT, GYS, 50.0, 0.255, vacuum_term="both")


def test_reported_clamps_negative_rates():
    res = evaluate_scheme(NEW_LIMIT, GYS, 200.0, 0.3)
    assert res.R_final < 0
    assert res.reported()["R_final"] == 0.0


def test_scheme_spec_validation_and_defaults():
    prev = SchemeSpec("previous_fixed_mu")
    assert prev.mu_policy == "fixed" and prev.mu_value == 0.1
    assert SchemeSpec.fixed("new_both", 0.05, label="nb").name == "nb"
    assert SchemeSpec("new_both").effective_a_policy == "strict"
    assert SchemeSpec("new_both").with_a_policy("limit").a_policy == "limit"
    assert SchemeSpec.fixed("new_both", 0.05).to_dict() == {"kind": "new_both", "mu_policy": {"fixed": 0.05}}
    for bad in (
        dict(kind="bogus"),
        dict(kind="new_both", mu_policy="adaptive"),
        dict(kind="new_both", a_policy="loose"),
        dict(kind="new_both", mu_policy="fixed", mu_value=-0.1),
    ):
        with pytest.raises(ValueError):
            SchemeSpec(**bad)
