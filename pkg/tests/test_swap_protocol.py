#!/usr/bin/env python3
"""
Tests for entanglement swapping and certification
"""

import numpy as np
import pytest

from oemswap.core.gaussian import (
    CovMatrix,
    apply_local_symplectics,
    log_negativity,
    two_mode_squeezed,
)
from oemswap.core.swap_protocol import (
    SiteState,
    align_pair,
    assemble_two_site,
    bell_measure,
    evaluate,
    purity_shortcut,
    site_entanglement,
    site_purities,
)
from oemswap.utils.error_handler import ValidationError

SITE = ("w1", "b1", "c1")


def two_mode_squeezer(r):
    """Symplectic matrix of a two-mode squeezer, interleaved quadratures."""
    z = np.diag([1.0, -1.0])
    return np.block([[np.cosh(r) * np.eye(2), np.sinh(r) * z], [np.sinh(r) * z, np.cosh(r) * np.eye(2)]])


def squeezed_chain(r_wb, r_bc):
    """Pure site: squeeze (w, b), then squeeze (b, c)."""
    s_wb = np.eye(6)
    s_wb[0:4, 0:4] = two_mode_squeezer(r_wb)
    s_bc = np.eye(6)
    s_bc[2:6, 2:6] = two_mode_squeezer(r_bc)
    s = s_bc @ s_wb
    return SiteState(CovMatrix(SITE, 0.5 * s @ s.T))


def tmsv_site(r):
    """(w, b) two-mode squeezed, c in vacuum."""
    return SiteState(two_mode_squeezed(r, ("w1", "b1")).direct_sum(CovMatrix.vacuum(["c1"])))


def rotation(theta):
    return np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])


def test_site_state_labels():
    """Sites must be over (w1, b1, c1) in that order and physical."""
    with pytest.raises(ValidationError):
        SiteState(CovMatrix.vacuum(["b1", "w1", "c1"]))
    with pytest.raises(ValidationError):
        SiteState(CovMatrix(SITE, 0.3 * np.eye(6)))


def test_two_site_assembly():
    """Two copies sit side by side without correlations."""
    state = assemble_two_site(tmsv_site(0.4))
    assert [str(m) for m in state.cm.modes] == ["w1", "b1", "c1", "w2", "b2", "c2"]
    assert np.allclose(state.cm.data[0:6, 6:12], 0.0)
    assert np.array_equal(state.cm.data[0:6, 0:6], state.cm.data[6:12, 6:12])


def test_bell_measurement_output():
    """The conditional state covers (w1, w2, c1, c2) and is physical."""
    conditioned = bell_measure(assemble_two_site(squeezed_chain(0.8, 0.3)))
    assert [str(m) for m in conditioned.modes] == ["w1", "w2", "c1", "c2"]
    assert conditioned.is_physical()


def test_swap_of_two_mode_squeezed_pairs():
    """Swapping two TMSV pairs leaves E_N = ln cosh 2r between the microwaves."""
    r = 0.5
    result = evaluate(tmsv_site(r))
    assert result.en_ww == pytest.approx(np.log(np.cosh(2 * r)), rel=1e-10)
    assert result.eta_ww_measured == pytest.approx(result.eta_ww_shortcut, abs=1e-10)
    assert result.eta_ww_raw == pytest.approx(result.eta_ww_measured, abs=1e-10)
    assert result.en_cc == pytest.approx(0.0, abs=1e-12)
    assert not result.certified


def test_shortcut_matches_aligned_measurement():
    """Once each pair is aligned, the purity shortcut is the measured value."""
    site = squeezed_chain(0.9, 0.35)
    eta_ww, eta_cc = purity_shortcut(site)
    result = evaluate(site)
    assert result.eta_ww_measured == pytest.approx(eta_ww, abs=1e-9)
    assert result.eta_cc_measured == pytest.approx(eta_cc, abs=1e-9)
    assert result.shortcut_discrepancy < 1e-9


def test_local_operations_do_not_change_swapped_entanglement(rng):
    """Aligned route is invariant under local symplectics on a site."""
    site = squeezed_chain(0.7, 0.25)
    locals_by_mode = {}
    for mode in SITE:
        squeeze = np.diag([np.exp(rng.uniform(-0.5, 0.5)), 1.0])
        squeeze[1, 1] = 1.0 / squeeze[0, 0]
        locals_by_mode[mode] = rotation(rng.uniform(0, np.pi)) @ squeeze
    scrambled = SiteState(apply_local_symplectics(site.cm, locals_by_mode))

    before, after = evaluate(site), evaluate(scrambled)
    assert after.en_ww == pytest.approx(before.en_ww, abs=1e-9)
    assert after.en_cc == pytest.approx(before.en_cc, abs=1e-9)
    assert after.mu_wb == pytest.approx(before.mu_wb, rel=1e-9)
    assert after.eta_ww_measured == pytest.approx(after.eta_ww_shortcut, abs=1e-9)


def test_certified_chain():
    """mu_wb > mu_bc > mu_b: the swap is certified with EN_ww > EN_cc > 0."""
    site = squeezed_chain(1.0, 0.3)
    mu = site_purities(site)
    assert mu["mu_wb"] > mu["mu_bc"] > mu["mu_b"]

    result = evaluate(site)
    assert result.certifying_state
    assert result.certified
    assert result.en_ww > result.en_cc > 0


def test_certification_fails_when_certifier_is_stronger():
    """Stronger b-c entanglement breaks the ordering and the verdict."""
    result = evaluate(squeezed_chain(0.3, 1.0))
    assert not result.certifying_state
    assert not result.certified
    assert result.en_cc >= result.en_ww


def test_align_pair():
    """Alignment keeps purities and entanglement of the site."""
    site = squeezed_chain(0.6, 0.4)
    scrambled = SiteState(apply_local_symplectics(site.cm, {"b1": rotation(0.9)}))
    aligned = align_pair(scrambled, ("w", "b"))
    assert site_purities(aligned)["mu_wb"] == pytest.approx(site_purities(site)["mu_wb"], rel=1e-10)
    pair = aligned.pair("w", "b")
    assert log_negativity(pair, (["w1"], ["b1"])) == pytest.approx(
        log_negativity(site.pair("w", "b"), (["w1"], ["b1"])), rel=1e-9
    )
    with pytest.raises(ValidationError):
        align_pair(site, ("w", "c"))


def test_site_entanglement():
    """Pair negativities inside a site."""
    pairs = site_entanglement(tmsv_site(0.45))
    assert pairs["wb"] == pytest.approx(0.9, rel=1e-10)
    assert pairs["bc"] == pytest.approx(0.0, abs=1e-12)
    assert pairs["wc"] == pytest.approx(0.0, abs=1e-12)


def test_result_serialization():
    """SwapResult flattens to plain values."""
    payload = evaluate(squeezed_chain(0.5, 0.2)).to_dict()
    assert isinstance(payload["certified"], bool)
    assert set(payload) >= {"en_ww", "en_cc", "mu_b", "mu_wb", "mu_bc", "eta_ww_raw"}


def test_routes_agree_on_random_sites(random_cm):
    """Aligned measurement and purity shortcut give the same eta on random sites."""
    for _ in range(100):
        result = evaluate(SiteState(random_cm(SITE)))
        assert abs(result.eta_ww_measured - result.eta_ww_shortcut) <= 1e-8
        assert abs(result.eta_cc_measured - result.eta_cc_shortcut) <= 1e-8


def test_certification_follows_purity_ordering(random_cm):
    """Certified exactly when mu_wb > mu_bc > mu_b, away from ties."""
    outcomes = set()
    for _ in range(1000):
        site = SiteState(random_cm(SITE, max_nu=1.2))
        mu = site_purities(site)
        gaps = (np.log(mu["mu_wb"] / mu["mu_bc"]), np.log(mu["mu_bc"] / mu["mu_b"]))
        if min(abs(g) for g in gaps) < 1e-8:
            continue
        result = evaluate(site)
        assert result.certified == result.certifying_state
        outcomes.add(result.certified)
    assert outcomes == {True, False}
