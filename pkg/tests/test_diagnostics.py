import numpy as np
import pytest

from vortexlab.asymptotic import default_grid, quadrupole_profile
from vortexlab.diagnostics import (
    REPORT_COLUMNS, TrackingRecord, l1_error, lamb_oseen, project_quadrupole, quadrupole_fit,
    read_report, relaxation_fit, vorticity_moments, weighted_energy, write_report,
)
from vortexlab.errors import NoDecayDetected, WeightOverflowRisk, ZeroCirculation
from vortexlab.polar import ModeSum
from vortexlab.radial_profiles import ModeFunction, gaussian_vortex, interpolate_profile
from vortexlab.spectral_solver import PeriodicGrid, Snapshot, SpectralField, init_gaussian


@pytest.fixture(scope="module")
def box():
    return PeriodicGrid(6.0, 256, (0.4, -0.2))


def snapshot_of(grid, values, t=1.0):
    return Snapshot(t, SpectralField.from_physical(grid, values))


def test_l1_error_of_a_field_with_itself_is_zero(box):
    snap = Snapshot(0.0, init_gaussian(box, 1.0, 0.3, (0.4, -0.2)))
    assert l1_error(snap, snap.field.physical(), 1.0) == 0.0


def test_l1_error_of_the_sampled_lamb_oseen_vortex(box):
    z = (0.5, -0.1)
    snap = Snapshot(0.0, init_gaussian(box, 2.0, 0.3, z))
    # periodized tails sit at exp(-25) of the peak
    assert l1_error(snap, lamb_oseen(2.0, 0.3, z), 2.0) <= 1e-10


def test_non_finite_reference_is_rejected(box):
    snap = Snapshot(0.0, init_gaussian(box, 1.0, 0.3, (0.4, -0.2)))
    with pytest.raises(ValueError):
        l1_error(snap, lambda x: np.full(x.shape[:-1], np.nan), 1.0)


def test_moments_of_a_translated_gaussian(box):
    ell = 0.3
    for z in ((0.4, -0.2), (0.9, 0.15)):
        mom = vorticity_moments(Snapshot(0.0, init_gaussian(box, 1.5, ell, z)))
        assert mom.Gamma == pytest.approx(1.5, rel=1e-12)
        assert np.allclose(mom.center, z, atol=1e-12)
        assert np.allclose(mom.second, 2 * ell ** 2 * 1.5 * np.eye(2), atol=1e-12)


def test_zero_circulation_has_no_moments(box):
    X, _ = box.coordinates()
    with pytest.raises(ZeroCirculation):
        vorticity_moments(snapshot_of(box, np.sin(2 * np.pi * X / box.L)))


def quadrupole_field(grid, z, ell, a, b, base=True):
    pts = grid.points()
    xi = (pts - np.asarray(z)) / ell
    r = np.hypot(xi[..., 0], xi[..., 1])
    th = np.arctan2(xi[..., 1], xi[..., 0])
    g = default_grid()
    w2 = interpolate_profile(g, quadrupole_profile(g).values, r, 1)
    dev = w2 * (a * np.sin(2 * th) - b * np.cos(2 * th))
    return dev + (gaussian_vortex(r) / ell ** 2 if base else 0.0)


def test_quadrupole_fit_recovers_synthetic_rates(box):
    T0, z, ell = 2.0, (0.45, -0.17), 0.2
    a, b = 0.3 / T0, -0.1 / T0
    fit = quadrupole_fit(snapshot_of(box, quadrupole_field(box, z, ell, a, b)), z, ell, 1.0)
    assert fit.a_hat == pytest.approx(a, abs=1e-4 * abs(a))
    assert fit.b_hat == pytest.approx(b, abs=1e-4 * abs(b))


def test_quadrupole_fit_of_a_pure_vortex_vanishes(box):
    z, ell = (0.45, -0.17), 0.2
    fit = quadrupole_fit(snapshot_of(box, quadrupole_field(box, z, ell, 0.0, 0.0)), z, ell, 1.0)
    assert abs(fit.a_hat) <= 1e-12 and abs(fit.b_hat) <= 1e-12


def test_quadrupole_fit_is_linear(box):
    z, ell = (0.3, -0.1), 0.25
    dev = quadrupole_field(box, z, ell, 0.7, 0.2, base=False) + 0.01 * np.cos(box.points()[..., 0])
    pts = box.points()
    one = project_quadrupole(dev, pts, box.dx, z, ell)
    three = project_quadrupole(-3.0 * dev, pts, box.dx, z, ell)
    assert three.a_hat == pytest.approx(-3.0 * one.a_hat, rel=1e-13)
    assert three.b_hat == pytest.approx(-3.0 * one.b_hat, rel=1e-13)


def test_weighted_energy_of_zero():
    e = weighted_energy(ModeSum(default_grid(), {}))
    assert (e.E, e.F) == (0.0, 0.0)


def test_weighted_energy_of_the_translation_mode():
    """For d1 Omega0 = -(x1/2) Omega0 the weighted energy is 1/(8 pi) in closed form."""
    g = default_grid()
    w = ModeSum.from_modes(g, ModeFunction.from_arrays(1, g, -0.5 * g.r * gaussian_vortex(g.r),
                                                       np.zeros(g.size)))
    e = weighted_energy(w)
    assert e.E == pytest.approx(1 / (8 * np.pi), rel=1e-8)
    assert e.E <= e.F


def test_weighted_energy_orders_e_below_f():
    g = default_grid()
    r = g.r
    w = ModeSum.from_modes(
        g, ModeFunction.from_arrays(0, g, (1 - r ** 2 / 4) * gaussian_vortex(r)),
        ModeFunction.from_arrays(2, g, r ** 2 * np.exp(-r ** 2 / 3), r ** 2 * np.exp(-r ** 2 / 2.5)))
    e = weighted_energy(w)
    assert 0 < e.E <= e.F


def test_slowly_decaying_field_is_refused():
    g = default_grid()
    w = ModeSum.radial(g, 1.0 / (1 + g.r ** 2))
    with pytest.raises(WeightOverflowRisk):
        weighted_energy(w)


def test_relaxation_fit_of_a_power_law_with_plateau():
    t = np.geomspace(1.0, 10.0, 60)
    beta = relaxation_fit(t, (1.0 / t) ** 5 + 1e-4)
    assert beta == pytest.approx(5.0, abs=0.2)


def test_relaxation_fit_of_a_constant_history():
    t = np.geomspace(1.0, 10.0, 40)
    with pytest.raises(NoDecayDetected):
        relaxation_fit(t, np.full(t.size, 0.3))


def test_relaxation_fit_requirements():
    with pytest.raises(ValueError):
        relaxation_fit(np.geomspace(1, 10, 10), np.ones(10))
    with pytest.raises(ValueError):
        relaxation_fit(np.geomspace(1, 2, 30), np.ones(30))


def test_report_csv_round_trip(tmp_path):
    rec = TrackingRecord(*[0.1 * (k + 1) for k in range(len(REPORT_COLUMNS))])
    path = write_report(tmp_path / "tracking.csv", [rec, rec])
    header = path.read_text().splitlines()[0]
    assert header == ("t,eps,l1_vs_lambOseen_zhat,l1_vs_lambOseen_z,l1_vs_omega_app,a_hat,b_hat,"
                      "zbar_x,zbar_y,z_x,z_y,zhat_x,zhat_y")
    assert read_report(path) == [rec, rec]


def test_tracking_record_must_be_finite():
    with pytest.raises(ValueError):
        TrackingRecord(*([np.nan] + [0.0] * (len(REPORT_COLUMNS) - 1)))
