import numpy as np
import pytest

from halfline import potential
from halfline.numerics import Grid, SampledFunction
from halfline.potential import Potential, check_L11, sigma_q, total_charge


def test_closed_form_potentials_sample_correctly():
    p = potential.sech2_well(1.0, h=0.05, x_max=10.0)
    assert p.values[0] == -2.0
    assert p.x_max == 10.0 and p.grid.h == pytest.approx(0.05)
    b = potential.polynomial_bump(h=0.05)
    assert b.support_radius == 2.0
    assert np.all(b.values[b.x > 2.0] == 0.0)
    assert np.min(b.values) == pytest.approx(-3.0)


def test_support_radius_is_enforced():
    g = Grid(0.0, 5.0, 50)
    with pytest.raises(ValueError):
        Potential(SampledFunction(g, np.ones(51)), support_radius=2.0)
    with pytest.raises(ValueError):
        Potential(SampledFunction(g, np.ones(51) * 1j))


def test_total_charge_and_sigma():
    p = potential.sech2_well(1.0, h=0.01)
    assert total_charge(p) == pytest.approx(-2.0 * np.tanh(15.0), abs=1e-8)
    s = sigma_q(p).values
    assert s[0] == pytest.approx(2.0, abs=1e-6)
    assert s[-1] == 0.0 and np.all(np.diff(s) <= 0)


def test_L11_check():
    good = check_L11(potential.sech2_well(1.0))
    assert good.finite
    # int x * 2 sech^2 x dx over [0, inf) = 2 ln 2
    assert good.value == pytest.approx(2 * np.log(2.0), abs=1e-6)
    slow = potential.from_function(lambda x: -1.0 / (1.0 + x) ** 1.5, x_max=100.0, h=0.1)
    assert not check_L11(slow).finite
