import numpy as np
import pytest

from tripletprobe.baseline import (
    BaselineConfig,
    Protocol,
    expected_ordered_baseline,
    simulate_ordered_baseline,
)
from tripletprobe.errors import Empty
from tripletprobe.framing import TripletLabel

T = TripletLabel
CENTRAL = [T("a", "a", "a")] * 10
BORDER = [T("a", "p", "p"), T("p", "p", "a"), T("a", "a", "p")] * 5
TWO_BORDER_DISTINCT = [T("a", "p", "s")] * 5
TWO_BORDER_REPEAT = [T("a", "p", "a")] * 5


class TestClosedForm:
    def test_central_p1_both_protocols(self):
        for proto in Protocol:
            cfg = BaselineConfig(p_identify=1.0, protocol=proto)
            assert expected_ordered_baseline(CENTRAL, cfg) == pytest.approx(1.0)

    def test_border_per_position(self):
        cfg = BaselineConfig(p_identify=0.9, protocol=Protocol.PER_POSITION)
        assert expected_ordered_baseline(BORDER, cfg) == pytest.approx(0.9**3 / 3)

    def test_border_per_set(self):
        cfg = BaselineConfig(p_identify=0.9, protocol=Protocol.PER_SET)
        assert expected_ordered_baseline(BORDER, cfg) == pytest.approx(0.9**2 / 6)

    def test_two_border_arrangements(self):
        cfg = BaselineConfig(p_identify=1.0, protocol=Protocol.PER_POSITION)
        assert expected_ordered_baseline(TWO_BORDER_DISTINCT, cfg) == pytest.approx(
            1 / 6
        )
        assert expected_ordered_baseline(TWO_BORDER_REPEAT, cfg) == pytest.approx(
            1 / 3
        )

    def test_two_border_per_set(self):
        cfg = BaselineConfig(p_identify=1.0, protocol=Protocol.PER_SET)
        assert expected_ordered_baseline(TWO_BORDER_DISTINCT, cfg) == pytest.approx(
            1 / 6
        )
        assert expected_ordered_baseline(TWO_BORDER_REPEAT, cfg) == pytest.approx(
            1 / 6
        )

    def test_monotone_in_p(self):
        truths = CENTRAL + BORDER + TWO_BORDER_DISTINCT
        for proto in Protocol:
            values = [
                expected_ordered_baseline(
                    truths, BaselineConfig(p_identify=p, protocol=proto)
                )
                for p in np.linspace(0, 1, 11)
            ]
            assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    def test_linearity_over_truth_mix(self):
        cfg = BaselineConfig(p_identify=0.8)
        e_central = expected_ordered_baseline(CENTRAL, cfg)
        e_border = expected_ordered_baseline(BORDER, cfg)
        mixed = CENTRAL + BORDER
        expected = (
            len(CENTRAL) * e_central + len(BORDER) * e_border
        ) / len(mixed)
        assert expected_ordered_baseline(mixed, cfg) == pytest.approx(expected)

    def test_empty(self):
        with pytest.raises(Empty):
            expected_ordered_baseline([], BaselineConfig())


class TestMonteCarlo:
    def test_p_zero_exact(self):
        for proto in Protocol:
            cfg = BaselineConfig(p_identify=0.0, protocol=proto, trials=200, seed=1)
            mean, _ = simulate_ordered_baseline(BORDER, cfg)
            assert mean == 0.0

    def test_p_one_central_exact(self):
        for proto in Protocol:
            cfg = BaselineConfig(p_identify=1.0, protocol=proto, trials=200, seed=1)
            mean, _ = simulate_ordered_baseline(CENTRAL, cfg)
            assert mean == 1.0

    @pytest.mark.parametrize("proto", list(Protocol))
    @pytest.mark.parametrize("p", [0.5, 0.9])
    def test_converges_to_closed_form(self, proto, p):
        truths = CENTRAL + BORDER + TWO_BORDER_DISTINCT + TWO_BORDER_REPEAT
        cfg = BaselineConfig(p_identify=p, protocol=proto, trials=20000, seed=7)
        expected = expected_ordered_baseline(truths, cfg)
        mean, stderr = simulate_ordered_baseline(truths, cfg)
        assert abs(mean - expected) <= 3 * stderr

    def test_seeded_reproducibility(self):
        cfg = BaselineConfig(trials=1000, seed=5)
        assert simulate_ordered_baseline(BORDER, cfg) == simulate_ordered_baseline(
            BORDER, cfg
        )
