"""
Integration tests: which Charlie operations let Alice signal Bob on the four-point causet
"""

import pytest

from services.kraus import parse_kraus
from services.scenario import acausality_search, closed_form_phi2, default_t_grid, signal_scan
from services.kraus import chi


CAUSAL = ["kick:zero", "kick:linear", "weak:sigma=0.5", "l2:gaussian:sigma=0.5", "l2:box:w=1"]
IDEAL = ["ideal:uniform:w=1", "ideal:threshold:0", "ideal:svc:d=2", "ideal:svc:d=4"]


class TestSignalling:
    """max over s of |chi(s) - chi(0)| across a t scan"""

    @pytest.mark.parametrize("literal", IDEAL)
    def test_ideal_measurements_signal(self, scenario, literal):
        result = acausality_search(scenario, parse_kraus(literal), t_grid=default_t_grid(scenario.ctx, 10))
        assert result.max_gap > 1e-6

    @pytest.mark.parametrize("literal", CAUSAL)
    def test_causal_families_stay_flat(self, scenario, literal):
        result = acausality_search(scenario, parse_kraus(literal), t_grid=default_t_grid(scenario.ctx, 10))
        assert result.max_gap <= 1e-7

    def test_square_kick_phase(self, scenario, ctx):
        """The scan reproduces exp(-2 i s t Delta(f,g) Delta(f,h)) chi(0)"""
        fam = parse_kraus("kick:square")
        for s in (0.5, 1.0, 2.0):
            closed = closed_form_phi2(ctx, s, 0.8)
            assert closed.phase == pytest.approx(2.0 * s * 0.8 * ctx.d_fg * ctx.d_fh, abs=1e-10)
            assert abs(chi(fam, ctx, s, 0.8) - closed.lhs) < 1e-7
        scan = signal_scan(scenario, fam, 0.8, [0.0, 0.5, 1.0, 2.0])
        assert scan.max_gap > 1e-2
