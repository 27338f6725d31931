"""
Experiment Service
Runs one command-line experiment from a resolved config and writes its artifacts
"""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from models.kraus import KrausFamily
from models.requests import ExperimentConfig, OracleChoice, SpacetimeSource
from models.responses import RunStatus, RunSummary
from models.scenario import ScenarioSearchResult
from models.spacetime import BumpFunction, CausalSet, Grid2D, Region
from services import deco, fock_oracle, oscillator2d, persistence, sampling
from services.kraus import causality_verdict, parse_kraus, verdict_table
from services.propagators import causet_retarded_green, sj_modes
from services.resolutions import continuity_jumps, nontriviality_search, parse_resolution, r_t
from services.scenario import build_scenario_causet, build_scenario_continuum, signal_scan
from services.spacetime import four_point_causet, sprinkle
from utils.errors import DegenerateWidthError, InvalidConfigError, UnsupportedCaseError
from utils.validators import ConfigValidator

# Setup logging
logger = logging.getLogger(__name__)

# The four-point causet carries unit density
_FOUR_POINT_DENSITY = 1.0
_CONTINUITY_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4)


def _complex_columns(prefix: str) -> List[str]:
    return [f"{prefix}_re", f"{prefix}_im"]


class ExperimentRunner:
    """
    One experiment per instance: validates the config for the command,
    writes the resolved config, then the command's artifacts under
    <out>/<command>/
    """

    def __init__(self, config: ExperimentConfig, run_id: str):
        self.config = config
        self.run_id = run_id
        self.validator = ConfigValidator()
        self._commands: Dict[str, Callable[[Path], RunSummary]] = {
            "sprinkle": self.cmd_sprinkle,
            "propagator": self.cmd_propagator,
            "scenario": self.cmd_scenario,
            "chi-scan": self.cmd_chi_scan,
            "verdict": self.cmd_verdict,
            "rt": self.cmd_rt,
            "sample": self.cmd_sample,
            "deco": self.cmd_deco,
            "oscillator": self.cmd_oscillator,
        }

    def run(self, command: str) -> RunSummary:
        """
        Raises:
            InvalidConfigError: If the config cannot drive the command
            SorkinLabError: Whatever the command's services raise
        """
        check = self.validator.validate(self.config, command)
        if not check.valid:
            raise InvalidConfigError(command, check.errors)
        for warning in check.warnings:
            logger.warning(warning)

        out_dir = Path(self.config.out) / command
        config_path = persistence.write_config(self.config, out_dir / "config.txt")
        logger.info(f"Running {command} into {out_dir}")
        summary = self._commands[command](out_dir)
        summary.outputs.insert(0, str(config_path))
        logger.info(f"{command} finished with status {summary.status.value}")
        return summary

    def _summary(self, command: str, outputs: List[Path], status: RunStatus = RunStatus.OK, **details) -> RunSummary:
        return RunSummary(
            command=command,
            run_id=self.run_id,
            status=status,
            outputs=[str(p) for p in outputs],
            details=details,
        )

    # Inputs

    def causet(self) -> CausalSet:
        c = self.config
        if c.spacetime == SpacetimeSource.FOUR_POINT:
            return four_point_causet()
        if c.spacetime == SpacetimeSource.SPRINKLE:
            return sprinkle(c.t_range, c.x_range, c.density, c.seed)
        if c.spacetime == SpacetimeSource.FILE:
            return persistence.read_causet(c.causet_file)
        raise UnsupportedCaseError("continuum configs have no causal set")

    def density(self) -> float:
        return _FOUR_POINT_DENSITY if self.config.spacetime == SpacetimeSource.FOUR_POINT else self.config.density

    def f_vector(self, n: int) -> np.ndarray:
        f = np.zeros(n)
        for p in self.config.f_points:
            if not 0 <= p < n:
                raise UnsupportedCaseError(f"f point {p} is outside the {n}-point causet")
            f[p] += 1.0
        return f

    def scenario(self) -> ScenarioSearchResult:
        c = self.config
        if c.spacetime == SpacetimeSource.CONTINUUM:
            t_min, t_max, x_min, x_max = c.grid
            grid = Grid2D(t_min=t_min, t_max=t_max, x_min=x_min, x_max=x_max, spacing=c.grid_spacing)
            t0, x0, radius = c.f_bump
            f = BumpFunction(t0=t0, x0=x0, radius=radius)
            return build_scenario_continuum(f, Region(rectangle=c.lab_rect), grid, c.mass)
        cs = self.causet()
        return build_scenario_causet(cs, self.f_vector(cs.n_points), c.lab_points, c.mass, self.density())

    def kernel(self):
        if self.config.sample_kernel == "point":
            return None
        return parse_kraus(self.config.sample_kernel).l2_kernel()

    # Commands

    def cmd_sprinkle(self, out_dir: Path) -> RunSummary:
        cs = self.causet()
        path = persistence.write_causet(cs, out_dir / "causet.txt")
        links = int(persistence.transitive_reduction(cs).sum())
        return self._summary("sprinkle", [path], n_points=cs.n_points, n_links=links)

    def cmd_propagator(self, out_dir: Path) -> RunSummary:
        cs = self.causet()
        props = causet_retarded_green(cs, self.config.mass, self.density())
        modes = sj_modes(props)
        outputs = [
            persistence.write_causet(cs, out_dir / "causet.txt"),
            persistence.write_matrix(props.g_ret, out_dir / "g_ret.txt", "retarded"),
            persistence.write_matrix(props.delta, out_dir / "delta.txt", "pauli_jordan"),
            persistence.write_matrix(modes.w_matrix.real, out_dir / "w_real.txt", "wightman_real"),
            persistence.write_matrix(modes.w_matrix.imag, out_dir / "w_imag.txt", "wightman_imag"),
            persistence.write_csv(out_dir / "eigenvalues.csv", ["k", "lambda"], enumerate(modes.eigenvalues)),
        ]
        return self._summary(
            "propagator", outputs,
            n_points=cs.n_points, rank=modes.rank, n_modes=modes.n_modes, pairing_defect=modes.pairing_defect,
        )

    def cmd_scenario(self, out_dir: Path) -> RunSummary:
        result = self.scenario()
        if not result.found:
            path = persistence.write_key_values(
                {"found": False, "reason": result.reason, "candidates_examined": result.candidates_examined},
                out_dir / "scenario.txt",
            )
            logger.info(f"No Sorkin scenario: {result.reason}")
            return self._summary("scenario", [path], RunStatus.NOT_FOUND, reason=result.reason)
        sc = result.scenario
        outputs = persistence.write_scenario_bundle(sc, out_dir)
        return self._summary("scenario", outputs, d_fg=sc.d_fg, d_fh=sc.d_fh, d_gh=sc.d_gh)

    def cmd_chi_scan(self, out_dir: Path) -> RunSummary:
        c = self.config
        result = self.scenario()
        if not result.found:
            return self._summary("chi-scan", [], RunStatus.NOT_FOUND, reason=result.reason)
        sc = result.scenario
        fam = parse_kraus(c.kraus)
        scan = signal_scan(sc, fam, c.t, c.s_grid)

        header = ["s", *_complex_columns("chi"), "gap"]
        columns = [scan.s_grid, scan.chi.real, scan.chi.imag, np.abs(scan.chi - scan.chi_zero)]
        details = {"kraus": fam.describe(), "t": c.t, "max_gap": scan.max_gap}
        status = RunStatus.OK

        if c.oracle == OracleChoice.FOCK:
            if sc.causet is None:
                raise UnsupportedCaseError("the Fock oracle needs a causal-set scenario")
            modes = sj_modes(causet_retarded_green(sc.causet, sc.mass, sc.density))
            F = fock_oracle.build(modes, c.n_max)
            oracle = fock_oracle.chi_oracle_scan(F, sc.f, sc.h, sc.g, fam, scan.s_grid, c.t)
            difference = np.abs(oracle - scan.chi)
            header += [*_complex_columns("oracle"), "difference"]
            columns += [oracle.real, oracle.imag, difference]
            details["max_difference"] = float(np.max(difference))
            if details["max_difference"] > c.tolerance:
                status = RunStatus.CHECK_FAILED
                logger.warning(
                    f"Oracle disagrees with the analytic signal by {details['max_difference']:.3g} "
                    f"(tolerance {c.tolerance:g})"
                )

        path = persistence.write_csv(out_dir / "chi_scan.csv", header, zip(*columns))
        return self._summary("chi-scan", [path], status, **details)

    def cmd_verdict(self, out_dir: Path) -> RunSummary:
        c = self.config
        fam = parse_kraus(c.kraus)
        verdict = causality_verdict(fam, c.shift)
        w = verdict.witness
        header = ["kraus", "verdict", "method", "t", "lambda_1", "lambda_2", "gap"]

        def row(literal: str, v, method: str, witness) -> tuple:
            if witness is None:
                return (literal, v.value.upper(), method, c.shift, None, None, None)
            return (literal, v.value.upper(), method, witness.t, witness.lambda_1, witness.lambda_2, witness.gap)

        outputs = [
            persistence.write_csv(out_dir / "verdict.csv", header, [row(fam.describe(), verdict.verdict, verdict.method, w)]),
            persistence.write_csv(
                out_dir / "verdict_table.csv",
                header,
                (row(r.literal, r.verdict, r.method, r.witness) for r in verdict_table(c.shift)),
            ),
        ]
        details = {"kraus": fam.describe(), "verdict": verdict.verdict.value.upper()}
        if w is not None:
            details.update(t=w.t, lambda_1=w.lambda_1, lambda_2=w.lambda_2, gap=w.gap)
        return self._summary("verdict", outputs, **details)

    def cmd_rt(self, out_dir: Path) -> RunSummary:
        c = self.config
        res = parse_resolution(c.resolution)
        search = nontriviality_search(res, c.rt_window)
        t = search.t_star if c.rt_t is None else c.rt_t
        region = r_t(res, t, c.rt_window)
        lo, hi = c.rt_window
        jumps = continuity_jumps(res, c.rt_window, t, _CONTINUITY_DELTAS)
        outputs = [
            persistence.write_csv(out_dir / "rt.csv", ["a", "b"], region.intervals),
            persistence.write_csv(out_dir / "continuity.csv", ["delta", "change"], zip(_CONTINUITY_DELTAS, jumps)),
        ]
        return self._summary(
            "rt", outputs,
            resolution=res.describe(), t=t, t_star=search.t_star,
            measure=region.measure(), ratio=region.measure() / (hi - lo),
        )

    def cmd_sample(self, out_dir: Path) -> RunSummary:
        c = self.config
        plan = sampling.make_plan(c.t, self.kernel(), c.w_gg, c.epsilon, c.delta, seed=c.seed)
        table = sampling.replicate(plan, c.replications)
        rows = (
            (r.replication, r.estimate.mean.real, r.estimate.mean.imag, r.estimate.error, r.estimate.passed)
            for r in table.rows
        )
        path = persistence.write_csv(out_dir / "replications.csv", ["replication", "mean_re", "mean_im", "error", "passed"], rows)
        try:
            ks: Optional[float] = sampling.ks_distance(sampling.sample_outcomes(plan), plan)
        except DegenerateWidthError:
            ks = None
        status = RunStatus.OK if table.pass_rate >= 1.0 - c.delta else RunStatus.CHECK_FAILED
        return self._summary(
            "sample", [path], status,
            n_samples=plan.n_samples, variance=plan.variance, pass_rate=table.pass_rate,
            grand_mean_re=table.grand_mean.real, grand_mean_im=table.grand_mean.imag, ks_distance=ks,
        )

    def cmd_deco(self, out_dir: Path) -> RunSummary:
        c = self.config
        cs = self.causet()
        modes = sj_modes(causet_retarded_green(cs, c.mass, self.density()))
        F = fock_oracle.build(modes, c.n_max)
        edges = [deco.centered_edges(c.cell_width, c.cells_per_axis)] * 4
        D = deco.binned_decoherence(F, edges)
        res = parse_resolution(c.resolution)
        f = self.f_vector(cs.n_points)
        f1, f2 = f[1], f[2]

        measured = [deco.chi_from_deco(D, s, c.t, res, f1, f2) for s in c.s_grid]
        marginal = [deco.chi_no_measurement(D, s, c.t) for s in c.s_grid]
        header = ["s", *_complex_columns("chi"), *_complex_columns("no_measurement")]
        columns = [c.s_grid, [z.real for z in measured], [z.imag for z in measured],
                   [z.real for z in marginal], [z.imag for z in marginal]]
        details = {
            "normalisation": abs(D.normalisation()),
            "signal_gap": max(abs(z - measured[0]) for z in measured),
            "marginal_deviation": deco.marginal_independence_check(D, c.s_grid, c.t),
        }

        if c.oracle == OracleChoice.FOCK:
            e_a, e_b = np.eye(cs.n_points)[0], np.eye(cs.n_points)[3]
            oracle = fock_oracle.chi_oracle_scan(F, f, e_a, e_b, KrausFamily.ideal(res), c.s_grid, c.t)
            header += _complex_columns("oracle")
            columns += [oracle.real, oracle.imag]
            details["max_difference"] = float(np.max(np.abs(oracle - np.array(measured))))

        outputs = [persistence.write_csv(out_dir / "deco_chi.csv", header, zip(*columns))]
        if c.export_cells:
            outputs.append(persistence.write_deco_cells(D, out_dir / "deco_cells.csv", c.export_tol))
        return self._summary("deco", outputs, **details)

    def cmd_oscillator(self, out_dir: Path) -> RunSummary:
        c = self.config
        res = parse_resolution(c.resolution)
        closed = [oscillator2d.chi_closed(s, c.t, res) for s in c.s_grid]
        quadrature = [oscillator2d.chi_quadrature(s, c.t, res) for s in c.s_grid]
        header = ["s", *_complex_columns("closed"), *_complex_columns("quadrature")]
        columns = [c.s_grid, [z.real for z in closed], [z.imag for z in closed],
                   [z.real for z in quadrature], [z.imag for z in quadrature]]
        details = {
            "closed_gap": max(abs(z - closed[0]) for z in closed),
            "route_difference": max(abs(a - b) for a, b in zip(closed, quadrature)),
        }

        bounds = []
        for eps in c.pure_point_eps:
            pure = [oscillator2d.chi_pure_point(s, c.t, eps) for s in c.s_grid]
            header += _complex_columns(f"pure_point_{eps:g}")
            columns += [[z.real for z in pure], [z.imag for z in pure]]
            details[f"pure_point_gap_{eps:g}"] = max(abs(z - pure[0]) for z in pure)
            bounds.extend(oscillator2d.pure_point_bound(eps, op) for op in ("x", "O"))

        outputs = [
            persistence.write_csv(out_dir / "oscillator.csv", header, zip(*columns)),
            persistence.write_csv(
                out_dir / "pure_point_bounds.csv",
                ["operator", "epsilon", "deviation", "bound", "holds"],
                ((b.operator, b.epsilon, b.deviation, b.bound, b.holds) for b in bounds),
            ),
        ]
        details["bounds_hold"] = all(b.holds for b in bounds)
        return self._summary("oscillator", outputs, **details)
