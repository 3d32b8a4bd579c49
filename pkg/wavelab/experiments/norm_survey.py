"""Norms of the configured data and of its linear evolution."""
import math

import numpy as np
import pandas as pd

from ..core.dynamics import energy
from ..core.norms import (
    BesovSpec,
    MixedNormSpec,
    besov_blocks,
    besov_norm,
    data_norm,
    energy_norm,
    mixed_norm,
    pair_norms,
)
from ..core.probes import DILATION_DRIFT_LIMIT, ProbeContext, dilation_drift
from .base_experiment import BaseExperiment, ExperimentResult

# B^0_(2,2) against mean-free L^2 when the dyads tile the band
BESOV_L2_BOUNDS = (1 / math.sqrt(2) - 1e-9, 1 + 1e-9)


class NormSurvey(BaseExperiment):
    """Sobolev, Besov and W-norms of phi and of K̇phi + Kpsi on [0, T]."""

    name = "norms"

    def run(self) -> ExperimentResult:
        c = self.config
        sg = self.sgrid
        phi, psi = self.initial_data()
        s = float(self.params.s)
        rows = [
            ("phi_L2", sg.lp_norm(phi, 2)),
            ("phi_Linf", sg.lp_norm(phi, math.inf)),
            ("phi_H1", sg.sobolev_norm(phi, 1)),
            ("psi_L2", sg.lp_norm(psi, 2)),
            ("data_norm_H1xL2", data_norm(phi, psi, 0.0, sg)),
            ("energy_norm", energy_norm(phi, psi, sg)),
            ("energy", energy(phi, psi, self.weight, self.alpha, sg).total),
        ]
        if s > 0:
            rows.append((f"phi_H{s:g}", sg.sobolev_norm(phi, s)))
            rows.append((f"data_norm_H{s + 1:g}xH{s:g}", data_norm(phi, psi, s, sg)))

        mean_free_l2 = sg.sobolev_norm(phi, 0.0)
        besov_l2 = besov_norm(phi, BesovSpec(0.0, 2, 2), sg)
        rows += [
            ("phi_L2_mean_free", mean_free_l2),
            ("phi_B0_22", besov_l2),
            ("phi_B1_22", besov_norm(phi, BesovSpec(1.0, 2, 2), sg)),
            ("phi_B1/4_42", besov_norm(phi, BesovSpec(0.25, 4, 2), sg)),
        ]
        if mean_free_l2 > 0:
            rows.append(("besov_over_l2", besov_l2 / mean_free_l2))
        for j, value in besov_blocks(phi, BesovSpec(0.0, 2, 2), sg).items():
            rows.append((f"lp_block_{j}", value))

        times = np.linspace(0.0, c.time.T, c.time.snapshots)
        linear = self.plan.linear_trajectory(phi, psi, times)
        pairs = self.engine.pair_set(self.picard_config())
        for label, value in pair_norms(linear, pairs, 0.0, sg, c.picard.space_scale, c.time.quadrature).items():
            rows.append((f"linear_W{label}", value))
        if s > 0:
            for label, value in pair_norms(linear, pairs, s, sg, c.picard.space_scale, c.time.quadrature).items():
                rows.append((f"linear_W_Hs{label}", value))
        rows.append(("linear_Linf_L2", mixed_norm(linear, MixedNormSpec(math.inf, 2), 0.0, sg)))
        rows.append(("linear_L2_L2", mixed_norm(linear, MixedNormSpec(2, 2), 0.0, sg)))

        ctx = ProbeContext(sg, self.params, T=c.time.T, snapshots=c.time.snapshots, gamma=c.eq.gamma)
        drift = dilation_drift(ctx)
        rows.append(("besov_dilation_drift", drift["drift"]))

        failed = []
        if mean_free_l2 > 0:
            lo, hi = BESOV_L2_BOUNDS
            if not lo <= besov_l2 / mean_free_l2 <= hi:
                failed.append(f"B0_22 / L2 = {besov_l2 / mean_free_l2:.6f} outside [{lo:.6f}, {hi:.6f}]")
        if drift["drift"] > DILATION_DRIFT_LIMIT:
            failed.append(f"Besov dilation drift {drift['drift']:.4f} exceeds {DILATION_DRIFT_LIMIT}")
        self.warnings.extend(failed)

        frame = pd.DataFrame(rows, columns=["quantity", "value"])
        self.save_csv(frame, "norms.csv")
        summary = dict(rows)
        self.save_json(summary, "norms.json")
        return ExperimentResult(
            success=not failed,
            summary={"quantities": len(rows), "besov_dilation_drift": drift["drift"], "checks_failed": failed},
        )
