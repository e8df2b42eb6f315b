"""Error measures, energy functionals, and convergence tables.

Error fields are always (exact solution evaluated under quadrature) minus
(finite element field); interpolants of the exact solution are never used
as a stand-in.  Final-time quantities:

* ``e_u``      L2 fluid error at t = T
* ``e_du``     L2 fluid norm of the error increment over the last step
* ``e_dw``     same on the solid side
* ``e_gdu``    L2 fluid norm of the gradient of the last error increment

Summed quantities, each sqrt(dt * sum of squared step norms):

* ``e_gdus``   gradients of fluid error increments, levels (2,1) .. (N,N-1)
* ``e_gdws``   solid counterpart
* ``e_gdu2s``  gradients of second differences, levels (3,2,1) .. (N,N-1,N-2)
* ``e_dls``    interface L2 of flux error increments, same range as e_gdus
* ``e_ggdus``  elementwise Hessians of fluid error increments; for P1 fields
               the FE Hessian vanishes so only the exact part contributes
               (reported for completeness, meaningful for P2)

The streaming accumulator keeps three levels of quadrature-point data, so
memory stays bounded for long runs; ``summed_errors``/``final_time_errors``
recompute the same numbers from a fully stored trajectory through the plain
error-norm entry points.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import fem
from .errors import ConfigurationError
from .schemes import build_discretization, run

FINAL_QUANTITIES = ("e_u", "e_du", "e_dw", "e_gdu")
SUMMED_QUANTITIES = ("e_gdus", "e_gdws", "e_gdu2s", "e_dls", "e_ggdus")
ALL_QUANTITIES = FINAL_QUANTITIES + SUMMED_QUANTITIES


@dataclass
class ErrorReport:
    """Error quantities of one run; unset entries are None."""

    dt: float
    h: float
    k: int = None
    e_u: float = None
    e_du: float = None
    e_dw: float = None
    e_gdu: float = None
    e_gdus: float = None
    e_gdws: float = None
    e_gdu2s: float = None
    e_dls: float = None
    e_ggdus: float = None

    def values(self):
        return {name: getattr(self, name) for name in ALL_QUANTITIES}


class ErrorAccumulator:
    """Streams error quantities out of a run, three levels at a time."""

    def __init__(self, case, disc, dt, n_steps):
        self.case = case
        self.disc = disc
        self.dt = dt
        self.n_steps = n_steps
        self.ftab = disc.fluid.tables(fem.ERROR_DEGREE)
        self.stab = disc.solid.tables(fem.ERROR_DEGREE)
        self.ltab = disc.fluid._line_tables()
        self._hist = []
        self._sums = dict.fromkeys(SUMMED_QUANTITIES, 0.0)
        self._final = {}
        self._fvals = {}

    # quadrature sums of squared point arrays
    def _nsq_f(self, arr):
        return float(np.sum(self.ftab["wdet"] * arr**2))

    def _nsq_fg(self, arr):
        return float(np.sum(self.ftab["wdet"] * np.sum(arr**2, axis=-1)))

    def _nsq_fh(self, arr):
        return float(np.sum(self.ftab["wdet"] * np.sum(arr**2, axis=(-2, -1))))

    def _nsq_s(self, arr):
        return float(np.sum(self.stab["wdet"] * arr**2))

    def _nsq_sg(self, arr):
        return float(np.sum(self.stab["wdet"] * np.sum(arr**2, axis=-1)))

    def _nsq_l(self, arr):
        return float(np.sum(self.ltab["wdet"] * arr**2))

    def observe(self, state):
        case, disc = self.case, self.disc
        n = state.n
        t = n * self.dt
        entry = {
            "n": n,
            "gf": np.asarray(case.grad_u(t, self.ftab["qp"]))
            - fem.fe_grads_at_qp(disc.fluid, state.u, self.ftab),
            "gs": np.asarray(case.grad_w(t, self.stab["qp"]))
            - fem.fe_grads_at_qp(disc.solid, state.w, self.stab),
            "hf": np.asarray(case.hess_u(t, self.ftab["qp"]))
            - fem.fe_hessians_at_qp(disc.fluid, state.u, self.ftab),
            "lf": np.asarray(case.l_exact(t, self.ltab["qp_x"]))
            - np.einsum(
                "el,ql->eq",
                state.lam[disc.fluid._interface_cells_local],
                self.ltab["vals"],
            ),
        }
        if self._hist and self._hist[-1]["n"] != n - 1:
            raise ConfigurationError("states must be observed in consecutive order")
        self._hist.append(entry)
        if len(self._hist) > 3:
            self._hist.pop(0)

        if n >= 2:
            cur, prev = self._hist[-1], self._hist[-2]
            self._sums["e_gdus"] += self._nsq_fg(cur["gf"] - prev["gf"])
            self._sums["e_gdws"] += self._nsq_sg(cur["gs"] - prev["gs"])
            self._sums["e_dls"] += self._nsq_l(cur["lf"] - prev["lf"])
            self._sums["e_ggdus"] += self._nsq_fh(cur["hf"] - prev["hf"])
        if n >= 3:
            cur, prev, before = self._hist[-1], self._hist[-2], self._hist[-3]
            self._sums["e_gdu2s"] += self._nsq_fg(
                cur["gf"] - 2 * prev["gf"] + before["gf"]
            )

        if n >= self.n_steps - 1:
            self._fvals[n] = {
                "vf": np.asarray(case.u_exact(t, self.ftab["qp"]))
                - fem.fe_values_at_qp(disc.fluid, state.u, self.ftab),
                "vs": np.asarray(case.w_exact(t, self.stab["qp"]))
                - fem.fe_values_at_qp(disc.solid, state.w, self.stab),
            }
        if n == self.n_steps:
            prev = self._fvals[n - 1]
            cur = self._fvals[n]
            self._final["e_u"] = math.sqrt(self._nsq_f(cur["vf"]))
            self._final["e_du"] = math.sqrt(self._nsq_f(cur["vf"] - prev["vf"]))
            self._final["e_dw"] = math.sqrt(self._nsq_s(cur["vs"] - prev["vs"]))
            self._final["e_gdu"] = math.sqrt(
                self._nsq_fg(self._hist[-1]["gf"] - self._hist[-2]["gf"])
            )

    def report(self, k=None):
        if "e_u" not in self._final:
            raise ConfigurationError("run did not reach its final level")
        out = ErrorReport(dt=self.dt, h=1.0 / self.disc.config.nx, k=k, **self._final)
        for name, total in self._sums.items():
            setattr(out, name, math.sqrt(self.dt * total))
        return out


def run_with_errors(case, config, disc=None, k=None):
    """Run one configuration and stream its full error report."""
    if disc is None:
        disc = build_discretization(config)
    acc = ErrorAccumulator(case, disc, config.dt, config.n_steps)
    run(case, config, disc=disc, observer=acc.observe, keep_states=False)
    return acc.report(k=k)


# ---------------------------------------------------------------------------
# batch recomputation from a stored trajectory

def _frozen_diff(f, ta, tb):
    return lambda _t, x: f(ta, x) - f(tb, x)


def final_time_errors(trajectory, case, disc):
    """Final-time quantities recomputed from the last two stored states."""
    N = int(round(trajectory.T / trajectory.dt))
    if trajectory.last_level < N or trajectory.first_retained > N - 1:
        raise ConfigurationError("trajectory does not retain levels N-1 and N")
    T = trajectory.T
    tp = T - trajectory.dt
    sN, sP = trajectory[N], trajectory[N - 1]
    fluid, solid = disc.fluid, disc.solid
    return ErrorReport(
        dt=trajectory.dt,
        h=1.0 / disc.config.nx,
        e_u=fem.l2_error(fluid, sN.u, case.u_exact, T),
        e_du=fem.l2_error(fluid, sN.u - sP.u, _frozen_diff(case.u_exact, T, tp), 0.0),
        e_dw=fem.l2_error(solid, sN.w - sP.w, _frozen_diff(case.w_exact, T, tp), 0.0),
        e_gdu=fem.h1_semi_error(fluid, sN.u - sP.u, _frozen_diff(case.grad_u, T, tp), 0.0),
    )


def summed_errors(trajectory, case, disc):
    """Summed quantities recomputed pair by pair from a full trajectory."""
    N = int(round(trajectory.T / trajectory.dt))
    if trajectory.first_retained > 1 or trajectory.last_level < N:
        raise ConfigurationError("summed quantities need the full trajectory")
    dt = trajectory.dt
    fluid, solid = disc.fluid, disc.solid
    sums = dict.fromkeys(SUMMED_QUANTITIES, 0.0)
    for n in range(1, N):
        a, b = trajectory[n], trajectory[n + 1]
        ta, tb = n * dt, (n + 1) * dt
        sums["e_gdus"] += (
            fem.h1_semi_error(fluid, b.u - a.u, _frozen_diff(case.grad_u, tb, ta), 0.0) ** 2
        )
        sums["e_gdws"] += (
            fem.h1_semi_error(solid, b.w - a.w, _frozen_diff(case.grad_w, tb, ta), 0.0) ** 2
        )
        sums["e_dls"] += (
            fem.sigma_l2_error(
                fluid,
                b.lam - a.lam,
                lambda _t, x1, _ta=ta, _tb=tb: case.l_exact(_tb, x1) - case.l_exact(_ta, x1),
                0.0,
            )
            ** 2
        )
        sums["e_ggdus"] += (
            fem.broken_h2_seminorm_diff(
                fluid, b.u - a.u, _frozen_diff(case.hess_u, tb, ta), 0.0
            )
            ** 2
        )
    for n in range(2, N):
        a, b, c = trajectory[n - 1], trajectory[n], trajectory[n + 1]
        ta, tb, tc = (n - 1) * dt, n * dt, (n + 1) * dt

        def second_diff(_t, x):
            return case.grad_u(tc, x) - 2 * case.grad_u(tb, x) + case.grad_u(ta, x)

        sums["e_gdu2s"] += (
            fem.h1_semi_error(fluid, c.u - 2 * b.u + a.u, second_diff, 0.0) ** 2
        )
    out = ErrorReport(dt=dt, h=1.0 / disc.config.nx)
    for name, total in sums.items():
        setattr(out, name, math.sqrt(dt * total))
    return out


# ---------------------------------------------------------------------------
# energy functionals

def zs_functionals(*, solid, fluid, trace, alpha, dt, disc, nu_f=1.0, nu_s=1.0):
    """Discrete energy Z and dissipation S of one step.

    Each of ``solid``/``fluid``/``trace`` is a pair (next, prev) of
    coefficient vectors (solid field, fluid field, interface flux).  Z only
    involves the next level; S also weighs the increments.
    """
    psi1, psi0 = solid
    phi1, phi0 = fluid
    theta1, theta0 = trace
    msig = disc.msig

    def msq(mat, v):
        return float(v @ (mat @ v))

    phi1_tr = phi1[disc.if_f]
    phi0_tr = phi0[disc.if_f]
    z = (
        0.5 * msq(disc.mass_f, phi1)
        + 0.5 * msq(disc.mass_s, psi1)
        + 0.5 * dt * alpha * msq(msig, phi1_tr)
        + 0.5 * dt / alpha * msq(msig, theta1)
    )
    s = (
        dt * (nu_f * msq(disc.stiff_f, phi1) + nu_s * msq(disc.stiff_s, psi1))
        + 0.5 * msq(disc.mass_s, psi1 - psi0)
        + 0.5 * msq(disc.mass_f, phi1 - phi0)
        + 0.5
        * dt
        * alpha
        * msq(msig, (phi1_tr - phi0_tr) + (theta1 - theta0) / alpha)
    )
    return z, s


# ---------------------------------------------------------------------------
# convergence orders and tables

def convergence_orders(values):
    """Observed orders log2(previous / current); NaN where undefined."""
    out = [math.nan]
    for prev, cur in zip(values[:-1], values[1:]):
        if prev is None or cur is None or prev <= 0 or cur <= 0:
            out.append(math.nan)
        else:
            out.append(math.log2(prev / cur))
    return out


@dataclass
class ConvergenceTable:
    """Per-level values and observed orders for a set of quantities."""

    quantities: tuple
    ks: tuple
    values: dict
    orders: dict

    @staticmethod
    def from_reports(reports, quantities):
        """Build from {k: ErrorReport}, ordered by k."""
        ks = tuple(sorted(reports))
        values = {}
        orders = {}
        for q in quantities:
            vals = [getattr(reports[k], q) for k in ks]
            values[q] = vals
            orders[q] = convergence_orders(vals)
        return ConvergenceTable(tuple(quantities), ks, values, orders)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            header = ["k"]
            for q in self.quantities:
                header += [q, f"{q}_order"]
            writer.writerow(header)
            for i, k in enumerate(self.ks):
                row = [k]
                for q in self.quantities:
                    row.append(repr(float(self.values[q][i])))
                    order = self.orders[q][i]
                    row.append("" if math.isnan(order) else repr(float(order)))
                writer.writerow(row)

    @staticmethod
    def read_csv(path):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        header = rows[0]
        quantities = tuple(name for name in header[1:] if not name.endswith("_order"))
        ks = tuple(int(r[0]) for r in rows[1:])
        values = {q: [] for q in quantities}
        orders = {q: [] for q in quantities}
        for r in rows[1:]:
            for j, q in enumerate(quantities):
                values[q].append(float(r[1 + 2 * j]))
                cell = r[2 + 2 * j]
                orders[q].append(math.nan if cell == "" else float(cell))
        return ConvergenceTable(quantities, ks, values, orders)

    def format_text(self):
        """Fixed-width table with three significant digits."""
        cols = ["k"]
        for q in self.quantities:
            cols += [q, "order"]
        lines = []
        rows = []
        for i, k in enumerate(self.ks):
            row = [str(k)]
            for q in self.quantities:
                row.append(f"{self.values[q][i]:.2e}")
                order = self.orders[q][i]
                row.append("-" if math.isnan(order) else f"{order:.2f}")
            rows.append(row)
        widths = [max(len(c), *(len(r[j]) for r in rows)) for j, c in enumerate(cols)]
        lines.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        for row in rows:
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        return "\n".join(lines)
